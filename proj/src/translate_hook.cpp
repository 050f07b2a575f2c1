/**
 * Copyright 2026 The thermaug Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "thermaug/translate_hook.hpp"

#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <memory>

#include "thermaug/error.hpp"
#include "thermaug/hash.hpp"
#include "thermaug/image_io.hpp"
#include "thermaug/parallel.hpp"

namespace thermaug {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string id_file(std::int64_t id) { return std::to_string(id) + ".png"; }

std::string shell_quote(const std::string &s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out += c;
  }
  return out + "'";
}

std::string job_json(const std::vector<std::int64_t> &ids, const std::string &src, const std::string &dst) {
  nlohmann::ordered_json j;
  j["ids"] = ids;
  j["source_label"] = src;
  j["target_label"] = dst;
  return j.dump(2) + "\n";
}

void reset_dir(const fs::path &dir) {
  std::error_code ec;
  fs::remove_all(dir, ec);
  fs::create_directories(dir, ec);
  if (ec) raise(ErrorCode::kIoError, "cannot create " + dir.string() + ": " + ec.message());
}

void copy_over(const fs::path &from, const fs::path &to) {
  std::error_code ec;
  fs::create_directories(to.parent_path(), ec);
  fs::copy_file(from, to, fs::copy_options::overwrite_existing, ec);
  if (ec) raise(ErrorCode::kIoError, "cannot copy " + from.string() + " to " + to.string() + ": " + ec.message());
}

/// Runs `command` through the shell; returns combined stdout/stderr.
std::string invoke(const std::string &command_template, const fs::path &dir) {
  if (command_template == kIdentityTranslator) {
    identity_translate(dir);
    return {};
  }
  std::string cmd = command_template;
  const std::string quoted = shell_quote(dir.string());
  const auto at = cmd.find("{dir}");
  if (at == std::string::npos)
    cmd += " " + quoted;
  else
    cmd.replace(at, 5, quoted);
  cmd += " 2>&1";

  std::FILE *pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) raise(ErrorCode::kCommandFailed, "cannot start: " + command_template);
  std::string output;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) output.append(buf, n);
  const int status = ::pclose(pipe);
  if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    const std::string code = status != -1 && WIFEXITED(status) ? "exit " + std::to_string(WEXITSTATUS(status))
                                                               : "abnormal termination";
    const std::string tail = output.size() > 2000 ? output.substr(output.size() - 2000) : output;
    raise(ErrorCode::kCommandFailed, "translator " + code + " for " + dir.string() + ": " + tail);
  }
  return output;
}

struct LoadedPair {
  GrayImage image;
  GrayImage mask;
};

}  // namespace

JobManifest read_job_manifest(const fs::path &exchange_dir) {
  const fs::path path = exchange_dir / "job.json";
  const std::string text = read_text_file(path);
  try {
    const json j = json::parse(text);
    JobManifest m;
    m.ids = j.at("ids").get<std::vector<std::int64_t>>();
    m.source_label = j.at("source_label").get<std::string>();
    m.target_label = j.at("target_label").get<std::string>();
    return m;
  } catch (const json::parse_error &e) {
    raise(ErrorCode::kSyntaxError, path.string() + ": " + e.what());
  } catch (const json::exception &e) {
    raise(ErrorCode::kSchemaError, path.string() + ": " + e.what());
  }
}

void identity_translate(const fs::path &exchange_dir) {
  const JobManifest job = read_job_manifest(exchange_dir);
  std::error_code ec;
  fs::create_directories(exchange_dir / "out", ec);
  if (ec) raise(ErrorCode::kIoError, "cannot create " + (exchange_dir / "out").string());
  for (std::int64_t id : job.ids) copy_over(exchange_dir / "img" / id_file(id), exchange_dir / "out" / id_file(id));
}

ExportedJob export_pairs(const TranslationJob &job) {
  const auto &images = job.input.images;
  for (const auto &r : images)
    if (r.mask_file.empty()) raise(ErrorCode::kValidationError, "image " + std::to_string(r.id) + " has no mask");

  std::vector<LoadedPair> pairs(images.size());
  parallel_for(images.size(), job.workers, [&](std::size_t i) {
    const ImageRecord &r = images[i];
    pairs[i].image = load_image(job.image_root / r.file_name);
    pairs[i].mask = mask_to_gray(load_mask(job.image_root / r.mask_file));
    if (!same_extent(pairs[i].image, pairs[i].mask) || width(pairs[i].image) != r.width ||
        height(pairs[i].image) != r.height)
      raise(ErrorCode::kValidationError, "image " + std::to_string(r.id) + ": image, mask and record extents differ");
  });

  const fs::path &dir = job.exchange_dir;
  reset_dir(dir / "img");
  reset_dir(dir / "mask");
  std::error_code ec;
  fs::remove_all(dir / "out", ec);
  fs::remove_all(dir / "out_mask", ec);
  fs::remove_all(dir / "single", ec);

  ExportedJob exported;
  for (const auto &r : images) exported.ids.push_back(r.id);
  std::vector<std::uint64_t> img_hash(images.size()), mask_hash(images.size());
  parallel_for(images.size(), job.workers, [&](std::size_t i) {
    const std::string name = id_file(images[i].id);
    save_image(pairs[i].image, dir / "img" / name);
    save_image(pairs[i].mask, dir / "mask" / name);
    img_hash[i] = hash_file(dir / "img" / name);
    mask_hash[i] = hash_file(dir / "mask" / name);
  });
  for (std::size_t i = 0; i < images.size(); ++i) {
    exported.input_hashes["img/" + id_file(images[i].id)] = img_hash[i];
    exported.input_hashes["mask/" + id_file(images[i].id)] = mask_hash[i];
  }
  const std::string manifest = job_json(exported.ids, job.source_label, job.target_label);
  write_text_file(dir / "job.json", manifest);
  exported.input_hashes["job.json"] = fnv1a64(manifest);
  return exported;
}

TranslationResult run_translation(const TranslationJob &job) {
  const ExportedJob exported = export_pairs(job);
  const fs::path &dir = job.exchange_dir;
  TranslationResult result;

  if (!job.per_image) {
    result.diagnostics = invoke(job.command, dir);
  } else {
    for (std::int64_t id : exported.ids) {
      const fs::path single = dir / "single" / std::to_string(id);
      const std::string name = id_file(id);
      reset_dir(single);
      copy_over(dir / "img" / name, single / "img" / name);
      copy_over(dir / "mask" / name, single / "mask" / name);
      write_text_file(single / "job.json", job_json({id}, job.source_label, job.target_label));
      result.diagnostics += invoke(job.command, single);
      if (fs::exists(single / "out" / name)) copy_over(single / "out" / name, dir / "out" / name);
      if (fs::exists(single / "out_mask" / name)) copy_over(single / "out_mask" / name, dir / "out_mask" / name);
    }
    std::error_code ec;
    fs::remove_all(dir / "single", ec);
  }

  for (const auto &[rel, h] : exported.input_hashes) {
    const fs::path p = dir / rel;
    if (!fs::exists(p) || hash_file(p) != h)
      raise(ErrorCode::kValidationError, "translator modified exchange input " + rel);
  }

  const auto &images = job.input.images;
  result.verdicts.resize(images.size());
  std::vector<ErrorCode> codes(images.size(), ErrorCode::kIoError);
  parallel_for(images.size(), job.workers, [&](std::size_t i) {
    const ImageRecord &r = images[i];
    const std::string name = id_file(r.id);
    IntegrityVerdict &v = result.verdicts[i];
    v.image_id = r.id;
    const fs::path out = dir / "out" / name;
    if (!fs::exists(out)) {
      codes[i] = ErrorCode::kMissingOutput;
      v.message = "no translated image out/" + name;
      return;
    }
    GrayImage translated;
    try {
      translated = load_image(out);
    } catch (const Error &e) {
      codes[i] = ErrorCode::kMissingOutput;
      v.message = "unreadable translated image out/" + name + " (" + e.detail() + ")";
      return;
    }
    if (width(translated) != r.width || height(translated) != r.height) {
      codes[i] = ErrorCode::kExtentMismatch;
      v.message = "out/" + name + " is " + std::to_string(width(translated)) + "x" +
                  std::to_string(height(translated)) + ", expected " + std::to_string(r.width) + "x" +
                  std::to_string(r.height);
      return;
    }
    const fs::path out_mask = dir / "out_mask" / name;
    if (fs::exists(out_mask)) {
      v.mask_echoed = true;
      GrayImage echoed;
      try {
        echoed = load_image(out_mask);
      } catch (const Error &e) {
        codes[i] = ErrorCode::kMissingOutput;
        v.message = "unreadable echoed mask out_mask/" + name + " (" + e.detail() + ")";
        return;
      }
      const GrayImage original = load_image(dir / "mask" / name);
      if (!same_extent(echoed, original)) {
        codes[i] = ErrorCode::kExtentMismatch;
        v.message = "out_mask/" + name + " has a different extent from the input mask";
        return;
      }
      const auto changed = (echoed != original).count();
      if (changed > 0) {
        codes[i] = ErrorCode::kMaskModified;
        v.message = "mask of image " + std::to_string(r.id) + " modified at " + std::to_string(changed) + " pixel(s)";
        return;
      }
    }
    v.passed = true;
  });

  std::string failures;
  ErrorCode first = ErrorCode::kIoError;
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (result.verdicts[i].passed) continue;
    if (failures.empty()) first = codes[i];
    failures += (failures.empty() ? "" : "; ") + std::string("image ") + std::to_string(images[i].id) + ": " +
                result.verdicts[i].message;
  }
  if (!failures.empty()) raise(first, failures);

  Dataset &ds = result.dataset;
  ds.categories = job.input.categories;
  for (const auto &r : images) {
    const std::string name = id_file(r.id);
    ds.images.push_back(ImageRecord{r.id, "out/" + name, r.width, r.height, "mask/" + name});
  }
  for (Annotation a : job.input.annotations) {
    a.source = Source::kTranslated;
    ds.annotations.push_back(a);
  }
  result.dataset_path = dir / "translated.json";
  write_dataset(ds, result.dataset_path);
  return result;
}

}  // namespace thermaug
