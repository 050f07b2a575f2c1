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
#include "thermaug/cli.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>

#include "thermaug/annotations.hpp"
#include "thermaug/compositor.hpp"
#include "thermaug/error.hpp"
#include "thermaug/evaluator.hpp"
#include "thermaug/mixer.hpp"
#include "thermaug/policies.hpp"
#include "thermaug/translate_hook.hpp"

namespace thermaug::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct RunConfig {
  std::uint64_t seed = kDefaultSeed;
  unsigned workers = 1;
  bool json = false;
  bool verbose = false;

  std::string gt;
  std::string dets;
  std::string recipe;
  std::string out;
  std::string policy;
  std::string images;
  std::vector<std::string> pools;
  std::string manifest;
  std::string command{kIdentityTranslator};
  std::string source_label = "synth";
  std::string target_label = "real";
  std::string label;
  std::string exchange_dir;
  double pct = default_percentage();
  double iou = 0.5;
  int fill = 0;
  bool eleven_point = false;
  bool allow_unknown = false;
  bool check_images = false;
  bool per_image = false;
};

/// Raised for anything wrong with the invocation or its inputs (exit 2).
struct ConfigFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename Fn>
auto configure(Fn &&fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error &e) {
    throw ConfigFailure(e.what());
  }
}

std::string fmt(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

void echo_config(std::ostream &out, const RunConfig &c, const std::string &cmd, const std::string &extra) {
  if (c.json) return;
  out << "config: command=" << cmd << " seed=" << c.seed << " workers=" << c.workers << extra << "\n";
}

DatasetOptions dataset_options(const RunConfig &c) { return DatasetOptions{.allow_unknown_categories = c.allow_unknown}; }

fs::path root_of(const std::string &dataset_path, const std::string &override_root) {
  if (!override_root.empty()) return override_root;
  return fs::path(dataset_path).parent_path();
}

/// Makes file names relative to `to_dir` so a combined dataset resolves from its own location.
Dataset rebase(Dataset ds, const fs::path &from_dir, const fs::path &to_dir) {
  const fs::path to = fs::weakly_canonical(fs::absolute(to_dir));
  auto fix = [&](std::string &name) {
    if (name.empty()) return;
    name = fs::relative(fs::weakly_canonical(fs::absolute(from_dir / name)), to).generic_string();
  };
  for (auto &r : ds.images) {
    fix(r.file_name);
    fix(r.mask_file);
  }
  return ds;
}

int cmd_validate(const RunConfig &c, std::ostream &out) {
  const Dataset ds = configure([&] { return parse_dataset(c.gt, dataset_options(c)); });
  if (c.check_images) {
    const fs::path root = root_of(c.gt, c.images);
    for (const auto &r : ds.images) {
      const fs::path p = root / r.file_name;
      if (!fs::exists(p)) raise(ErrorCode::kIoError, "missing image file " + p.string());
    }
  }
  if (c.json) {
    out << ordered_json{{"valid", true}, {"images", ds.images.size()}, {"annotations", ds.annotations.size()},
                        {"categories", ds.categories.size()}}
               .dump(2)
        << "\n";
  } else {
    out << "valid: " << ds.images.size() << " images, " << ds.annotations.size() << " annotations, "
        << ds.categories.size() << " categories\n";
  }
  return kOk;
}

int cmd_stats(const RunConfig &c, std::ostream &out) {
  const Dataset ds = configure([&] { return parse_dataset(c.gt, dataset_options(c)); });
  const DatasetStats s = dataset_stats(ds);
  if (c.json) {
    ordered_json j;
    j["images"] = s.images;
    j["annotations"] = s.annotations;
    j["per_category"] = s.per_category;
    j["per_source"] = s.per_source;
    out << j.dump(2) << "\n";
    return kOk;
  }
  out << "images: " << s.images << "\nannotations: " << s.annotations << "\n";
  for (const auto &cat : ds.categories) out << "  " << cat.name << ": " << s.per_category.at(cat.name) << "\n";
  for (const auto &[src, n] : s.per_source) out << "  source " << src << ": " << n << "\n";
  return kOk;
}

int cmd_composite(const RunConfig &c, bool seed_given, std::ostream &out) {
  CompositeRecipe recipe = configure([&] { return load_recipe(c.recipe); });
  if (seed_given) recipe.seed = c.seed;
  echo_config(out, c, "composite", " recipe=" + c.recipe + " recipe_seed=" + std::to_string(recipe.seed));
  const SynthSetSummary s = generate_synth_set(recipe, c.out, c.workers);
  const DatasetStats st = dataset_stats(s.dataset);
  if (c.json) {
    ordered_json j;
    j["dataset"] = s.dataset_path.string();
    j["images"] = st.images;
    j["annotations"] = st.annotations;
    j["per_category"] = st.per_category;
    j["seed"] = recipe.seed;
    out << j.dump(2) << "\n";
  } else {
    out << "composited " << st.images << " images, " << st.annotations << " annotations -> "
        << s.dataset_path.string() << "\n";
    for (const auto &[name, n] : st.per_category) out << "  " << name << ": " << n << "\n";
  }
  return kOk;
}

int cmd_augment(const RunConfig &c, std::ostream &out) {
  const Dataset ds = configure([&] { return parse_dataset(c.gt, dataset_options(c)); });
  const AugmentProgram program = configure([&] { return load_program(c.policy); });
  if (!(c.pct > 0.0)) throw ConfigFailure("augment needs --pct in (0, 1]");
  if (c.fill < 0 || c.fill > 255) throw ConfigFailure("--fill must lie in 0..255");
  const std::string desc = std::visit([](const auto &p) { return describe(p); }, program);
  echo_config(out, c, "augment", " pct=" + fmt(c.pct) + " policy=" + c.policy);
  if (!c.json) out << desc << "\n";
  const auto res = augment_dataset(ds, root_of(c.gt, c.images), program, c.pct, c.seed, c.out, c.workers,
                                   AugmentOptions{static_cast<std::uint8_t>(c.fill)});
  if (c.json) {
    ordered_json j;
    j["program"] = desc;
    j["seed"] = c.seed;
    j["pct"] = c.pct;
    j["images"] = res.dataset.images.size();
    j["annotations"] = res.dataset.annotations.size();
    j["source_ids"] = res.source_ids;
    out << j.dump(2) << "\n";
  } else {
    out << "augmented " << res.dataset.images.size() << " of " << ds.images.size() << " images -> "
        << (fs::path(c.out) / "dataset.json").string() << "\n";
  }
  return kOk;
}

int cmd_mix(const RunConfig &c, std::ostream &out) {
  const fs::path out_path = c.out;
  const fs::path out_dir = out_path.has_parent_path() ? out_path.parent_path() : fs::path(".");
  MixSpec spec = configure([&] {
    MixSpec s;
    s.real = rebase(parse_dataset(c.gt, dataset_options(c)), root_of(c.gt, c.images), out_dir);
    for (const std::string &arg : c.pools) {
      std::string path = arg;
      double weight = 1.0;
      const auto colon = arg.rfind(':');
      if (colon != std::string::npos) {
        try {
          std::size_t used = 0;
          weight = std::stod(arg.substr(colon + 1), &used);
          if (used != arg.size() - colon - 1) throw std::invalid_argument("trailing");
          path = arg.substr(0, colon);
        } catch (const std::exception &) {
          weight = 1.0;
          path = arg;
        }
      }
      s.pools.push_back(
          MixPool{rebase(parse_dataset(path, dataset_options(c)), fs::path(path).parent_path(), out_dir), weight});
    }
    s.percentage = c.pct;
    s.seed = c.seed;
    return s;
  });
  echo_config(out, c, "mix", " pct=" + fmt(c.pct));
  MixResult res;
  try {
    res = mix(spec);
  } catch (const Error &e) {
    if (e.code() == ErrorCode::kCategoryMismatch || e.code() == ErrorCode::kInvalidArgument)
      throw ConfigFailure(e.what());
    throw;
  }
  write_dataset(res.dataset, out_path);
  const fs::path manifest =
      c.manifest.empty() ? fs::path(out_path).replace_extension(".manifest.json") : fs::path(c.manifest);
  write_text_file(manifest, manifest_to_text(res.manifest));
  if (c.json) {
    ordered_json j;
    j["dataset"] = out_path.string();
    j["manifest"] = manifest.string();
    j["real_images"] = spec.real.images.size();
    j["added"] = res.manifest.target;
    j["images"] = res.dataset.images.size();
    j["seed"] = c.seed;
    j["pct"] = c.pct;
    out << j.dump(2) << "\n";
  } else {
    out << "mixed " << res.manifest.target << " images into " << spec.real.images.size() << " real -> "
        << res.dataset.images.size() << " images (" << out_path.string() << ")\n";
  }
  return kOk;
}

int cmd_translate(const RunConfig &c, std::ostream &out) {
  TranslationJob job = configure([&] {
    TranslationJob j;
    j.input = parse_dataset(c.gt, dataset_options(c));
    return j;
  });
  job.image_root = root_of(c.gt, c.images);
  job.command = c.command;
  job.exchange_dir = c.out;
  job.source_label = c.source_label;
  job.target_label = c.target_label;
  job.per_image = c.per_image;
  job.workers = c.workers;
  echo_config(out, c, "translate", " command=" + c.command + " " + c.source_label + "->" + c.target_label);
  const TranslationResult res = run_translation(job);
  std::size_t echoed = 0;
  for (const auto &v : res.verdicts) echoed += v.mask_echoed ? 1 : 0;
  if (c.json) {
    ordered_json j;
    j["dataset"] = res.dataset_path.string();
    j["images"] = res.dataset.images.size();
    j["masks_echoed"] = echoed;
    j["all_passed"] = true;
    out << j.dump(2) << "\n";
  } else {
    out << "translated " << res.dataset.images.size() << " images, " << echoed
        << " echoed masks verified -> " << res.dataset_path.string() << "\n";
    if (c.verbose && !res.diagnostics.empty()) out << res.diagnostics;
  }
  return kOk;
}

int cmd_eval(const RunConfig &c, std::ostream &out) {
  const Dataset gt = configure([&] { return parse_dataset(c.gt, dataset_options(c)); });
  const auto dets = configure([&] { return parse_detections(c.dets); });
  EvalConfig cfg{c.iou, c.eleven_point ? Interpolation::kElevenPoint : Interpolation::kAllPoint};
  const APReport report = configure([&] { return evaluate(gt, dets, cfg); });
  if (c.json) {
    out << report_json(report);
    return kOk;
  }
  echo_config(out, c, "eval", " iou=" + fmt(c.iou) + (c.eleven_point ? " interpolation=eleven-point" : " interpolation=all-point"));
  out << report_table(report, c.label);
  for (const auto &cat : report.categories)
    if (!cat.included) out << "note: " << cat.name << " has no ground truth and is excluded from mAP\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  RunConfig c;
  CLI::App app{"thermaug: thermal detection dataset augmentation and evaluation", "thermaug"};
  app.fallthrough();
  app.require_subcommand(1);
  app.add_option("--seed", c.seed, "Seed for every random choice (default " + std::to_string(kDefaultSeed) + ")");
  app.add_option("--workers", c.workers, "Worker threads; never changes outputs")->check(CLI::Range(1u, 1024u));
  app.add_flag("--json", c.json, "Machine-readable report on stdout");
  app.add_flag("-v,--verbose", c.verbose, "Verbose output");
  app.add_flag("--allow-unknown-categories", c.allow_unknown, "Accept classes outside person/bicycle/car");

  auto *validate_cmd = app.add_subcommand("validate", "Parse and check a ground-truth file");
  validate_cmd->add_option("--gt", c.gt, "Ground-truth JSON")->required();
  validate_cmd->add_option("--images", c.images, "Image root (default: the JSON's directory)");
  validate_cmd->add_flag("--check-images", c.check_images, "Also require every image file to exist");

  auto *stats_cmd = app.add_subcommand("stats", "Per-category and per-source annotation counts");
  stats_cmd->add_option("--gt", c.gt, "Ground-truth JSON")->required();

  auto *composite_cmd = app.add_subcommand("composite", "Composite sprites over backgrounds");
  composite_cmd->add_option("--recipe", c.recipe, "Recipe JSON")->required();
  composite_cmd->add_option("--out", c.out, "Output directory")->required();

  auto *augment_cmd = app.add_subcommand("augment", "Augment a fraction of a dataset with a policy or RandAugment");
  augment_cmd->add_option("--gt", c.gt, "Dataset to augment")->required();
  augment_cmd->add_option("--policy", c.policy, "Policy or RandAugment JSON")->required();
  augment_cmd->add_option("--pct", c.pct, "Fraction of images to augment")->check(CLI::Range(0.0, 1.0));
  augment_cmd->add_option("--out", c.out, "Output directory")->required();
  augment_cmd->add_option("--images", c.images, "Image root (default: the JSON's directory)");
  augment_cmd->add_option("--fill", c.fill, "Fill value for vacated pixels")->check(CLI::Range(0, 255));

  auto *mix_cmd = app.add_subcommand("mix", "Add a percentage of pooled samples to a real set");
  mix_cmd->add_option("--gt,--real", c.gt, "Real training set")->required();
  mix_cmd->add_option("--pool", c.pools, "Pool dataset, optionally path:weight (repeatable)")->required();
  mix_cmd->add_option("--pct", c.pct, "Added images relative to the real set")->check(CLI::Range(0.0, 1.0));
  mix_cmd->add_option("--out", c.out, "Output dataset JSON")->required();
  mix_cmd->add_option("--manifest", c.manifest, "Manifest path (default: <out> with extension .manifest.json)");
  mix_cmd->add_option("--images", c.images, "Image root of the real set");

  auto *translate_cmd = app.add_subcommand("translate", "Run an external translator under the mask contract");
  translate_cmd->add_option("--gt", c.gt, "Synthetic dataset with mask_file entries")->required();
  translate_cmd->add_option("--out", c.out, "Exchange directory")->required();
  translate_cmd->add_option("--command", c.command, "Translator command template ({dir} placeholder)");
  translate_cmd->add_option("--source-label", c.source_label, "Source domain label");
  translate_cmd->add_option("--target-label", c.target_label, "Target domain label");
  translate_cmd->add_option("--images", c.images, "Image root (default: the JSON's directory)");
  translate_cmd->add_flag("--per-image", c.per_image, "Invoke the translator once per image");

  auto *eval_cmd = app.add_subcommand("eval", "Per-class AP and mAP of detections");
  eval_cmd->add_option("--gt", c.gt, "Ground-truth JSON")->required();
  eval_cmd->add_option("--dets", c.dets, "Detections JSON")->required();
  eval_cmd->add_option("--iou", c.iou, "IoU threshold")->check(CLI::Range(0.0, 1.0));
  eval_cmd->add_flag("--eleven-point", c.eleven_point, "Eleven-point interpolated AP");
  eval_cmd->add_option("--label", c.label, "Row label of the table");

  auto *identity_cmd = app.add_subcommand("identity-translate", "Reference translator: copies img/ to out/");
  identity_cmd->add_option("dir", c.exchange_dir, "Exchange directory")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError &e) {
    err << "error: usage: " << e.what() << "\n";
    return kConfigError;
  }
  if (eval_cmd->parsed() && !(c.iou > 0.0)) {
    err << "error: usage: --iou must lie in (0, 1]\n";
    return kConfigError;
  }

  try {
    if (validate_cmd->parsed()) return cmd_validate(c, out);
    if (stats_cmd->parsed()) return cmd_stats(c, out);
    if (composite_cmd->parsed()) return cmd_composite(c, app.count("--seed") > 0, out);
    if (augment_cmd->parsed()) return cmd_augment(c, out);
    if (mix_cmd->parsed()) return cmd_mix(c, out);
    if (translate_cmd->parsed()) return cmd_translate(c, out);
    if (eval_cmd->parsed()) return cmd_eval(c, out);
    if (identity_cmd->parsed()) {
      identity_translate(c.exchange_dir);
      return kOk;
    }
  } catch (const ConfigFailure &e) {
    err << "error: config: " << e.what() << "\n";
    return kConfigError;
  } catch (const Error &e) {
    err << "error: runtime: " << e.what() << "\n";
    return kRuntimeError;
  } catch (const std::exception &e) {
    err << "error: runtime: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kConfigError;
}

}  // namespace thermaug::cli
