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
// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>

#include "support/ap_oracle.hpp"
#include "support/eval_instances.hpp"
#include "support/fixtures.hpp"
#include "thermaug/cli.hpp"
#include "thermaug/compositor.hpp"
#include "thermaug/error.hpp"
#include "thermaug/evaluator.hpp"
#include "thermaug/hash.hpp"
#include "thermaug/mixer.hpp"
#include "thermaug/policies.hpp"
#include "thermaug/translate_hook.hpp"

namespace {

using namespace thermaug;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

/// Returns an empty string on success, otherwise what went wrong.
using Check = std::function<std::string()>;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

int cli_run(const std::vector<std::string> &args, std::string *out = nullptr) {
  std::ostringstream o, e;
  const int code = cli::run(args, o, e);
  if (out) *out = o.str();
  if (code != 0) std::cerr << "  [cli] " << e.str();
  return code;
}

std::string evaluator_oracle() {
  Rng rng(0x0a11ce);
  const auto start = Clock::now();
  std::size_t bad = 0;
  double worst = 0;
  for (int t = 0; t < 1000; ++t) {
    const testing::EvalInstance inst = testing::random_eval_instance(rng, 5, 6, 4);
    const APReport r = evaluate(inst.gt, inst.dets);
    const testing::OracleReport o = testing::oracle_evaluate(inst.gt, inst.dets, 0.5);
    double diff = std::abs(r.map - o.map);
    for (const auto &c : r.categories) diff = std::max(diff, std::abs(c.ap - o.ap.at(c.category_id)));
    worst = std::max(worst, diff);
    bad += diff > 1e-9;
  }
  const double took = seconds_since(start);
  if (bad) return std::to_string(bad) + " instances disagree (max diff " + std::to_string(worst) + ")";
  if (took >= 10.0) return "took " + std::to_string(took) + " s";
  return {};
}

std::string ap_fixtures() {
  using L = MatchLabel;
  const std::vector<L> tp = {L::kTruePositive};
  const std::vector<L> tp_fp = {L::kTruePositive, L::kFalsePositive};
  std::string why;
  if (average_precision(tp, 1) != 1.0) why += " [TP]/1";
  if (average_precision(tp_fp, 1) != 1.0) why += " [TP,FP]/1";
  if (average_precision(tp, 2) != 0.5) why += " [TP]/2";
  if (std::abs(iou({0, 0, 10, 10}, {5, 0, 10, 10}) - 1.0 / 3.0) > 1e-12) why += " IoU";
  return why;
}

std::string policy_v0_fidelity() {
  const Policy p = load_policy(fs::path(THERMAUG_SOURCE_DIR) / "configs/policies/bbaug_v0.json");
  if (p.subpolicies.size() != 1 || p.subpolicies[0].size() != 2) return "unexpected shape: " + describe(p);
  const auto &a = p.subpolicies[0][0];
  const auto &b = p.subpolicies[0][1];
  if (a.kind != TransformKind::kTranslateX || a.p != 0.6 || a.m != 4 || b.kind != TransformKind::kEqualize ||
      b.p != 0.8 || b.m != 10)
    return "got " + describe(p);
  if (!(p == policy_v0())) return "differs from the built-in v0";
  return {};
}

// Independent nearest-neighbour lookup: destination pixel d of an n-wide
// scaled copy reads source pixel floor(d * src / n).
int nn(int d, int src, int n) { return static_cast<int>(static_cast<std::int64_t>(d) * src / n); }

std::string compositor_soundness() {
  Rng rng(0xc0ffee);
  std::size_t violations = 0, visible = 0;
  std::string first;
  for (int t = 0; t < 10000; ++t) {
    const int bw = 1 + static_cast<int>(rng.below(64)), bh = 1 + static_cast<int>(rng.below(64));
    const GrayImage bg = testing::random_image(rng, bw, bh);
    const int sw = 1 + static_cast<int>(rng.below(24)), sh = 1 + static_cast<int>(rng.below(24));
    Sprite s{testing::random_image(rng, sw, sh), testing::random_mask(rng, sw, sh, rng.uniform(0.05, 1.0)), 1,
             static_cast<double>(sh)};
    s.mask(static_cast<Eigen::Index>(rng.below(sh)), static_cast<Eigen::Index>(rng.below(sw))) = true;
    const Placement p{0, static_cast<int>(rng.between(-30, bw + 2)), static_cast<int>(rng.between(-30, bh + 2)),
                      rng.uniform(0.2, 3.0)};
    const int W = std::max<int>(1, static_cast<int>(std::lround(sw * p.scale)));
    const int H = std::max<int>(1, static_cast<int>(std::lround(sh * p.scale)));

    Mask expected = Mask::Zero(bh, bw);
    int x0 = bw, y0 = bh, x1 = -1, y1 = -1;
    for (int y = 0; y < bh; ++y)
      for (int x = 0; x < bw; ++x) {
        const int u = x - p.x, v = y - p.y;
        if (u < 0 || v < 0 || u >= W || v >= H || !s.mask(nn(v, sh, H), nn(u, sw, W))) continue;
        expected(y, x) = true;
        x0 = std::min(x0, x), y0 = std::min(y0, y), x1 = std::max(x1, x), y1 = std::max(y1, y);
      }

    auto violate = [&](const std::string &what) {
      if (first.empty()) first = "call " + std::to_string(t) + ": " + what;
      ++violations;
    };
    CompositeResult r;
    try {
      r = composite_one(bg, s, p);
    } catch (const Error &e) {
      if (e.code() != ErrorCode::kNoVisiblePixels || expected.any()) violate(e.what());
      continue;
    }
    ++visible;
    if (!expected.any()) {
      violate("no visible pixels but no error");
      continue;
    }
    if (!same_extent(r.image, bg) || !same_extent(r.mask, bg)) {
      violate("extent changed");
      continue;
    }
    if (!(r.mask == expected).all()) violate("mask differs from the visible sprite pixels");
    const BoundingBox tight{double(x0), double(y0), double(x1 - x0 + 1), double(y1 - y0 + 1)};
    if (!(r.annotation.bbox == tight)) violate("bbox is not the tight box of the visible mask");
    for (int y = 0; y < bh; ++y)
      for (int x = 0; x < bw; ++x) {
        const std::uint8_t want =
            expected(y, x) ? s.image(nn(y - p.y, sh, H), nn(x - p.x, sw, W)) : bg(y, x);
        if (r.image(y, x) != want) {
          violate(expected(y, x) ? "sprite pixel not copied" : "background pixel changed");
          y = bh;
          break;
        }
      }
  }
  if (violations) return std::to_string(violations) + " violations; first at " + first;
  if (visible < 1000) return "too few visible placements exercised: " + std::to_string(visible);
  return {};
}

std::string mixing_arithmetic() {
  auto make = [](const std::string &prefix, std::size_t n) {
    Dataset ds;
    ds.categories = default_categories();
    for (std::size_t i = 0; i < n; ++i) {
      const auto id = static_cast<std::int64_t>(i + 1);
      ds.images.push_back(ImageRecord{id, prefix + std::to_string(i) + ".png", 32, 32, {}});
      ds.annotations.push_back(Annotation{id, id, 1, {1, 1, 4, 4}, Source::kReal});
    }
    return ds;
  };
  const Dataset pool = make("pool/", 5000);
  std::string why;
  for (std::size_t size : {1000u, 8862u})
    for (int percent : {10, 20, 50}) {
      const std::size_t expected = size * static_cast<std::size_t>(percent) / 100;
      const MixResult r = mix(MixSpec{make("real/", size), {{pool, 1.0}}, percent / 100.0, 7});
      const std::size_t added = r.dataset.images.size() - size;
      if (added != expected || r.manifest.target != expected)
        why += " " + std::to_string(size) + "@" + std::to_string(percent) + "%: " + std::to_string(added);
    }
  return why;
}

std::string determinism() {
  testing::TempDir dir;
  const auto files = testing::write_recipe_fixture(dir.path(), 40, false, 6, 96, 64, 11);
  const fs::path real = testing::write_scene_dataset(dir / "real", 40, 96, 64, 12, 3);
  const std::string v0 = (fs::path(THERMAUG_SOURCE_DIR) / "configs/policies/bbaug_v0.json").string();
  const std::string ra = (fs::path(THERMAUG_SOURCE_DIR) / "configs/randaugment_default.json").string();
  std::string why;
  struct Cmd {
    std::string name;
    std::vector<std::string> args;
  };
  const std::vector<Cmd> cmds = {
      {"composite", {"composite", "--recipe", files.recipe.string(), "--seed", "31"}},
      {"augment-v0", {"augment", "--gt", real.string(), "--policy", v0, "--pct", "0.5", "--seed", "31"}},
      {"augment-ra", {"augment", "--gt", real.string(), "--policy", ra, "--pct", "0.5", "--seed", "31"}},
  };
  for (const auto &cmd : cmds) {
    std::uint64_t reference = 0;
    int run = 0;
    for (const char *workers : {"1", "4", "16", "1"}) {
      const fs::path out = dir / (cmd.name + "_" + std::to_string(run++));
      std::vector<std::string> args = cmd.args;
      args.insert(args.end(), {"--out", out.string(), "--workers", workers});
      if (cli_run(args) != 0) return cmd.name + " failed";
      const std::uint64_t h = hash_tree(out);
      if (run == 1) reference = h;
      else if (h != reference) why += " " + cmd.name + "(workers " + workers + ")";
    }
  }
  return why;
}

std::string mask_gate() {
  testing::TempDir dir;
  const auto files = testing::write_recipe_fixture(dir.path(), 4, false);
  const SynthSetSummary synth = generate_synth_set(load_recipe(files.recipe), dir / "synth");
  TranslationJob job;
  job.input = synth.dataset;
  job.image_root = dir / "synth";
  std::string why;

  for (const std::string &cmd :
       {std::string(kIdentityTranslator), "\"" + std::string(THERMAUG_CLI) + "\" identity-translate {dir}"}) {
    job.command = cmd;
    job.exchange_dir = dir / "identity";
    try {
      const TranslationResult r = run_translation(job);
      for (const auto &v : r.verdicts)
        if (!v.passed) why += " identity verdict failed for " + std::to_string(v.image_id);
      for (const auto &img : r.dataset.images) {
        const std::string name = std::to_string(img.id) + ".png";
        if (!(load_image(job.exchange_dir / "out" / name) == load_image(job.exchange_dir / "img" / name)).all())
          why += " identity changed pixels of " + name;
      }
    } catch (const Error &e) {
      why += std::string(" identity raised ") + e.what();
    }
  }

  auto expect_failure = [&](const std::string &mode, ErrorCode want, const std::string &needle) {
    job.command = "\"" + std::string(THERMAUG_FAKE_TRANSLATOR) + "\" " + mode;
    job.exchange_dir = dir / mode;
    try {
      run_translation(job);
      why += " " + mode + " passed";
    } catch (const Error &e) {
      if (e.code() != want) why += " " + mode + " gave " + std::string(e.what());
      else if (std::string(e.what()).find(needle) == std::string::npos)
        why += " " + mode + " message lacks '" + needle + "': " + e.what();
    }
  };
  expect_failure("flip-mask", ErrorCode::kMaskModified, "image " + std::to_string(job.input.images[0].id));
  expect_failure("truncate", ErrorCode::kMissingOutput, std::to_string(job.input.images.back().id) + ".png");
  return why;
}

std::string transform_algebra() {
  Rng rng(0xa1b2);
  std::string why;
  std::size_t bad_inv = 0, bad_idem = 0, bad_extent = 0;
  const std::vector<TransformKind> kinds = {
      TransformKind::kTranslateX,    TransformKind::kTranslateY,    TransformKind::kEqualize,
      TransformKind::kAutoContrast,  TransformKind::kSolarize,      TransformKind::kBrightness,
      TransformKind::kCutout,        TransformKind::kBoxTranslateX, TransformKind::kBoxTranslateY,
      TransformKind::kBoxCutout,     TransformKind::kBoxZoom};
  for (int t = 0; t < 1000; ++t) {
    const int w = 1 + static_cast<int>(rng.below(96)), h = 1 + static_cast<int>(rng.below(96));
    const GrayImage img = t % 2 ? testing::random_image(rng, w, h) : testing::random_skewed_image(rng, w, h);
    if (!(solarize(solarize(img, 0), 0) == img).all()) ++bad_inv;
    const GrayImage e1 = equalize(img);
    const GrayImage e2 = equalize(e1);
    if ((e1.cast<int>() - e2.cast<int>()).abs().maxCoeff() > 1) ++bad_idem;
    const std::vector<Annotation> anns = {
        Annotation{1, 1, 1, {0, 0, double(std::max(1, w / 2)), double(std::max(1, h / 2))}, Source::kReal}};
    for (TransformKind k : kinds) {
      const Augmented a = apply_step(img, anns, k, rng.uniform(0, 10), rng.next());
      if (!same_extent(a.image, img)) ++bad_extent;
    }
    if (!same_extent(autocontrast(img), img) || !same_extent(brightness(img, rng.uniform(0, 2)), img) ||
        !same_extent(translate(img, int(rng.between(-w, w)), int(rng.between(-h, h))), img))
      ++bad_extent;
  }
  if (bad_inv) why += " solarize(0) involution failed " + std::to_string(bad_inv) + "x";
  if (bad_idem) why += " equalize not idempotent " + std::to_string(bad_idem) + "x";
  if (bad_extent) why += " extent changed " + std::to_string(bad_extent) + "x";
  return why;
}

std::string end_to_end() {
  const auto start = Clock::now();
  testing::TempDir dir;
  const auto recipe = testing::write_recipe_fixture(dir.path(), 50, true, 8, 160, 128, 21);
  const fs::path real = testing::write_scene_dataset(dir / "real", 200, 160, 128, 22, 2);
  const std::string v0 = (fs::path(THERMAUG_SOURCE_DIR) / "configs/policies/bbaug_v0.json").string();

  if (cli_run({"composite", "--recipe", recipe.recipe.string(), "--out", (dir / "synth_a").string()}))
    return "composite failed";
  const Dataset synth = parse_dataset(dir / "synth_a" / "dataset.json");
  if (synth.images.size() != 50) return "composite produced " + std::to_string(synth.images.size()) + " images";
  for (const auto &a : synth.annotations)
    if (a.category_id != 1) return "pedestrian-only set contains category " + std::to_string(a.category_id);

  if (cli_run({"augment", "--gt", real.string(), "--policy", v0, "--pct", "0.1", "--out", (dir / "aug").string()}))
    return "augment failed";
  if (parse_dataset(dir / "aug" / "dataset.json").images.size() != 20) return "augment did not emit 20 images";

  const fs::path train = dir / "train" / "train.json";
  if (cli_run({"mix", "--gt", real.string(), "--pool", (dir / "synth_a" / "dataset.json").string(), "--pool",
               (dir / "aug" / "dataset.json").string(), "--pct", "0.1", "--out", train.string()}))
    return "mix failed";
  const Dataset mixed = parse_dataset(train);
  if (mixed.images.size() != 220) return "mixed set has " + std::to_string(mixed.images.size()) + " images";

  write_detections(testing::perfect_detections(mixed), dir / "dets.json");
  std::string table;
  if (cli_run({"eval", "--gt", train.string(), "--dets", (dir / "dets.json").string()}, &table)) return "eval failed";
  const APReport report = evaluate(mixed, testing::perfect_detections(mixed));
  // The row under the Person | ... | mAP header ends in the mAP column.
  std::istringstream lines(table);
  std::string line, row;
  while (std::getline(lines, line))
    if (line.rfind("Person", 0) == 0 && std::getline(lines, row)) break;
  const std::string map_cell = row.substr(row.rfind('|') + 1);
  if (report.map != 1.0 || map_cell != " 100.0") return "report was:\n" + table;
  const double took = seconds_since(start);
  if (took >= 60.0) return "took " + std::to_string(took) + " s";
  return {};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, Check>> criteria = {
      {"evaluator-oracle-equivalence", evaluator_oracle},
      {"worked-ap-fixtures", ap_fixtures},
      {"policy-v0-fidelity", policy_v0_fidelity},
      {"compositor-soundness", compositor_soundness},
      {"mixing-arithmetic", mixing_arithmetic},
      {"determinism", determinism},
      {"mask-integrity-gate", mask_gate},
      {"transform-algebra", transform_algebra},
      {"end-to-end-smoke", end_to_end},
  };
  int failed = 0;
  for (const auto &[name, check] : criteria) {
    const auto start = Clock::now();
    std::string why;
    try {
      why = check();
    } catch (const std::exception &e) {
      why = std::string("exception: ") + e.what();
    }
    char took[32];
    std::snprintf(took, sizeof took, "%.2fs", seconds_since(start));
    if (why.empty()) {
      std::cout << "PASS " << name << " (" << took << ")\n";
    } else {
      ++failed;
      std::cout << "FAIL " << name << " (" << took << "): " << why << "\n";
    }
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " acceptance criteria passed\n";
  return failed ? 1 : 0;
}
