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
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "thermaug/annotations.hpp"

namespace thermaug {

/// Command value that runs the in-process identity translator.
inline constexpr std::string_view kIdentityTranslator = "builtin:identity";

/// Exchange layout written for the external translator:
///   <dir>/job.json        {ids, source_label, target_label}
///   <dir>/img/<id>.png    8-bit gray frame
///   <dir>/mask/<id>.png   object mask, 0/255
/// The translator writes <dir>/out/<id>.png and optionally <dir>/out_mask/<id>.png.
struct TranslationJob {
  /// Every image must carry a mask_file.
  Dataset input;
  std::filesystem::path image_root;
  /// "{dir}" is replaced by the quoted exchange directory; without a
  /// placeholder the directory is appended as the only argument.
  std::string command{kIdentityTranslator};
  std::filesystem::path exchange_dir;
  std::string source_label = "synth";
  std::string target_label = "real";
  /// One invocation per image through <dir>/single/<id>/ instead of one for the whole directory.
  bool per_image = false;
  unsigned workers = 1;
};

struct ExportedJob {
  std::vector<std::int64_t> ids;
  /// Relative path -> content hash of every exchange input.
  std::map<std::string, std::uint64_t> input_hashes;
};

struct IntegrityVerdict {
  std::int64_t image_id = 0;
  bool passed = false;
  bool mask_echoed = false;
  std::string message;
};

struct TranslationResult {
  /// Paths relative to the exchange directory; annotations tagged translated.
  Dataset dataset;
  std::vector<IntegrityVerdict> verdicts;
  std::filesystem::path dataset_path;
  std::string diagnostics;
};

/// Validates the whole job before anything is written; clears stale out/ and out_mask/.
ExportedJob export_pairs(const TranslationJob &job);

/// Exports, invokes the translator once, verifies and imports. Any failed
/// verdict is a hard error (MissingOutput, ExtentMismatch or MaskModified)
/// naming the image ids.
TranslationResult run_translation(const TranslationJob &job);

/// Copies img/ to out/ for every id of job.json.
void identity_translate(const std::filesystem::path &exchange_dir);

struct JobManifest {
  std::vector<std::int64_t> ids;
  std::string source_label;
  std::string target_label;
};

JobManifest read_job_manifest(const std::filesystem::path &exchange_dir);

}  // namespace thermaug
