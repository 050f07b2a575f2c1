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
#include "thermaug/hash.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "thermaug/annotations.hpp"

namespace thermaug {

std::uint64_t hash_file(const std::filesystem::path &path) { return fnv1a64(read_text_file(path)); }

std::uint64_t hash_tree(const std::filesystem::path &root) {
  std::vector<std::string> files;
  for (const auto &e : std::filesystem::recursive_directory_iterator(root))
    if (e.is_regular_file()) files.push_back(std::filesystem::relative(e.path(), root).generic_string());
  std::sort(files.begin(), files.end());
  std::uint64_t h = kFnvOffset;
  for (const auto &f : files) {
    h = fnv1a64(f, h);
    h = fnv1a64(std::string_view("\0", 1), h);
    h = fnv1a64(read_text_file(root / f), h);
  }
  return h;
}

}  // namespace thermaug
