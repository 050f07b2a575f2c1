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
#include <span>
#include <string_view>

namespace thermaug {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

/// FNV-1a, 64-bit. Chain calls by passing the previous result as `h`.
constexpr std::uint64_t fnv1a64(std::span<const unsigned char> bytes, std::uint64_t h = kFnvOffset) noexcept {
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = kFnvOffset) noexcept {
  return fnv1a64(std::span(reinterpret_cast<const unsigned char *>(s.data()), s.size()), h);
}

/// Hash of a file's contents. Throws IoError if it cannot be read.
std::uint64_t hash_file(const std::filesystem::path &path);

/// Hashes the sorted relative paths and contents of every regular file below `root`.
std::uint64_t hash_tree(const std::filesystem::path &root);

}  // namespace thermaug
