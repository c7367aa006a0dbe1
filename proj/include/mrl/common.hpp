/*
 * Copyright 2026 The mrl-workbench Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef MRL_COMMON_HPP_
#define MRL_COMMON_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mrl {

enum class ErrorCode {
  kInvalidArgument,
  kInsufficientData,
  kEmptyInput,
  kSeqOverflow,
  kNoPairs,
  kParseError,
  kIoError,
  kDivergence,
  kOracleFailure,
  kMissingStage,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Version stamped into every artifact the workbench writes.
inline constexpr int kFormatVersion = 1;

std::uint64_t splitmix64(std::uint64_t x);

// Stable 64-bit hash of a string, mixed with a seed. Independent of platform
// and standard library.
std::uint64_t stable_hash(std::string_view text, std::uint64_t seed = 0);

// Derives a child seed from a parent seed and a label.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

std::string sha256_hex(std::string_view data);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);
std::vector<std::string> read_lines(const std::string& path);

std::vector<std::string> split(std::string_view text, char delimiter);

}  // namespace mrl

#endif  // MRL_COMMON_HPP_
