// Copyright 2026 The odrl-drive Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ODRL__COMMON_HPP_
#define ODRL__COMMON_HPP_

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace odrl
{

enum class ErrorCode {
  InvalidSpec,
  SteppedTerminal,
  TooFewSamples,
  LengthMismatch,
  ShapeMismatch,
  EmptyMixture,
  HashMismatch,
  CorruptFile,
  IndexOutOfRange,
  MissingLabel,
  NonFiniteLoss,
  EmptySet,
  TooShort,
  OutOfRange,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for every recoverable failure; `code()` carries the category.
class Error : public std::runtime_error
{
public:
  Error(ErrorCode code, const std::string & what)
  : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
  {
  }

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

/// SHA-256 digest.
using Digest = std::array<std::uint8_t, 32>;

Digest sha256(std::span<const std::uint8_t> bytes);
Digest sha256(std::string_view text);
std::string to_hex(const Digest & digest);
Digest digest_from_hex(std::string_view hex);

/// Derives a stage seed from the master seed by hashing the stage name.
std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view stage);

/// Portable random source.
///
/// std::mt19937_64 output is fixed by the standard, the std distributions are
/// not, so uniform/normal/integer draws are computed here from raw engine bits.
class Rng
{
public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via Box-Muller, no caching so each call consumes two draws.
  double normal();

private:
  std::mt19937_64 engine_;
};

}  // namespace odrl

#endif  // ODRL__COMMON_HPP_
