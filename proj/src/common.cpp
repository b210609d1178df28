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

#include "odrl/common.hpp"

#include <openssl/sha.h>

#include <cmath>
#include <numbers>

namespace odrl
{

std::string_view to_string(ErrorCode code)
{
  switch (code) {
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::SteppedTerminal: return "SteppedTerminal";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptyMixture: return "EmptyMixture";
    case ErrorCode::HashMismatch: return "HashMismatch";
    case ErrorCode::CorruptFile: return "CorruptFile";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::MissingLabel: return "MissingLabel";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Digest sha256(std::span<const std::uint8_t> bytes)
{
  Digest out{};
  SHA256(bytes.data(), bytes.size(), out.data());
  return out;
}

Digest sha256(std::string_view text)
{
  return sha256(std::span<const std::uint8_t>(
    reinterpret_cast<const std::uint8_t *>(text.data()), text.size()));
}

std::string to_hex(const Digest & digest)
{
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(64);
  for (auto byte : digest) {
    out.push_back(kHex[byte >> 4]);
    out.push_back(kHex[byte & 0xF]);
  }
  return out;
}

Digest digest_from_hex(std::string_view hex)
{
  if (hex.size() != 64) {
    throw Error(ErrorCode::CorruptFile, "digest must be 64 hex characters");
  }
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw Error(ErrorCode::CorruptFile, "bad hex digit in digest");
  };
  Digest out{};
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
  }
  return out;
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view stage)
{
  std::string text = std::to_string(master_seed);
  text.push_back('/');
  text.append(stage);
  const auto digest = sha256(text);
  std::uint64_t seed = 0;
  for (int i = 0; i < 8; ++i) {
    seed = (seed << 8) | digest[i];
  }
  return seed;
}

std::uint64_t Rng::below(std::uint64_t n)
{
  if (n == 0) {
    throw Error(ErrorCode::OutOfRange, "Rng::below(0)");
  }
  // Rejection keeps the draw exactly uniform.
  const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % n);
  std::uint64_t x = engine_();
  while (x >= limit) {
    x = engine_();
  }
  return x % n;
}

double Rng::normal()
{
  double u1 = uniform();
  while (u1 <= 0.0) {
    u1 = uniform();
  }
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace odrl
