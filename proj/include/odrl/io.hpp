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

#ifndef ODRL__IO_HPP_
#define ODRL__IO_HPP_

#include "odrl/common.hpp"

#include <nlohmann/json.hpp>

#include <Eigen/Core>

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace odrl
{

/// Writes through a temporary sibling and renames, so readers never see partial files.
void write_text_file(const std::filesystem::path & path, std::string_view contents);
void write_binary_file(const std::filesystem::path & path, const std::vector<std::uint8_t> & bytes);
std::string read_text_file(const std::filesystem::path & path);
std::vector<std::uint8_t> read_binary_file(const std::filesystem::path & path);
nlohmann::json parse_json_file(const std::filesystem::path & path);

Digest file_digest(const std::filesystem::path & path);

static_assert(std::endian::native == std::endian::little, "binary formats assume little endian");

/// Little-endian byte sink for the binary record formats.
class BinaryWriter
{
public:
  template <typename T>
  void put(T value)
  {
    static_assert(std::is_trivially_copyable_v<T>);
    const auto * p = reinterpret_cast<const std::uint8_t *>(&value);
    bytes_.insert(bytes_.end(), p, p + sizeof(T));
  }

  void put_bytes(std::span<const std::uint8_t> data)
  {
    bytes_.insert(bytes_.end(), data.begin(), data.end());
  }

  void put_string(std::string_view s)
  {
    put(static_cast<std::uint32_t>(s.size()));
    bytes_.insert(bytes_.end(), s.begin(), s.end());
  }

  void put_doubles(const double * data, std::size_t n)
  {
    const auto * p = reinterpret_cast<const std::uint8_t *>(data);
    bytes_.insert(bytes_.end(), p, p + n * sizeof(double));
  }

  std::vector<std::uint8_t> & bytes() { return bytes_; }
  const std::vector<std::uint8_t> & bytes() const { return bytes_; }
  std::size_t size() const { return bytes_.size(); }

private:
  std::vector<std::uint8_t> bytes_;
};

/// Bounds-checked reader; any overrun throws Error(CorruptFile).
class BinaryReader
{
public:
  explicit BinaryReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T get()
  {
    static_assert(std::is_trivially_copyable_v<T>);
    require(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::span<const std::uint8_t> get_bytes(std::size_t n)
  {
    require(n);
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  std::string get_string()
  {
    const auto n = get<std::uint32_t>();
    auto raw = get_bytes(n);
    return {raw.begin(), raw.end()};
  }

  void get_doubles(double * out, std::size_t n)
  {
    require(n * sizeof(double));
    std::memcpy(out, bytes_.data() + pos_, n * sizeof(double));
    pos_ += n * sizeof(double);
  }

  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

private:
  void require(std::size_t n) const
  {
    if (n > bytes_.size() - pos_) {
      throw Error(ErrorCode::CorruptFile, "unexpected end of data");
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void put_matrix(BinaryWriter & out, const Eigen::MatrixXd & m);
Eigen::MatrixXd get_matrix(BinaryReader & in);

}  // namespace odrl

#endif  // ODRL__IO_HPP_
