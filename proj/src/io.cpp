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

#include "odrl/io.hpp"

#include <fstream>
#include <iterator>
#include <sstream>

namespace odrl
{

namespace
{

std::filesystem::path temp_sibling(const std::filesystem::path & path)
{
  auto tmp = path;
  tmp += ".partial";
  return tmp;
}

void write_bytes(const std::filesystem::path & path, const char * data, std::size_t n)
{
  const auto parent = path.parent_path();
  if (!parent.empty() && !std::filesystem::is_directory(parent)) {
    throw Error(ErrorCode::IoError, "output directory does not exist: " + parent.string());
  }
  const auto tmp = temp_sibling(path);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::IoError, "cannot open for writing: " + tmp.string());
    }
    out.write(data, static_cast<std::streamsize>(n));
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw Error(ErrorCode::IoError, "write failed: " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

void write_text_file(const std::filesystem::path & path, std::string_view contents)
{
  write_bytes(path, contents.data(), contents.size());
}

void write_binary_file(const std::filesystem::path & path, const std::vector<std::uint8_t> & bytes)
{
  write_bytes(path, reinterpret_cast<const char *>(bytes.data()), bytes.size());
}

std::string read_text_file(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open: " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::uint8_t> read_binary_file(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open: " + path.string());
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

nlohmann::json parse_json_file(const std::filesystem::path & path)
{
  const std::string text = read_text_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception & e) {
    throw Error(ErrorCode::CorruptFile, path.string() + ": " + e.what());
  }
}

Digest file_digest(const std::filesystem::path & path)
{
  const auto bytes = read_binary_file(path);
  return sha256(bytes);
}

void put_matrix(BinaryWriter & out, const Eigen::MatrixXd & m)
{
  out.put(static_cast<std::uint32_t>(m.rows()));
  out.put(static_cast<std::uint32_t>(m.cols()));
  out.put_doubles(m.data(), static_cast<std::size_t>(m.size()));
}

Eigen::MatrixXd get_matrix(BinaryReader & in)
{
  const auto rows = in.get<std::uint32_t>();
  const auto cols = in.get<std::uint32_t>();
  if (static_cast<std::uint64_t>(rows) * cols * sizeof(double) > in.remaining()) {
    throw Error(ErrorCode::CorruptFile, "matrix larger than remaining data");
  }
  Eigen::MatrixXd m(rows, cols);
  in.get_doubles(m.data(), static_cast<std::size_t>(m.size()));
  return m;
}

}  // namespace odrl
