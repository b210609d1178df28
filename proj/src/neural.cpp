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

#include "odrl/neural.hpp"

#include "odrl/io.hpp"

namespace odrl
{

void put_mlp(BinaryWriter & out, const Mlp<double> & mlp)
{
  out.put(static_cast<std::uint32_t>(mlp.layers.size()));
  for (const auto & layer : mlp.layers) {
    put_matrix(out, layer.weight);
    put_matrix(out, layer.bias);
  }
}

Mlp<double> get_mlp(BinaryReader & in)
{
  const auto n = in.get<std::uint32_t>();
  if (n == 0 || n > 64) {
    throw Error(ErrorCode::CorruptFile, "implausible layer count");
  }
  Mlp<double> mlp;
  for (std::uint32_t l = 0; l < n; ++l) {
    Layer<double> layer;
    layer.weight = get_matrix(in);
    const Eigen::MatrixXd b = get_matrix(in);
    if (b.cols() != 1 || b.rows() != layer.weight.rows()) {
      throw Error(ErrorCode::CorruptFile, "bias shape does not match weight");
    }
    layer.bias = b.col(0);
    if (!mlp.layers.empty() && mlp.layers.back().weight.rows() != layer.weight.cols()) {
      throw Error(ErrorCode::CorruptFile, "consecutive layer shapes disagree");
    }
    mlp.layers.push_back(std::move(layer));
  }
  return mlp;
}

}  // namespace odrl
