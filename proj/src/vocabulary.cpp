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

#include "odrl/vocabulary.hpp"

#include "odrl/io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace odrl
{

ActionVocabulary::ActionVocabulary(Eigen::MatrixXd prototypes, std::uint64_t seed,
                                   Digest source_hash)
: prototypes_(std::move(prototypes)), seed_(seed), source_hash_(source_hash)
{
}

Trajectory ActionVocabulary::prototype(int index) const
{
  if (index < 0 || index >= size()) {
    throw Error(ErrorCode::IndexOutOfRange, "prototype index " + std::to_string(index));
  }
  return Trajectory::from_flat(prototypes_.col(index));
}

Digest ActionVocabulary::digest() const
{
  BinaryWriter w;
  w.put(static_cast<std::uint32_t>(size()));
  w.put(static_cast<std::uint32_t>(horizon()));
  w.put(seed_);
  w.put_bytes(source_hash_);
  w.put_doubles(prototypes_.data(), static_cast<std::size_t>(prototypes_.size()));
  return sha256(w.bytes());
}

void ActionVocabulary::validate() const
{
  if (size() < 2) {
    throw Error(ErrorCode::InvalidSpec, "vocabulary needs K >= 2");
  }
  if (horizon() < 1 || prototypes_.rows() % 2 != 0) {
    throw Error(ErrorCode::InvalidSpec, "vocabulary prototypes must hold 2T rows");
  }
  if (!prototypes_.allFinite()) {
    throw Error(ErrorCode::InvalidSpec, "vocabulary has non-finite entries");
  }
  std::vector<int> order(static_cast<std::size_t>(size()));
  std::iota(order.begin(), order.end(), 0);
  auto less = [&](int a, int b) {
    for (Eigen::Index r = 0; r < prototypes_.rows(); ++r) {
      if (prototypes_(r, a) != prototypes_(r, b)) return prototypes_(r, a) < prototypes_(r, b);
    }
    return false;
  };
  std::sort(order.begin(), order.end(), less);
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (!less(order[i - 1], order[i])) {
      throw Error(ErrorCode::InvalidSpec, "vocabulary contains identical prototypes");
    }
  }
}

Digest trajectory_set_digest(std::span<const Trajectory> trajectories)
{
  BinaryWriter w;
  w.put(static_cast<std::uint64_t>(trajectories.size()));
  for (const auto & t : trajectories) {
    w.put(static_cast<std::uint32_t>(t.horizon()));
    w.put_doubles(t.points().data(), static_cast<std::size_t>(t.points().size()));
  }
  return sha256(w.bytes());
}

namespace
{

std::size_t count_distinct(const Eigen::MatrixXd & data)
{
  std::vector<Eigen::Index> order(static_cast<std::size_t>(data.cols()));
  std::iota(order.begin(), order.end(), 0);
  auto cmp = [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index r = 0; r < data.rows(); ++r) {
      if (data(r, a) != data(r, b)) return data(r, a) < data(r, b);
    }
    return false;
  };
  std::sort(order.begin(), order.end(), cmp);
  std::size_t distinct = order.empty() ? 0 : 1;
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (cmp(order[i - 1], order[i])) ++distinct;
  }
  return distinct;
}

/// Index of the nearest column of `centers` to `x`, lowest index on ties.
Eigen::Index nearest_column(const Eigen::MatrixXd & centers, const Eigen::Ref<const Eigen::VectorXd> & x,
                            double & best_d2)
{
  Eigen::Index best = 0;
  best_d2 = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < centers.cols(); ++c) {
    const double d2 = (centers.col(c) - x).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = c;
    }
  }
  return best;
}

Eigen::MatrixXd kmeans_plus_plus(const Eigen::MatrixXd & data, int k, Rng & rng)
{
  const Eigen::Index n = data.cols();
  Eigen::MatrixXd centers(data.rows(), k);
  centers.col(0) = data.col(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
  Eigen::VectorXd d2 = (data.colwise() - centers.col(0)).colwise().squaredNorm().transpose();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    const double target = rng.uniform() * total;
    double acc = 0.0;
    Eigen::Index pick = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      acc += d2[i];
      if (d2[i] > 0.0 && acc > target) {
        pick = i;
        break;
      }
    }
    if (pick < 0) {
      // Rounding left the draw past the last positive weight.
      for (Eigen::Index i = n - 1; i >= 0; --i) {
        if (d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    }
    centers.col(c) = data.col(pick);
    d2 = d2.cwiseMin((data.colwise() - centers.col(c)).colwise().squaredNorm().transpose());
  }
  return centers;
}

}  // namespace

KMeansResult kmeans(std::span<const Trajectory> trajectories, int k, int max_iters,
                    std::uint64_t seed)
{
  if (k < 1) {
    throw Error(ErrorCode::InvalidSpec, "k must be >= 1");
  }
  if (trajectories.size() < static_cast<std::size_t>(k)) {
    throw Error(ErrorCode::TooFewSamples, "fewer trajectories than clusters");
  }
  const Eigen::Index horizon = trajectories.front().horizon();
  const auto n = static_cast<Eigen::Index>(trajectories.size());
  Eigen::MatrixXd data(2 * horizon, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto & t = trajectories[static_cast<std::size_t>(i)];
    if (t.horizon() != horizon) {
      throw Error(ErrorCode::LengthMismatch, "trajectories must share one horizon");
    }
    data.col(i) = t.flat();
  }
  if (count_distinct(data) < static_cast<std::size_t>(k)) {
    throw Error(ErrorCode::TooFewSamples, "fewer distinct trajectories than clusters");
  }

  Rng rng(seed);
  Eigen::MatrixXd centers = kmeans_plus_plus(data, k, rng);
  std::vector<Eigen::Index> assignment(static_cast<std::size_t>(n), -1);
  Eigen::VectorXd point_d2(n);

  KMeansResult result;
  for (int iter = 0; iter < std::max(max_iters, 1); ++iter) {
    bool changed = false;
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double d2 = 0.0;
      const Eigen::Index c = nearest_column(centers, data.col(i), d2);
      changed = changed || assignment[static_cast<std::size_t>(i)] != c;
      assignment[static_cast<std::size_t>(i)] = c;
      point_d2[i] = d2;
      inertia += d2;
    }
    result.inertia.push_back(inertia);
    result.iterations = iter + 1;

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(data.rows(), k);
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.col(assignment[static_cast<std::size_t>(i)]) += data.col(i);
      ++counts[static_cast<std::size_t>(assignment[static_cast<std::size_t>(i)])];
    }
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centers.col(c) = sums.col(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        continue;
      }
      // Empty cluster: take the point farthest from its own centroid.
      Eigen::Index far = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!used[static_cast<std::size_t>(i)] && (far < 0 || point_d2[i] > point_d2[far])) {
          far = i;
        }
      }
      used[static_cast<std::size_t>(far)] = true;
      centers.col(c) = data.col(far);
      point_d2[far] = 0.0;
      changed = true;
    }

    if (!changed) {
      break;
    }
    if (result.inertia.size() >= 2) {
      const double prev = result.inertia[result.inertia.size() - 2];
      if (prev > 0.0 && std::abs(prev - inertia) / prev < 1e-6) {
        break;
      }
    }
  }

  result.vocabulary = ActionVocabulary(std::move(centers), seed, trajectory_set_digest(trajectories));
  return result;
}

NearestPrototype nearest_prototype(const ActionVocabulary & vocab, const Trajectory & query)
{
  if (query.horizon() != vocab.horizon()) {
    throw Error(ErrorCode::LengthMismatch, "query horizon " + std::to_string(query.horizon()) +
                                             " != vocabulary horizon " +
                                             std::to_string(vocab.horizon()));
  }
  double d2 = 0.0;
  const Eigen::Index idx = nearest_column(vocab.prototypes(), query.flat(), d2);
  return {static_cast<int>(idx), std::sqrt(d2)};
}

std::string vocabulary_to_text(const ActionVocabulary & vocab)
{
  nlohmann::json rows = nlohmann::json::array();
  for (int c = 0; c < vocab.size(); ++c) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index r = 0; r < vocab.prototypes().rows(); ++r) {
      row.push_back(vocab.prototypes()(r, c));
    }
    rows.push_back(std::move(row));
  }
  nlohmann::json j = {{"format", "odrl-vocabulary"},
                      {"version", 1},
                      {"K", vocab.size()},
                      {"T", vocab.horizon()},
                      {"seed", vocab.seed()},
                      {"source_hash", to_hex(vocab.source_hash())},
                      {"prototypes", rows}};
  return j.dump(1) + "\n";
}

ActionVocabulary vocabulary_from_text(std::string_view text)
{
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != "odrl-vocabulary") {
      throw Error(ErrorCode::CorruptFile, "not a vocabulary file");
    }
    const int k = j.at("K").get<int>();
    const int t = j.at("T").get<int>();
    const auto & rows = j.at("prototypes");
    if (k < 1 || t < 1 || rows.size() != static_cast<std::size_t>(k)) {
      throw Error(ErrorCode::CorruptFile, "vocabulary shape does not match K");
    }
    Eigen::MatrixXd protos(2 * t, k);
    for (int c = 0; c < k; ++c) {
      const auto & row = rows.at(static_cast<std::size_t>(c));
      if (row.size() != static_cast<std::size_t>(2 * t)) {
        throw Error(ErrorCode::CorruptFile, "prototype row does not match T");
      }
      for (int r = 0; r < 2 * t; ++r) {
        protos(r, c) = row.at(static_cast<std::size_t>(r)).get<double>();
      }
    }
    ActionVocabulary vocab(std::move(protos), j.at("seed").get<std::uint64_t>(),
                           digest_from_hex(j.at("source_hash").get<std::string>()));
    vocab.validate();
    return vocab;
  } catch (const nlohmann::json::exception & e) {
    throw Error(ErrorCode::CorruptFile, std::string("vocabulary: ") + e.what());
  }
}

void write_vocabulary(const std::filesystem::path & path, const ActionVocabulary & vocab)
{
  write_text_file(path, vocabulary_to_text(vocab));
}

ActionVocabulary read_vocabulary(const std::filesystem::path & path)
{
  return vocabulary_from_text(read_text_file(path));
}

}  // namespace odrl
