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

#ifndef ODRL__VOCABULARY_HPP_
#define ODRL__VOCABULARY_HPP_

#include "odrl/common.hpp"
#include "odrl/trajectory.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace odrl
{

/// K trajectory prototypes defining the discrete action space.
class ActionVocabulary
{
public:
  ActionVocabulary() = default;
  /// `prototypes` is 2T x K, one flattened trajectory per column.
  ActionVocabulary(Eigen::MatrixXd prototypes, std::uint64_t seed, Digest source_hash);

  int size() const { return static_cast<int>(prototypes_.cols()); }
  int horizon() const { return static_cast<int>(prototypes_.rows() / 2); }
  std::uint64_t seed() const { return seed_; }
  const Digest & source_hash() const { return source_hash_; }
  const Eigen::MatrixXd & prototypes() const { return prototypes_; }

  Trajectory prototype(int index) const;

  /// Identity of this vocabulary; datasets and checkpoints record it.
  Digest digest() const;

  /// Throws Error(InvalidSpec) if K < 2, T < 1, entries are non-finite or prototypes repeat.
  void validate() const;

  bool operator==(const ActionVocabulary & o) const
  {
    return seed_ == o.seed_ && source_hash_ == o.source_hash_ &&
           prototypes_.rows() == o.prototypes_.rows() &&
           prototypes_.cols() == o.prototypes_.cols() && prototypes_ == o.prototypes_;
  }

private:
  Eigen::MatrixXd prototypes_;
  std::uint64_t seed_ = 0;
  Digest source_hash_{};
};

struct KMeansResult
{
  ActionVocabulary vocabulary;
  std::vector<double> inertia;  ///< after each assignment step
  int iterations = 0;
};

/// Digest of a trajectory set, used as the vocabulary source hash.
Digest trajectory_set_digest(std::span<const Trajectory> trajectories);

/// Lloyd's algorithm with k-means++ seeding on flattened waypoint vectors.
KMeansResult kmeans(std::span<const Trajectory> trajectories, int k, int max_iters,
                    std::uint64_t seed);

inline ActionVocabulary kmeans_fit(std::span<const Trajectory> trajectories, int k, int max_iters,
                                   std::uint64_t seed)
{
  return kmeans(trajectories, k, max_iters, seed).vocabulary;
}

struct NearestPrototype
{
  int index = 0;
  double distance = 0.0;  ///< Euclidean distance between flattened waypoint vectors
};

/// Lowest index wins ties.
NearestPrototype nearest_prototype(const ActionVocabulary & vocab, const Trajectory & query);

void write_vocabulary(const std::filesystem::path & path, const ActionVocabulary & vocab);
ActionVocabulary read_vocabulary(const std::filesystem::path & path);
std::string vocabulary_to_text(const ActionVocabulary & vocab);
ActionVocabulary vocabulary_from_text(std::string_view text);

}  // namespace odrl

#endif  // ODRL__VOCABULARY_HPP_
