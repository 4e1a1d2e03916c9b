// Copyright 2026 The capgen Authors.
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

#ifndef CAPGEN_REGULARITIES_H_
#define CAPGEN_REGULARITIES_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "capgen/numcore.h"

namespace capgen {

// Unit-normalized vectors with an id and a kind ("image", "word",
// "sentence", ...) per item.
class EmbeddingIndex {
 public:
  explicit EmbeddingIndex(std::size_t dim = 0) : vectors_(0, dim) {}

  std::size_t dim() const { return vectors_.cols(); }
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }

  // Stores v / |v|; throws if |v| < 1e-12.
  void add(std::string id, std::string kind, std::span<const double> v);

  const std::string& id(std::size_t i) const { return ids_.at(i); }
  const std::string& kind(std::size_t i) const { return kinds_.at(i); }
  std::span<const double> vector(std::size_t i) const { return vectors_.row(i); }
  const Matrix& vectors() const { return vectors_; }
  std::vector<std::size_t> find(std::string_view id) const;

 private:
  std::vector<std::string> ids_;
  std::vector<std::string> kinds_;
  Matrix vectors_;
};

struct Neighbour {
  std::size_t index = 0;
  std::string id;
  double score = 0.0;
};

// Top-n items by cosine with `query`, ties broken by index. Items whose id is
// `exclude_id` are skipped; when `kind` is non-empty only that kind is kept.
std::vector<Neighbour> nearest(std::span<const double> query, const EmbeddingIndex& index,
                               std::size_t top_n, std::string_view kind = {},
                               std::string_view exclude_id = {});

// Items ranked by cosine with q - w_neg + w_pos, excluding `query_id`.
std::vector<Neighbour> analogy_query(std::span<const double> q, std::span<const double> w_neg,
                                     std::span<const double> w_pos, const EmbeddingIndex& index,
                                     std::size_t top_n, std::string_view query_id = {},
                                     std::string_view kind = "image");

// Reorders items by ascending Euclidean distance to their mean; equal
// distances keep their original order.
std::vector<Neighbour> resort_by_mean(const std::vector<Neighbour>& items,
                                      const EmbeddingIndex& index);

struct PcaResult {
  Matrix coordinates;             // n x components
  Matrix components;              // components x K, unit rows
  std::vector<double> eigenvalues;
  std::vector<double> explained_variance_ratio;
};

inline constexpr double kPowerTolerance = 1e-10;
inline constexpr std::size_t kPowerMaxIterations = 10000;

// Mean-centred projection onto the leading eigenvectors of the sample
// covariance, found by power iteration with deflation. Each component is
// sign-fixed so that its largest-magnitude coordinate is positive.
PcaResult pca_project(const Matrix& vectors, std::size_t components = 2);

}  // namespace capgen

#endif  // CAPGEN_REGULARITIES_H_
