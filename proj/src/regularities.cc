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

#include "capgen/regularities.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace capgen {

void EmbeddingIndex::add(std::string id, std::string kind, std::span<const double> v) {
  if (v.size() != dim()) {
    throw Error("embedding index: vector for '" + id + "' has " + std::to_string(v.size()) +
                " entries, index dimension is " + std::to_string(dim()));
  }
  const Vector unit = unit_normalize(v);
  std::vector<double> values(vectors_.values().begin(), vectors_.values().end());
  values.insert(values.end(), unit.begin(), unit.end());
  vectors_ = Matrix(vectors_.rows() + 1, dim(), std::move(values));
  ids_.push_back(std::move(id));
  kinds_.push_back(std::move(kind));
}

std::vector<std::size_t> EmbeddingIndex::find(std::string_view id) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < ids_.size(); ++i)
    if (ids_[i] == id) out.push_back(i);
  return out;
}

std::vector<Neighbour> nearest(std::span<const double> query, const EmbeddingIndex& index,
                               std::size_t top_n, std::string_view kind,
                               std::string_view exclude_id) {
  if (index.empty()) throw Error("nearest: empty index");
  const Vector q = unit_normalize(query);
  if (q.size() != index.dim()) throw Error("nearest: query dimension does not match index");
  std::vector<Neighbour> all;
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (!kind.empty() && index.kind(i) != kind) continue;
    if (!exclude_id.empty() && index.id(i) == exclude_id) continue;
    all.push_back({i, index.id(i), dot(q, index.vector(i))});
  }
  const std::size_t n = std::min(top_n, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end(),
                    [](const Neighbour& a, const Neighbour& b) {
                      if (a.score != b.score) return a.score > b.score;
                      return a.index < b.index;
                    });
  all.resize(n);
  return all;
}

std::vector<Neighbour> analogy_query(std::span<const double> q, std::span<const double> w_neg,
                                     std::span<const double> w_pos, const EmbeddingIndex& index,
                                     std::size_t top_n, std::string_view query_id,
                                     std::string_view kind) {
  if (q.size() != w_neg.size() || q.size() != w_pos.size()) {
    throw Error("analogy_query: vector dimensions differ");
  }
  Vector combined(q.begin(), q.end());
  axpy(-1.0, w_neg, combined);
  axpy(1.0, w_pos, combined);
  if (!(norm2(combined) >= kNormEpsilon)) {
    throw Error("analogy_query: degenerate query, |q - w_n + w_p| < 1e-12");
  }
  return nearest(combined, index, top_n, kind, query_id);
}

std::vector<Neighbour> resort_by_mean(const std::vector<Neighbour>& items,
                                      const EmbeddingIndex& index) {
  if (items.empty()) throw Error("resort_by_mean: no items");
  Vector mean(index.dim(), 0.0);
  for (const auto& it : items) axpy(1.0, index.vector(it.index), mean);
  for (double& m : mean) m /= static_cast<double>(items.size());
  std::vector<std::pair<double, std::size_t>> keyed;
  for (std::size_t i = 0; i < items.size(); ++i) {
    auto v = index.vector(items[i].index);
    double d2 = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) d2 += (v[j] - mean[j]) * (v[j] - mean[j]);
    keyed.emplace_back(std::sqrt(d2), i);
  }
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Neighbour> out;
  for (const auto& [d, i] : keyed) out.push_back(items[i]);
  return out;
}

namespace {

Vector power_iteration(const Matrix& m) {
  const std::size_t k = m.rows();
  // Deterministic start with no special alignment to the coordinate axes.
  SeededRng rng(0x5ca1ab1eULL);
  Vector v(k);
  for (double& x : v) x = rng.uniform(0.5, 1.5);
  v = unit_normalize(v);
  for (std::size_t iter = 0; iter < kPowerMaxIterations; ++iter) {
    Vector next = matvec(m, v);
    const double n = norm2(next);
    if (n < kNormEpsilon) return next;  // zero matrix: caller sees eigenvalue 0
    for (double& x : next) x /= n;
    double diff = 0.0;
    for (std::size_t i = 0; i < k; ++i) diff = std::max(diff, std::abs(next[i] - v[i]));
    v = std::move(next);
    if (diff < kPowerTolerance) break;
  }
  return v;
}

}  // namespace

PcaResult pca_project(const Matrix& vectors, std::size_t components) {
  const std::size_t n = vectors.rows();
  const std::size_t k = vectors.cols();
  if (n < 3) throw Error("pca: need at least 3 vectors, got " + std::to_string(n));
  if (components == 0 || k < components) {
    throw Error("pca: cannot extract " + std::to_string(components) + " components from K=" +
                std::to_string(k));
  }
  Vector mean(k, 0.0);
  for (std::size_t r = 0; r < n; ++r) axpy(1.0, vectors.row(r), mean);
  for (double& m : mean) m /= static_cast<double>(n);
  Matrix centred = vectors;
  for (std::size_t r = 0; r < n; ++r) axpy(-1.0, mean, centred.row(r));
  Matrix cov = matmul_tn(centred, centred);
  cov *= 1.0 / static_cast<double>(n - 1);
  double trace = 0.0;
  for (std::size_t i = 0; i < k; ++i) trace += cov(i, i);

  PcaResult out;
  out.components = Matrix(components, k);
  Matrix deflated = cov;
  for (std::size_t c = 0; c < components; ++c) {
    Vector v = power_iteration(deflated);
    const double nv = norm2(v);
    const double lambda = nv < kNormEpsilon ? 0.0 : dot(v, matvec(deflated, v));
    if (!(trace > 0.0) || lambda <= 1e-12 * trace) {
      throw Error("pca: data is rank deficient, attained rank " + std::to_string(c) + " < " +
                  std::to_string(components) + " components");
    }
    // Power iteration only returns unit vectors here, so nv == 1.
    std::size_t big = 0;
    for (std::size_t i = 1; i < k; ++i)
      if (std::abs(v[i]) > std::abs(v[big])) big = i;
    if (v[big] < 0) for (double& x : v) x = -x;
    std::copy(v.begin(), v.end(), out.components.row(c).begin());
    out.eigenvalues.push_back(lambda);
    out.explained_variance_ratio.push_back(lambda / trace);
    add_outer(deflated, v, v, -lambda);
  }
  out.coordinates = matmul_nt(centred, out.components);
  return out;
}

}  // namespace capgen
