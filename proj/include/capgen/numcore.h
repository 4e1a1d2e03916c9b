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

#ifndef CAPGEN_NUMCORE_H_
#define CAPGEN_NUMCORE_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace capgen {

// All recoverable failures in the library are reported with this type. The
// message is a single line so the CLI can forward it verbatim.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Vector = std::vector<double>;

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  void fill(double v);
  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool all_finite() const;

  Matrix transpose() const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

// Throws Error("<what>: expected RxC, got RxC") on mismatch.
void require_shape(const Matrix& m, std::size_t rows, std::size_t cols, std::string_view what);

Matrix matmul(const Matrix& a, const Matrix& b);
// a * b^T and a^T * b without materializing the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);
Matrix matmul_tn(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);

// y = M x and y = M^T x for a vector x.
Vector matvec(const Matrix& m, std::span<const double> x);
Vector matvec_t(const Matrix& m, std::span<const double> x);
// m += scale * a b^T
void add_outer(Matrix& m, std::span<const double> a, std::span<const double> b, double scale = 1.0);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

// Nonlinearities and their derivatives. The derivative helpers take the
// activation output, which is what backprop code has on hand.
double sigmoid(double x);
double sigmoid_grad_from_output(double y);
double tanh_grad_from_output(double y);
double relu(double x);
double relu_grad(double x);

Vector stable_softmax(std::span<const double> logits);
Vector log_softmax(std::span<const double> logits);
// log(softmax(logits)[index]) computed without forming the full softmax.
double log_softmax_at(std::span<const double> logits, std::size_t index);

inline constexpr double kNormEpsilon = 1e-12;

Vector unit_normalize(std::span<const double> v);

// Seeded generator. The engine is std::mt19937_64, whose output sequence is
// fixed by the C++ standard; all conversions to doubles and integers are done
// here instead of through <random> distributions, whose algorithms are
// implementation defined.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform in [0, n). Rejection sampling, no modulo bias.
  std::size_t uniform_index(std::size_t n);
  // Standard normal via Box-Muller.
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

inline constexpr double kInitScale = 0.08;

Matrix uniform_matrix(std::size_t rows, std::size_t cols, SeededRng& rng,
                      double scale = kInitScale);

// Strong handle into a ParamStore.
struct ParamId {
  std::size_t index = 0;
  friend bool operator==(ParamId, ParamId) = default;
};

// Named trainable parameters, each paired with a gradient of the same shape.
// Iteration follows insertion order.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    Matrix value;
    Matrix grad;
  };

  ParamId add(std::string name, Matrix value);

  Matrix& value(ParamId id) { return entries_[id.index].value; }
  const Matrix& value(ParamId id) const { return entries_[id.index].value; }
  Matrix& grad(ParamId id) { return entries_[id.index].grad; }
  const Matrix& grad(ParamId id) const { return entries_[id.index].grad; }

  bool contains(std::string_view name) const;
  ParamId id(std::string_view name) const;

  std::size_t size() const { return entries_.size(); }
  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }

  void zero_grad();
  // value -= lr * grad for every entry.
  void sgd_step(double learning_rate);
  std::size_t parameter_count() const;

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> by_name_;
};

// Computes the loss for the current parameter values. When want_grad is set
// the callee must also accumulate analytic gradients into the store (the
// store's gradients are zeroed before the call).
using LossFn = std::function<double(ParamStore& params, bool want_grad)>;

struct GradientReport {
  double max_relative_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
};

// Central-difference check of every parameter entry. Relative error is
// |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
GradientReport check_gradient(const LossFn& loss_fn, ParamStore& params, double eps = 1e-5);

}  // namespace capgen

#endif  // CAPGEN_NUMCORE_H_
