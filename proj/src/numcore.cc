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

#include "capgen/numcore.h"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace capgen {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows * cols) {
    throw Error("matrix: " + std::to_string(values_.size()) + " values for shape " +
                std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void Matrix::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

bool Matrix::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Matrix& Matrix::operator+=(const Matrix& other) {
  require_shape(other, rows_, cols_, "matrix +=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  require_shape(other, rows_, cols_, "matrix -=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

void require_shape(const Matrix& m, std::size_t rows, std::size_t cols, std::string_view what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw Error(std::string(what) + ": expected " + std::to_string(rows) + "x" +
                std::to_string(cols) + ", got " + std::to_string(m.rows()) + "x" +
                std::to_string(m.cols()));
  }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw Error("matmul: inner dimensions " + std::to_string(a.cols()) + " and " +
                std::to_string(b.rows()) + " differ");
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out_row = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto b_row = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aik * b_row[j];
    }
  }
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw Error("matmul_nt: column counts differ");
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) out(i, j) = dot(a.row(i), b.row(j));
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw Error("matmul_tn: row counts differ");
  Matrix out(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    auto b_row = b.row(k);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = a(k, i);
      if (aki == 0.0) continue;
      auto out_row = out.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aki * b_row[j];
    }
  }
  return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_shape(b, a.rows(), a.cols(), "hadamard");
  Matrix out = a;
  auto ov = out.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] *= bv[i];
  return out;
}

Vector matvec(const Matrix& m, std::span<const double> x) {
  if (m.cols() != x.size()) throw Error("matvec: dimension mismatch");
  Vector y(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) y[r] = dot(m.row(r), x);
  return y;
}

Vector matvec_t(const Matrix& m, std::span<const double> x) {
  if (m.rows() != x.size()) throw Error("matvec_t: dimension mismatch");
  Vector y(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) axpy(x[r], m.row(r), y);
  return y;
}

void add_outer(Matrix& m, std::span<const double> a, std::span<const double> b, double scale) {
  if (m.rows() != a.size() || m.cols() != b.size()) throw Error("add_outer: shape mismatch");
  for (std::size_t r = 0; r < a.size(); ++r) axpy(scale * a[r], b, m.row(r));
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw Error("axpy: length mismatch");
  if (alpha == 0.0) return;
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double sigmoid_grad_from_output(double y) { return y * (1.0 - y); }
double tanh_grad_from_output(double y) { return 1.0 - y * y; }
double relu(double x) { return x > 0.0 ? x : 0.0; }
double relu_grad(double x) { return x > 0.0 ? 1.0 : 0.0; }

namespace {

void require_finite_logits(std::span<const double> logits, std::string_view op) {
  if (logits.empty()) throw Error(std::string(op) + ": empty logits");
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (!std::isfinite(logits[i])) {
      throw Error(std::string(op) + ": non-finite logit at index " + std::to_string(i));
    }
  }
}

}  // namespace

Vector stable_softmax(std::span<const double> logits) {
  require_finite_logits(logits, "softmax");
  const double top = *std::max_element(logits.begin(), logits.end());
  Vector out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - top);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

Vector log_softmax(std::span<const double> logits) {
  require_finite_logits(logits, "log_softmax");
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double l : logits) total += std::exp(l - top);
  const double shift = top + std::log(total);
  Vector out(logits.begin(), logits.end());
  for (double& v : out) v -= shift;
  return out;
}

double log_softmax_at(std::span<const double> logits, std::size_t index) {
  require_finite_logits(logits, "log_softmax");
  if (index >= logits.size()) throw Error("log_softmax: index out of range");
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double l : logits) total += std::exp(l - top);
  return logits[index] - top - std::log(total);
}

Vector unit_normalize(std::span<const double> v) {
  if (v.empty()) throw Error("unit_normalize: empty vector");
  const double n = norm2(v);
  if (!(n >= kNormEpsilon)) throw Error("unit_normalize: norm below 1e-12");
  Vector out(v.begin(), v.end());
  for (double& x : out) x /= n;
  return out;
}

double SeededRng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t SeededRng::uniform_index(std::size_t n) {
  if (n == 0) throw Error("uniform_index: empty range");
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

double SeededRng::normal() {
  double u1;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Matrix uniform_matrix(std::size_t rows, std::size_t cols, SeededRng& rng, double scale) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(-scale, scale);
  return m;
}

ParamId ParamStore::add(std::string name, Matrix value) {
  if (by_name_.contains(name)) throw Error("param store: duplicate parameter " + name);
  const std::size_t index = entries_.size();
  Matrix grad(value.rows(), value.cols());
  by_name_.emplace(name, index);
  entries_.push_back({std::move(name), std::move(value), std::move(grad)});
  return ParamId{index};
}

bool ParamStore::contains(std::string_view name) const {
  return by_name_.contains(std::string(name));
}

ParamId ParamStore::id(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) throw Error("param store: no parameter named " + std::string(name));
  return ParamId{it->second};
}

void ParamStore::zero_grad() {
  for (auto& e : entries_) e.grad.fill(0.0);
}

void ParamStore::sgd_step(double learning_rate) {
  for (auto& e : entries_) {
    auto v = e.value.values();
    auto g = e.grad.values();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= learning_rate * g[i];
  }
}

std::size_t ParamStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.value.size();
  return n;
}

GradientReport check_gradient(const LossFn& loss_fn, ParamStore& params, double eps) {
  if (!(eps >= 1e-7 && eps <= 1e-3)) throw Error("check_gradient: eps must lie in [1e-7, 1e-3]");
  params.zero_grad();
  const double base = loss_fn(params, true);
  if (!std::isfinite(base)) throw Error("check_gradient: loss is non-finite at the base point");
  std::vector<Matrix> analytic;
  analytic.reserve(params.size());
  for (const auto& e : params.entries()) analytic.push_back(e.grad);

  GradientReport report;
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto& entry = params.entries()[p];
    auto values = entry.value.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + eps;
      const double plus = loss_fn(params, false);
      values[i] = saved - eps;
      const double minus = loss_fn(params, false);
      values[i] = saved;
      if (!std::isfinite(plus) || !std::isfinite(minus)) {
        throw Error("check_gradient: non-finite loss while perturbing " + entry.name + "[" +
                    std::to_string(i) + "]");
      }
      const double numeric = (plus - minus) / (2.0 * eps);
      const double a = analytic[p].values()[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double rel = std::abs(a - numeric) / denom;
      if (rel > report.max_relative_error) {
        report.max_relative_error = rel;
        report.worst_param = entry.name;
        report.worst_index = i;
      }
    }
  }
  params.zero_grad();
  return report;
}

}  // namespace capgen
