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

#include "capgen/lstm_encoder.h"

#include <gtest/gtest.h>

#include <cmath>

namespace capgen {
namespace {

void scramble(ParamStore& store, SeededRng& rng, double scale) {
  for (auto& e : store.entries())
    for (double& v : store.value(store.id(e.name)).values()) v = rng.uniform(-scale, scale);
}

// Single-row step written out scalar by scalar, independent of the library.
struct Ref {
  std::vector<double> c, h;
};
Ref reference_step(const std::vector<double>& x, const Ref& prev, const ParamStore& s,
                   const LstmParams& p) {
  const std::size_t k = p.dim;
  auto row_times = [&](const std::vector<double>& v, ParamId w, std::size_t j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) acc += v[i] * s.value(w)(i, j);
    return acc;
  };
  auto sig = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
  Ref out{std::vector<double>(k), std::vector<double>(k)};
  std::vector<double> ig(k), fg(k);
  for (std::size_t j = 0; j < k; ++j) {
    ig[j] = sig(row_times(x, p.w_xi, j) + row_times(prev.h, p.w_hi, j) +
                row_times(prev.c, p.w_ci, j) + s.value(p.b_i)(0, j));
    fg[j] = sig(row_times(x, p.w_xf, j) + row_times(prev.h, p.w_hf, j) +
                row_times(prev.c, p.w_cf, j) + s.value(p.b_f)(0, j));
    const double cand =
        std::tanh(row_times(x, p.w_xc, j) + row_times(prev.h, p.w_hc, j) + s.value(p.b_c)(0, j));
    out.c[j] = fg[j] * prev.c[j] + ig[j] * cand;
  }
  for (std::size_t j = 0; j < k; ++j) {
    const double og = sig(row_times(x, p.w_xo, j) + row_times(prev.h, p.w_ho, j) +
                          row_times(out.c, p.w_co, j) + s.value(p.b_o)(0, j));
    out.h[j] = og * std::tanh(out.c[j]);
  }
  return out;
}

Matrix row(const std::vector<double>& v) { return Matrix(1, v.size(), v); }

TEST(LstmParams, ShapesAndInitRange) {
  ParamStore s;
  SeededRng rng(1);
  const LstmParams p = add_lstm_params(s, 5, rng);
  EXPECT_EQ(s.entries().size(), 15u);
  for (ParamId w : {p.w_xi, p.w_hi, p.w_ci, p.w_xf, p.w_hf, p.w_cf, p.w_xc, p.w_hc, p.w_xo, p.w_ho,
                    p.w_co}) {
    EXPECT_EQ(s.value(w).rows(), 5u);
    EXPECT_EQ(s.value(w).cols(), 5u);
    for (double v : s.value(w).values()) EXPECT_LE(std::abs(v), kInitScale);
  }
  for (ParamId b : {p.b_i, p.b_f, p.b_c, p.b_o}) {
    EXPECT_EQ(s.value(b).rows(), 1u);
    EXPECT_EQ(s.value(b).cols(), 5u);
  }
  const LstmParams q = find_lstm_params(s);
  EXPECT_EQ(q.dim, 5u);
  EXPECT_EQ(q.w_co, p.w_co);
}

TEST(LstmStep, ZeroParametersGiveHalfGatesAndZeroState) {
  ParamStore s;
  const LstmParams p = add_zero_lstm_params(s, 4);
  LstmStepCache cache;
  const Matrix x(2, 4, 0.7);
  const LstmState next = lstm_step(x, zero_state(2, 4), s, p, &cache);
  for (double g : cache.input_gate.values()) EXPECT_EQ(g, 0.5);
  for (double g : cache.forget_gate.values()) EXPECT_EQ(g, 0.5);
  for (double g : cache.output_gate.values()) EXPECT_EQ(g, 0.5);
  EXPECT_EQ(next.cell, Matrix(2, 4, 0.0));
  EXPECT_EQ(next.hidden, Matrix(2, 4, 0.0));
}

TEST(LstmStep, SaturatedForgetGateKeepsTheCell) {
  ParamStore s;
  const LstmParams p = add_zero_lstm_params(s, 3);
  s.value(p.b_f).fill(20.0);
  LstmState prev = zero_state(1, 3);
  prev.cell = row({0.3, -1.2, 2.0});
  const LstmState next = lstm_step(Matrix(1, 3, 0.0), prev, s, p);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(next.cell(0, j), prev.cell(0, j), 1e-8);
}

TEST(LstmStep, MatchesTermByTermTranscription) {
  SeededRng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    ParamStore s;
    const LstmParams p = add_lstm_params(s, 4, rng);
    scramble(s, rng, 1.0);
    Ref prev{std::vector<double>(4), std::vector<double>(4)};
    std::vector<double> x(4);
    for (int i = 0; i < 4; ++i) {
      prev.c[i] = rng.normal();
      prev.h[i] = rng.uniform(-1, 1);
      x[i] = rng.normal();
    }
    const Ref want = reference_step(x, prev, s, p);
    const LstmState got = lstm_step(row(x), LstmState{row(prev.c), row(prev.h)}, s, p);
    for (std::size_t j = 0; j < 4; ++j) {
      EXPECT_NEAR(got.cell(0, j), want.c[j], 1e-12);
      EXPECT_NEAR(got.hidden(0, j), want.h[j], 1e-12);
    }
  }
}

TEST(LstmStep, RejectsMismatchedShapesNamingTheMatrix) {
  ParamStore s;
  SeededRng rng(3);
  const LstmParams p = add_lstm_params(s, 4, rng);
  EXPECT_THROW(lstm_step(Matrix(1, 3), zero_state(1, 4), s, p), Error);
  EXPECT_THROW(lstm_step(Matrix(2, 4), zero_state(1, 4), s, p), Error);
  s.value(p.w_hf) = Matrix(4, 3);
  try {
    lstm_step(Matrix(1, 4), zero_state(1, 4), s, p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("W_hf"), std::string::npos) << e.what();
  }
}

// Pre-activations past ~37 round sigmoid to exactly 1.0 in double, so the
// strict bound is checked at realistic drive.
TEST(LstmStep, GatesAndHiddenStayBounded) {
  SeededRng rng(4);
  ParamStore s;
  const LstmParams p = add_lstm_params(s, 6, rng);
  scramble(s, rng, 1.0);
  LstmState st = zero_state(3, 6);
  for (int t = 0; t < 30; ++t) {
    Matrix x(3, 6);
    for (double& v : x.values()) v = 2.0 * rng.normal();
    LstmStepCache c;
    st = lstm_step(x, st, s, p, &c);
    for (const Matrix* g : {&c.input_gate, &c.forget_gate, &c.output_gate})
      for (double v : g->values()) {
        EXPECT_GT(v, 0.0);
        EXPECT_LT(v, 1.0);
      }
    for (double v : st.hidden.values()) {
      EXPECT_GT(v, -1.0);
      EXPECT_LT(v, 1.0);
    }
  }
}

Matrix random_table(std::size_t v, std::size_t k, SeededRng& rng) {
  Matrix m(v, k);
  for (double& x : m.values()) x = rng.normal();
  return m;
}

TEST(EncodeSentence, SingleTokenIsOneStep) {
  SeededRng rng(5);
  ParamStore s;
  const LstmParams p = add_lstm_params(s, 4, rng);
  const Matrix table = random_table(6, 4, rng);
  const std::vector<std::size_t> tok = {3};
  const Vector v = encode_sentence(tok, table, s, p);
  const LstmState one = lstm_step(Matrix(1, 4, std::vector<double>(table.row(3).begin(),
                                                                     table.row(3).end())),
                                  zero_state(1, 4), s, p);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(v[j], one.hidden(0, j));
}

TEST(EncodeSentence, ZeroParametersGiveZero) {
  SeededRng rng(6);
  ParamStore s;
  const LstmParams p = add_zero_lstm_params(s, 5);
  const std::vector<std::size_t> tok = {0, 2, 1, 4};
  for (double v : encode_sentence(tok, random_table(5, 5, rng), s, p)) EXPECT_EQ(v, 0.0);
}

TEST(EncodeSentence, EmptyAndOutOfRangeAreErrors) {
  SeededRng rng(7);
  ParamStore s;
  const LstmParams p = add_lstm_params(s, 3, rng);
  const Matrix table = random_table(4, 3, rng);
  EXPECT_THROW(encode_sentence(std::vector<std::size_t>{}, table, s, p), Error);
  EXPECT_THROW(encode_sentence(std::vector<std::size_t>{4}, table, s, p), Error);
}

TEST(EncodeBatch, MaskedBatchEqualsOneAtATime) {
  SeededRng rng(8);
  ParamStore s;
  const LstmParams p = add_lstm_params(s, 5, rng);
  scramble(s, rng, 0.5);
  const Matrix table = random_table(9, 5, rng);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::vector<std::size_t>> batch(1 + rng.uniform_index(5));
    if (trial == 0) batch = {{1, 2}, {3, 4, 5, 6, 7}};
    else
      for (auto& sent : batch) {
        sent.resize(1 + rng.uniform_index(8));
        for (auto& t : sent) t = rng.uniform_index(9);
      }
    const Matrix enc = encode_batch(batch, table, s, p);
    ASSERT_EQ(enc.rows(), batch.size());
    for (std::size_t b = 0; b < batch.size(); ++b) {
      const Vector one = encode_sentence(batch[b], table, s, p);
      for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(enc(b, j), one[j], 1e-12);
    }
  }
}

TEST(EncodeBackward, BpttPassesGradientCheck) {
  SeededRng rng(9);
  ParamStore s;
  const LstmParams p = add_lstm_params(s, 8, rng);
  scramble(s, rng, 0.5);
  const Matrix table = random_table(10, 8, rng);
  const std::vector<std::vector<std::size_t>> batch = {{1, 2, 3}, {4}, {5, 6, 7, 8, 9, 0}};
  Matrix target(3, 8);
  for (double& v : target.values()) v = rng.normal();
  // L = sum target . M_N, plus a square so the gradient depends on the output.
  LossFn loss = [&](ParamStore& st, bool want_grad) {
    EncodeTrace trace;
    const Matrix out = encode_batch(batch, table, st, p, want_grad ? &trace : nullptr);
    double l = 0.0;
    Matrix d(out.rows(), out.cols());
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double o = out.values()[i], t = target.values()[i];
      l += t * o + o * o;
      d.values()[i] = t + 2 * o;
    }
    if (want_grad) encode_backward(trace, d, st, p);
    return l;
  };
  EXPECT_LT(check_gradient(loss, s).max_relative_error, 1e-4);
}

}  // namespace
}  // namespace capgen
