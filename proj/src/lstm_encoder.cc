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

#include <algorithm>
#include <cmath>
#include <string>

namespace capgen {

namespace {

constexpr const char* kMatrixNames[] = {"W_xi", "W_hi", "W_ci", "W_xf", "W_hf", "W_cf",
                                        "W_xc", "W_hc", "W_xo", "W_ho", "W_co"};
constexpr const char* kBiasNames[] = {"b_i", "b_f", "b_c", "b_o"};

LstmParams make_layout(std::size_t dim, auto&& get) {
  LstmParams p;
  p.dim = dim;
  p.w_xi = get("W_xi"), p.w_hi = get("W_hi"), p.w_ci = get("W_ci"), p.b_i = get("b_i");
  p.w_xf = get("W_xf"), p.w_hf = get("W_hf"), p.w_cf = get("W_cf"), p.b_f = get("b_f");
  p.w_xc = get("W_xc"), p.w_hc = get("W_hc"), p.b_c = get("b_c");
  p.w_xo = get("W_xo"), p.w_ho = get("W_ho"), p.w_co = get("W_co"), p.b_o = get("b_o");
  return p;
}

void add_bias_rows(Matrix& m, const Matrix& bias) {
  for (std::size_t r = 0; r < m.rows(); ++r) axpy(1.0, bias.row(0), m.row(r));
}

void require_params(const ParamStore& store, const LstmParams& p) {
  const std::size_t k = p.dim;
  for (ParamId id : {p.w_xi, p.w_hi, p.w_ci, p.w_xf, p.w_hf, p.w_cf, p.w_xc, p.w_hc, p.w_xo,
                     p.w_ho, p.w_co}) {
    require_shape(store.value(id), k, k, "lstm " + store.entries()[id.index].name);
  }
  for (ParamId id : {p.b_i, p.b_f, p.b_c, p.b_o}) {
    require_shape(store.value(id), 1, k, "lstm " + store.entries()[id.index].name);
  }
}

// Pre-activation X.Wx + H.Wh (+ C.Wc) + b for a whole batch.
Matrix affine(const Matrix& x, const Matrix& wx, const Matrix& h, const Matrix& wh,
              const Matrix* c, const Matrix* wc, const Matrix& b) {
  Matrix z = matmul(x, wx);
  z += matmul(h, wh);
  if (c != nullptr) z += matmul(*c, *wc);
  add_bias_rows(z, b);
  return z;
}

template <typename F>
Matrix map(const Matrix& m, F f) {
  Matrix out = m;
  for (double& v : out.values()) v = f(v);
  return out;
}

void add_column_sums(Matrix& bias_grad, const Matrix& d) {
  for (std::size_t r = 0; r < d.rows(); ++r) axpy(1.0, d.row(r), bias_grad.row(0));
}

}  // namespace

LstmParams add_lstm_params(ParamStore& store, std::size_t dim, SeededRng& rng,
                           std::string_view prefix) {
  if (dim == 0) throw Error("lstm: dimension must be positive");
  const std::string pre(prefix);
  for (const char* n : kMatrixNames) store.add(pre + n, uniform_matrix(dim, dim, rng));
  for (const char* n : kBiasNames) store.add(pre + n, uniform_matrix(1, dim, rng));
  return find_lstm_params(store, prefix);
}

LstmParams add_zero_lstm_params(ParamStore& store, std::size_t dim, std::string_view prefix) {
  const std::string pre(prefix);
  for (const char* n : kMatrixNames) store.add(pre + n, Matrix(dim, dim));
  for (const char* n : kBiasNames) store.add(pre + n, Matrix(1, dim));
  return find_lstm_params(store, prefix);
}

LstmParams find_lstm_params(const ParamStore& store, std::string_view prefix) {
  const std::string pre(prefix);
  const std::size_t dim = store.value(store.id(pre + "W_xi")).rows();
  LstmParams p = make_layout(dim, [&](const char* n) { return store.id(pre + n); });
  require_params(store, p);
  return p;
}

LstmState zero_state(std::size_t batch, std::size_t dim) {
  return {Matrix(batch, dim), Matrix(batch, dim)};
}

LstmState lstm_step(const Matrix& x, const LstmState& prev, const ParamStore& store,
                    const LstmParams& p, LstmStepCache* cache) {
  const std::size_t k = p.dim;
  const std::size_t b = x.rows();
  require_shape(x, b, k, "lstm input X_t");
  require_shape(prev.cell, b, k, "lstm previous cell C_{t-1}");
  require_shape(prev.hidden, b, k, "lstm previous hidden M_{t-1}");
  require_params(store, p);
  auto w = [&](ParamId id) -> const Matrix& { return store.value(id); };

  Matrix in_gate = map(affine(x, w(p.w_xi), prev.hidden, w(p.w_hi), &prev.cell, &w(p.w_ci), w(p.b_i)),
                       sigmoid);
  Matrix forget = map(affine(x, w(p.w_xf), prev.hidden, w(p.w_hf), &prev.cell, &w(p.w_cf), w(p.b_f)),
                      sigmoid);
  Matrix cand = map(affine(x, w(p.w_xc), prev.hidden, w(p.w_hc), nullptr, nullptr, w(p.b_c)),
                    [](double v) { return std::tanh(v); });
  Matrix cell = hadamard(forget, prev.cell);
  cell += hadamard(in_gate, cand);
  Matrix out_gate = map(affine(x, w(p.w_xo), prev.hidden, w(p.w_ho), &cell, &w(p.w_co), w(p.b_o)),
                        sigmoid);
  Matrix tanh_cell = map(cell, [](double v) { return std::tanh(v); });
  Matrix hidden = hadamard(out_gate, tanh_cell);

  if (cache != nullptr) {
    cache->input = x;
    cache->prev = prev;
    cache->input_gate = in_gate;
    cache->forget_gate = forget;
    cache->candidate = cand;
    cache->output_gate = out_gate;
    cache->cell = cell;
    cache->tanh_cell = std::move(tanh_cell);
    cache->mask.assign(b, 1.0);
  }
  return {std::move(cell), std::move(hidden)};
}

Matrix encode_batch(std::span<const std::vector<std::size_t>> sentences, const Matrix& word_table,
                    const ParamStore& store, const LstmParams& p, EncodeTrace* trace) {
  if (sentences.empty()) throw Error("lstm: empty batch");
  const std::size_t k = p.dim;
  if (word_table.cols() != k) {
    throw Error("lstm: word embedding dimension " + std::to_string(word_table.cols()) +
                " does not match encoder dimension " + std::to_string(k));
  }
  std::size_t steps = 0;
  for (const auto& s : sentences) {
    if (s.empty()) throw Error("lstm: cannot encode an empty sentence");
    for (std::size_t id : s) {
      if (id >= word_table.rows()) throw Error("lstm: token index out of range");
    }
    steps = std::max(steps, s.size());
  }
  const std::size_t b = sentences.size();
  LstmState state = zero_state(b, k);
  if (trace != nullptr) trace->steps.assign(steps, {});
  for (std::size_t t = 0; t < steps; ++t) {
    Matrix x(b, k);
    std::vector<double> mask(b, 0.0);
    for (std::size_t r = 0; r < b; ++r) {
      if (t < sentences[r].size()) {
        mask[r] = 1.0;
        std::copy_n(word_table.row(sentences[r][t]).begin(), k, x.row(r).begin());
      }
    }
    LstmStepCache* cache = trace != nullptr ? &trace->steps[t] : nullptr;
    LstmState next = lstm_step(x, state, store, p, cache);
    for (std::size_t r = 0; r < b; ++r) {
      if (mask[r] == 0.0) {
        std::copy_n(state.cell.row(r).begin(), k, next.cell.row(r).begin());
        std::copy_n(state.hidden.row(r).begin(), k, next.hidden.row(r).begin());
      }
    }
    if (cache != nullptr) cache->mask = std::move(mask);
    state = std::move(next);
  }
  return std::move(state.hidden);
}

Vector encode_sentence(std::span<const std::size_t> tokens, const Matrix& word_table,
                       const ParamStore& store, const LstmParams& p) {
  std::vector<std::vector<std::size_t>> batch{{tokens.begin(), tokens.end()}};
  Matrix h = encode_batch(batch, word_table, store, p);
  return Vector(h.row(0).begin(), h.row(0).end());
}

void encode_backward(const EncodeTrace& trace, const Matrix& d_final, ParamStore& store,
                     const LstmParams& p) {
  if (trace.steps.empty()) return;
  const std::size_t k = p.dim;
  const std::size_t b = trace.steps.front().input.rows();
  require_shape(d_final, b, k, "lstm dLoss/dM_N");
  auto w = [&](ParamId id) -> const Matrix& { return store.value(id); };
  auto g = [&](ParamId id) -> Matrix& { return store.grad(id); };

  Matrix d_hidden = d_final;
  Matrix d_cell(b, k);
  for (std::size_t t = trace.steps.size(); t-- > 0;) {
    const LstmStepCache& s = trace.steps[t];
    // Rows that were padding at this step pass their gradient straight back.
    Matrix dm = d_hidden, dc = d_cell;
    for (std::size_t r = 0; r < b; ++r) {
      if (s.mask[r] == 0.0) {
        std::fill(dm.row(r).begin(), dm.row(r).end(), 0.0);
        std::fill(dc.row(r).begin(), dc.row(r).end(), 0.0);
      }
    }

    Matrix da_o(b, k), dc_total = dc;
    for (std::size_t i = 0; i < b * k; ++i) {
      const double o = s.output_gate.values()[i];
      const double tc = s.tanh_cell.values()[i];
      const double dmi = dm.values()[i];
      da_o.values()[i] = dmi * tc * sigmoid_grad_from_output(o);
      dc_total.values()[i] += dmi * o * tanh_grad_from_output(tc);
    }
    dc_total += matmul_nt(da_o, w(p.w_co));

    g(p.w_xo) += matmul_tn(s.input, da_o);
    g(p.w_ho) += matmul_tn(s.prev.hidden, da_o);
    g(p.w_co) += matmul_tn(s.cell, da_o);
    add_column_sums(g(p.b_o), da_o);

    Matrix da_i(b, k), da_f(b, k), da_c(b, k);
    for (std::size_t i = 0; i < b * k; ++i) {
      const double dci = dc_total.values()[i];
      const double ig = s.input_gate.values()[i];
      const double fg = s.forget_gate.values()[i];
      const double cd = s.candidate.values()[i];
      da_f.values()[i] = dci * s.prev.cell.values()[i] * sigmoid_grad_from_output(fg);
      da_i.values()[i] = dci * cd * sigmoid_grad_from_output(ig);
      da_c.values()[i] = dci * ig * tanh_grad_from_output(cd);
    }

    g(p.w_xi) += matmul_tn(s.input, da_i);
    g(p.w_hi) += matmul_tn(s.prev.hidden, da_i);
    g(p.w_ci) += matmul_tn(s.prev.cell, da_i);
    add_column_sums(g(p.b_i), da_i);
    g(p.w_xf) += matmul_tn(s.input, da_f);
    g(p.w_hf) += matmul_tn(s.prev.hidden, da_f);
    g(p.w_cf) += matmul_tn(s.prev.cell, da_f);
    add_column_sums(g(p.b_f), da_f);
    g(p.w_xc) += matmul_tn(s.input, da_c);
    g(p.w_hc) += matmul_tn(s.prev.hidden, da_c);
    add_column_sums(g(p.b_c), da_c);

    Matrix d_prev_cell = hadamard(dc_total, s.forget_gate);
    d_prev_cell += matmul_nt(da_i, w(p.w_ci));
    d_prev_cell += matmul_nt(da_f, w(p.w_cf));
    Matrix d_prev_hidden = matmul_nt(da_i, w(p.w_hi));
    d_prev_hidden += matmul_nt(da_f, w(p.w_hf));
    d_prev_hidden += matmul_nt(da_c, w(p.w_hc));
    d_prev_hidden += matmul_nt(da_o, w(p.w_ho));

    for (std::size_t r = 0; r < b; ++r) {
      if (s.mask[r] == 0.0) {
        std::copy_n(d_hidden.row(r).begin(), k, d_prev_hidden.row(r).begin());
        std::copy_n(d_cell.row(r).begin(), k, d_prev_cell.row(r).begin());
      }
    }
    d_hidden = std::move(d_prev_hidden);
    d_cell = std::move(d_prev_cell);
  }
}

}  // namespace capgen
