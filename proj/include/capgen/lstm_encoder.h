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

#ifndef CAPGEN_LSTM_ENCODER_H_
#define CAPGEN_LSTM_ENCODER_H_

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "capgen/numcore.h"

namespace capgen {

// Handles to the LSTM weights inside a ParamStore. All weights are K x K and
// multiply row vectors from the right (X_t . W_xi); biases are 1 x K. The
// peephole weights W_ci, W_cf, W_co are full matrices. The output gate
// peeks at the current cell C_t, the input and forget gates at C_{t-1}.
struct LstmParams {
  std::size_t dim = 0;
  ParamId w_xi, w_hi, w_ci, b_i;
  ParamId w_xf, w_hf, w_cf, b_f;
  ParamId w_xc, w_hc, b_c;
  ParamId w_xo, w_ho, w_co, b_o;
};

// Registers the 11 matrices and 4 biases under `prefix` + symbol name, all
// drawn uniform[-0.08, 0.08] from `rng`.
LstmParams add_lstm_params(ParamStore& store, std::size_t dim, SeededRng& rng,
                           std::string_view prefix = "lstm.");
// Same names and shapes, all zero.
LstmParams add_zero_lstm_params(ParamStore& store, std::size_t dim,
                                std::string_view prefix = "lstm.");
// Looks up an existing layout by name.
LstmParams find_lstm_params(const ParamStore& store, std::string_view prefix = "lstm.");

// Batch state: one row per sequence.
struct LstmState {
  Matrix cell;
  Matrix hidden;
};

// Everything backprop needs from one step.
struct LstmStepCache {
  Matrix input;
  LstmState prev;
  Matrix input_gate, forget_gate, candidate, output_gate;
  Matrix cell, tanh_cell;
  std::vector<double> mask;
};

LstmState zero_state(std::size_t batch, std::size_t dim);

// One recurrence step on a B x K input batch.
LstmState lstm_step(const Matrix& x, const LstmState& prev, const ParamStore& store,
                    const LstmParams& p, LstmStepCache* cache = nullptr);

struct EncodeTrace {
  std::vector<LstmStepCache> steps;
};

// Encodes a batch of variable-length sentences. Rows are right-padded; padded
// steps carry the state forward unchanged, so the returned B x K matrix holds
// each sentence's hidden state at its own final token.
Matrix encode_batch(std::span<const std::vector<std::size_t>> sentences, const Matrix& word_table,
                    const ParamStore& store, const LstmParams& p, EncodeTrace* trace = nullptr);

Vector encode_sentence(std::span<const std::size_t> tokens, const Matrix& word_table,
                       const ParamStore& store, const LstmParams& p);

// Backpropagation through time. `d_final` is dLoss/dM_N for every row of the
// batch; gradients are accumulated into `store`.
void encode_backward(const EncodeTrace& trace, const Matrix& d_final, ParamStore& store,
                     const LstmParams& p);

}  // namespace capgen

#endif  // CAPGEN_LSTM_ENCODER_H_
