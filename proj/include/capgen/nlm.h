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

#ifndef CAPGEN_NLM_H_
#define CAPGEN_NLM_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "capgen/archive.h"
#include "capgen/ingest.h"
#include "capgen/numcore.h"

namespace capgen {

// Neural language models predicting word w_n from the n-1 previous words.
// Context slot i = 0 holds the oldest word, slot n-2 the word right before
// the prediction; positions before the sentence start are <start>.

// ---------------------------------------------------------------------------
// Log-bilinear model.

struct LblModel {
  ParamStore params;
  ParamId r;     // V x K word representations
  ParamId bias;  // 1 x V
  std::vector<ParamId> context;  // n-1 matrices, K x K
  std::size_t start_index = 0;

  std::size_t vocab_size() const { return params.value(r).rows(); }
  std::size_t dim() const { return params.value(r).cols(); }
  std::size_t context_size() const { return context.size(); }
};

LblModel make_lbl(std::size_t vocab_size, std::size_t dim, std::size_t context_size,
                  std::size_t start_index, SeededRng& rng);

Vector lbl_distribution(std::span<const std::size_t> context, const LblModel& model);

// ---------------------------------------------------------------------------
// Factored multiplicative model.

// Handles to W^fk (F x K), W^fd (F x G), W^fv (F x V) and the output bias.
struct FactoredTensor {
  ParamId w_fk, w_fd, w_fv, bias;
};

FactoredTensor add_factored_tensor(ParamStore& store, std::size_t vocab_size, std::size_t dim,
                                   std::size_t cond_dim, std::size_t factors, SeededRng& rng,
                                   double scale = kInitScale);

// E = (W^fk)^T W^fv, K x V. Column w is the input representation of word w.
Matrix fold_embeddings(const Matrix& w_fk, const Matrix& w_fv);

struct MnlmModel {
  ParamStore params;
  FactoredTensor factored;
  std::vector<ParamId> context;  // n-1 matrices, K x K
  std::size_t start_index = 0;

  std::size_t vocab_size() const { return params.value(factored.w_fv).cols(); }
  std::size_t dim() const { return params.value(factored.w_fk).cols(); }
  std::size_t cond_dim() const { return params.value(factored.w_fd).cols(); }
  std::size_t factors() const { return params.value(factored.w_fk).rows(); }
  std::size_t context_size() const { return context.size(); }
};

MnlmModel make_mnlm(std::size_t vocab_size, std::size_t dim, std::size_t cond_dim,
                    std::size_t factors, std::size_t context_size, std::size_t start_index,
                    SeededRng& rng);

// Logits (W^fv(:,i))^T f + b_i with f = (W^fk r_hat) * (W^fd u) and
// r_hat = sum_i C^(i) E(:, w_i).
Vector factored_logits(std::span<const std::size_t> context, std::span<const double> u,
                       const ParamStore& store, const FactoredTensor& factored,
                       std::span<const ParamId> context_matrices);

Vector mnlm_distribution(std::span<const std::size_t> context, std::span<const double> u,
                         const MnlmModel& model);

// ---------------------------------------------------------------------------
// Structure-content model.

struct ScnlmModel {
  ParamStore params;
  FactoredTensor factored;
  std::vector<ParamId> context;            // n-1 word context matrices, K x K
  ParamId tag_table;                       // tags x G structure embeddings
  std::vector<ParamId> structure_context;  // k+1 matrices T^(i), G x G
  ParamId content_proj;                    // T^(u), G x content_dim
  ParamId structure_bias;                  // 1 x G
  std::size_t start_index = 0;
  TagSet tags;
  std::vector<std::string> vocab_tokens;

  std::size_t vocab_size() const { return params.value(factored.w_fv).cols(); }
  std::size_t dim() const { return params.value(factored.w_fk).cols(); }
  std::size_t attr_dim() const { return params.value(factored.w_fd).cols(); }
  std::size_t factors() const { return params.value(factored.w_fk).rows(); }
  std::size_t content_dim() const { return params.value(content_proj).cols(); }
  std::size_t context_size() const { return context.size(); }
  // Forward structure context k; the window holds k+1 tags.
  std::size_t forward_size() const { return structure_context.size() - 1; }

  void save(Archive& archive) const;
  static ScnlmModel load(const Archive& archive);
};

struct ScnlmDims {
  std::size_t vocab_size = 0;
  std::size_t dim = 300;          // K
  std::size_t attr_dim = 300;     // G
  std::size_t factors = 100;      // F
  std::size_t content_dim = 300;  // dimension of the conditioning vector u
  std::size_t context_size = 5;   // n-1
  std::size_t forward_size = 3;   // k
  // Weights start uniform[-init_scale, init_scale]. Small models need more
  // than the default for the three-way products to carry any gradient.
  double init_scale = kInitScale;
};

ScnlmModel make_scnlm(const ScnlmDims& dims, const Vocabulary& vocab, TagSet tags,
                      SeededRng& rng);
// Same as above without a vocabulary: tokens are named w0, w1, ... and the
// start index is given directly. Used for small synthetic models.
ScnlmModel make_scnlm(const ScnlmDims& dims, std::size_t start_index, TagSet tags,
                      SeededRng& rng);

// u_hat = relu(sum_i T^(i) t_{n+i} + T^(u) u + b). `tags` is the forward
// window t_n..t_{n+k}, padded with <endpos>.
Vector scnlm_attribute(std::span<const double> u, std::span<const std::size_t> tags,
                       const ScnlmModel& model);

Vector scnlm_distribution(std::span<const std::size_t> context, std::span<const std::size_t> tags,
                          std::span<const double> u, const ScnlmModel& model);

// Natural-log next-word probabilities. `folded` may carry a precomputed
// fold_embeddings() result for repeated queries against a fixed model.
Vector scnlm_log_probs(std::span<const std::size_t> context, std::span<const std::size_t> tags,
                       std::span<const double> u, const ScnlmModel& model,
                       const Matrix* folded = nullptr);

// Context and tag-window helpers for position `pos` of a sentence.
std::vector<std::size_t> context_window(std::span<const std::size_t> words, std::size_t pos,
                                        std::size_t context_size, std::size_t start_index);
std::vector<std::size_t> tag_window(std::span<const std::size_t> tags, std::size_t pos,
                                    std::size_t forward_size, std::size_t endpos_index);

// ---------------------------------------------------------------------------
// Training and evaluation.

// One training sentence. `tags` is ignored by models without structure and
// `cond` by the LBL.
struct NlmExample {
  std::vector<std::size_t> words;
  std::vector<std::size_t> tags;
  Vector cond;
};

// Negative log-likelihood (natural log) of every word of the sentence given
// its context. When `want_grad` is set, gradients are accumulated into the
// model's ParamStore.
double sentence_nll(LblModel& model, const NlmExample& ex, bool want_grad);
double sentence_nll(MnlmModel& model, const NlmExample& ex, bool want_grad);
double sentence_nll(ScnlmModel& model, const NlmExample& ex, bool want_grad);

enum class ConditioningSource { kText, kImage };

struct NlmTrainConfig {
  std::size_t context_size = 5;
  std::size_t forward_size = 3;
  std::size_t epochs = 10;
  double learning_rate = 0.1;
  double decay = 1.0;
  std::uint64_t seed = 1234;
  ConditioningSource source = ConditioningSource::kText;
};

struct NlmEpochLog {
  std::size_t epoch = 0;
  double learning_rate = 0.0;
  double mean_nll = 0.0;  // per predicted token
};

// Per-sentence SGD; example order reshuffled every epoch from `seed`.
std::vector<NlmEpochLog> train_nlm(LblModel& model, const std::vector<NlmExample>& corpus,
                                   const NlmTrainConfig& config);
std::vector<NlmEpochLog> train_nlm(MnlmModel& model, const std::vector<NlmExample>& corpus,
                                   const NlmTrainConfig& config);
std::vector<NlmEpochLog> train_nlm(ScnlmModel& model, const std::vector<NlmExample>& corpus,
                                   const NlmTrainConfig& config);

// Builds examples from caption records; `conds[i]` conditions records[i].
std::vector<NlmExample> make_examples(const std::vector<CaptionRecord>& records,
                                      const std::vector<Vector>& conds, const TagSet& tags);

// Sets the output bias to add-one smoothed log unigram frequencies.
void init_bias_from_unigrams(Matrix& bias, const std::vector<NlmExample>& corpus);

double perplexity(LblModel& model, const std::vector<NlmExample>& corpus);
double perplexity(MnlmModel& model, const std::vector<NlmExample>& corpus);
double perplexity(ScnlmModel& model, const std::vector<NlmExample>& corpus);

}  // namespace capgen

#endif  // CAPGEN_NLM_H_
