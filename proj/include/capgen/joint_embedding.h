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

#ifndef CAPGEN_JOINT_EMBEDDING_H_
#define CAPGEN_JOINT_EMBEDDING_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "capgen/archive.h"
#include "capgen/ingest.h"
#include "capgen/lstm_encoder.h"
#include "capgen/numcore.h"

namespace capgen {

enum class EncoderKind { kLstm, kLinear };

std::string to_string(EncoderKind kind);
EncoderKind parse_encoder_kind(std::string_view s);

inline constexpr double kDefaultMargin = 0.2;

// Image projection W_I (K x D) plus a sentence encoder, sharing one ParamStore
// so the whole of theta can be trained and gradient-checked together.
//
// With the LSTM encoder the word table W_T is read from the vocabulary and
// stays fixed. With the linear encoder W_T is copied into the store as a
// trainable parameter and a sentence is the sum of its word rows.
class JointModel {
 public:
  JointModel() = default;
  JointModel(Vocabulary vocab, std::size_t feature_dim, EncoderKind kind, SeededRng& rng,
             double margin = kDefaultMargin);

  std::size_t dim() const { return vocab_.dim(); }
  std::size_t feature_dim() const { return store_.value(w_image_).cols(); }
  EncoderKind kind() const { return kind_; }
  double margin() const { return margin_; }
  const Vocabulary& vocab() const { return vocab_; }

  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }
  ParamId image_projection() const { return w_image_; }
  const LstmParams& lstm() const { return lstm_; }
  ParamId word_table_param() const { return w_words_; }
  // The word table actually used by the encoder.
  const Matrix& word_table() const;

  Vector embed_image(std::span<const double> features) const;
  Matrix embed_images(const Matrix& features) const;
  Vector encode(std::span<const std::size_t> tokens) const;
  Matrix encode_batch(std::span<const std::vector<std::size_t>> sentences) const;

  void save(Archive& archive) const;
  static JointModel load(const Archive& archive);

 private:
  Vocabulary vocab_;
  EncoderKind kind_ = EncoderKind::kLstm;
  double margin_ = kDefaultMargin;
  ParamStore store_;
  ParamId w_image_;
  LstmParams lstm_;
  ParamId w_words_;
};

// x = W_I q, unnormalized.
Vector embed_image(std::span<const double> q, const Matrix& w_image);

// Cosine similarity: both arguments are unit-normalized first.
double score(std::span<const double> x, std::span<const double> v);

// Sum of the word rows of `table`.
Vector linear_encode(std::span<const std::size_t> tokens, const Matrix& table);

struct RankingLossResult {
  double loss = 0.0;
  Matrix d_images;     // dLoss / dx_i, B x K
  Matrix d_sentences;  // dLoss / dv_i, B x K
};

// Pairwise hinge ranking loss over a batch of matching rows (x_i, v_i); every
// other batch member acts as a contrastive term. `groups`, when non-empty,
// assigns each row an id and rows sharing an id are never contrasted with each
// other (several captions of the same image in one batch).
RankingLossResult ranking_loss(const Matrix& images, const Matrix& sentences, double margin,
                               std::span<const std::size_t> groups = {});

struct TrainConfig {
  std::size_t batch_size = 100;
  double learning_rate = 1.0;
  double decay = 0.99;
  std::size_t epochs = 15;
  std::uint64_t seed = 1234;
};

struct TrainingPair {
  std::string image_id;
  std::vector<std::size_t> tokens;
};

struct EpochLog {
  std::size_t epoch = 0;
  double learning_rate = 0.0;
  double mean_loss = 0.0;
};

std::vector<TrainingPair> make_pairs(const std::vector<CaptionRecord>& records);

// Full forward + backward of the ranking loss for one batch, accumulating
// gradients into model.params(). Returns the summed loss.
double batch_loss_and_grad(JointModel& model, std::span<const TrainingPair> batch,
                           const FeatureStore& features, bool want_grad);

// SGD without momentum on the batch-averaged loss. The data order is
// reshuffled every epoch and the learning rate is multiplied by `decay`
// after each epoch.
std::vector<EpochLog> train_embedding(const std::vector<TrainingPair>& pairs,
                                      const FeatureStore& features, JointModel& model,
                                      const TrainConfig& config);

}  // namespace capgen

#endif  // CAPGEN_JOINT_EMBEDDING_H_
