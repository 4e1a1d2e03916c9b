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

#include "capgen/joint_embedding.h"

#include <algorithm>
#include <cmath>
#include <map>

namespace capgen {

std::string to_string(EncoderKind kind) { return kind == EncoderKind::kLstm ? "lstm" : "linear"; }

EncoderKind parse_encoder_kind(std::string_view s) {
  if (s == "lstm") return EncoderKind::kLstm;
  if (s == "linear") return EncoderKind::kLinear;
  throw Error("unknown encoder '" + std::string(s) + "' (expected lstm or linear)");
}

JointModel::JointModel(Vocabulary vocab, std::size_t feature_dim, EncoderKind kind,
                       SeededRng& rng, double margin)
    : vocab_(std::move(vocab)), kind_(kind), margin_(margin) {
  if (!(margin_ > 0.0)) throw Error("joint model: margin must be positive");
  if (feature_dim == 0) throw Error("joint model: feature dimension must be positive");
  const std::size_t k = vocab_.dim();
  if (k == 0) throw Error("joint model: empty word embedding table");
  w_image_ = store_.add("W_I", uniform_matrix(k, feature_dim, rng));
  if (kind_ == EncoderKind::kLstm) {
    lstm_ = add_lstm_params(store_, k, rng);
  } else {
    w_words_ = store_.add("W_T", vocab_.embeddings());
  }
}

const Matrix& JointModel::word_table() const {
  return kind_ == EncoderKind::kLstm ? vocab_.embeddings() : store_.value(w_words_);
}

Vector JointModel::embed_image(std::span<const double> features) const {
  return capgen::embed_image(features, store_.value(w_image_));
}

Matrix JointModel::embed_images(const Matrix& features) const {
  if (features.cols() != feature_dim()) {
    throw Error("embed_image: feature dimension " + std::to_string(features.cols()) +
                " does not match model D=" + std::to_string(feature_dim()));
  }
  return matmul_nt(features, store_.value(w_image_));
}

Vector JointModel::encode(std::span<const std::size_t> tokens) const {
  if (kind_ == EncoderKind::kLinear) return linear_encode(tokens, word_table());
  return encode_sentence(tokens, word_table(), store_, lstm_);
}

Matrix JointModel::encode_batch(std::span<const std::vector<std::size_t>> sentences) const {
  if (kind_ == EncoderKind::kLstm) return capgen::encode_batch(sentences, word_table(), store_, lstm_);
  Matrix out(sentences.size(), dim());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    Vector v = linear_encode(sentences[i], word_table());
    std::copy(v.begin(), v.end(), out.row(i).begin());
  }
  return out;
}

void JointModel::save(Archive& archive) const {
  archive.set_dim("K", static_cast<std::int64_t>(dim()));
  archive.set_dim("D", static_cast<std::int64_t>(feature_dim()));
  archive.set_dim("V", static_cast<std::int64_t>(vocab_.size()));
  archive.put_strings("embed.encoder", {to_string(kind_)});
  archive.put_strings("embed.margin", {format_double(margin_)});
  store_vocabulary(archive, vocab_);
  archive.put_params(store_, "embed.");
}

JointModel JointModel::load(const Archive& archive) {
  JointModel m;
  m.vocab_ = load_vocabulary(archive);
  m.kind_ = parse_encoder_kind(archive.strings("embed.encoder").at(0));
  m.margin_ = std::stod(archive.strings("embed.margin").at(0));
  const auto k = static_cast<std::size_t>(archive.dim("K"));
  const auto d = static_cast<std::size_t>(archive.dim("D"));
  if (m.vocab_.dim() != k) throw Error("archive: vocabulary dimension does not match K");
  if (static_cast<std::size_t>(archive.dim("V")) != m.vocab_.size()) {
    throw Error("archive: vocabulary size does not match V");
  }
  m.w_image_ = m.store_.add("W_I", Matrix(k, d));
  if (m.kind_ == EncoderKind::kLstm) {
    m.lstm_ = add_zero_lstm_params(m.store_, k);
  } else {
    m.w_words_ = m.store_.add("W_T", Matrix(m.vocab_.size(), k));
  }
  archive.get_params(m.store_, "embed.");
  return m;
}

Vector embed_image(std::span<const double> q, const Matrix& w_image) {
  if (q.size() != w_image.cols()) {
    throw Error("embed_image: feature vector has " + std::to_string(q.size()) +
                " entries, W_I expects D=" + std::to_string(w_image.cols()));
  }
  return matvec(w_image, q);
}

double score(std::span<const double> x, std::span<const double> v) {
  if (x.size() != v.size()) throw Error("score: dimension mismatch");
  return dot(unit_normalize(x), unit_normalize(v));
}

Vector linear_encode(std::span<const std::size_t> tokens, const Matrix& table) {
  if (tokens.empty()) throw Error("linear_encode: empty sentence");
  Vector v(table.cols(), 0.0);
  for (std::size_t id : tokens) {
    if (id >= table.rows()) throw Error("linear_encode: token index out of range");
    axpy(1.0, table.row(id), v);
  }
  return v;
}

namespace {

// Row-wise unit normalization, keeping the norms for backprop.
Matrix normalize_rows(const Matrix& m, std::vector<double>& norms, std::string_view what) {
  Matrix out(m.rows(), m.cols());
  norms.resize(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    norms[r] = norm2(m.row(r));
    if (!(norms[r] >= kNormEpsilon)) {
      throw Error(std::string(what) + " row " + std::to_string(r) + " has norm below 1e-12");
    }
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = m(r, c) / norms[r];
  }
  return out;
}

// d(u/|u|) backprop: du = (du_hat - u_hat (u_hat . du_hat)) / |u|.
Matrix normalize_backward(const Matrix& unit, const std::vector<double>& norms,
                          const Matrix& d_unit) {
  Matrix d(unit.rows(), unit.cols());
  for (std::size_t r = 0; r < unit.rows(); ++r) {
    const double proj = dot(unit.row(r), d_unit.row(r));
    for (std::size_t c = 0; c < unit.cols(); ++c) {
      d(r, c) = (d_unit(r, c) - unit(r, c) * proj) / norms[r];
    }
  }
  return d;
}

}  // namespace

RankingLossResult ranking_loss(const Matrix& images, const Matrix& sentences, double margin,
                               std::span<const std::size_t> groups) {
  const std::size_t b = images.rows();
  if (b < 2) throw Error("ranking_loss: batch size must be at least 2 (got " + std::to_string(b) + ")");
  require_shape(sentences, b, images.cols(), "ranking_loss sentences");
  if (!groups.empty() && groups.size() != b) throw Error("ranking_loss: group count mismatch");
  std::vector<double> x_norm, v_norm;
  const Matrix xh = normalize_rows(images, x_norm, "ranking_loss image");
  const Matrix vh = normalize_rows(sentences, v_norm, "ranking_loss sentence");
  const Matrix s = matmul_nt(xh, vh);  // s(i, k) = s(x_i, v_k)
  auto contrastive = [&](std::size_t i, std::size_t k) {
    return i != k && (groups.empty() || groups[i] != groups[k]);
  };

  RankingLossResult out;
  Matrix ds(b, b);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t k = 0; k < b; ++k) {
      if (!contrastive(i, k)) continue;
      // Image i against contrastive sentence k.
      const double h_img = margin - s(i, i) + s(i, k);
      if (h_img > 0.0) {
        out.loss += h_img;
        ds(i, i) -= 1.0;
        ds(i, k) += 1.0;
      }
      // Sentence i against contrastive image k.
      const double h_sen = margin - s(i, i) + s(k, i);
      if (h_sen > 0.0) {
        out.loss += h_sen;
        ds(i, i) -= 1.0;
        ds(k, i) += 1.0;
      }
    }
  }
  out.d_images = normalize_backward(xh, x_norm, matmul(ds, vh));
  out.d_sentences = normalize_backward(vh, v_norm, matmul_tn(ds, xh));
  return out;
}

std::vector<TrainingPair> make_pairs(const std::vector<CaptionRecord>& records) {
  std::vector<TrainingPair> pairs;
  pairs.reserve(records.size());
  for (const auto& r : records) {
    if (r.ids.empty()) throw Error("caption for '" + r.image_id + "' has no vocabulary ids");
    pairs.push_back({r.image_id, r.ids});
  }
  return pairs;
}

double batch_loss_and_grad(JointModel& model, std::span<const TrainingPair> batch,
                           const FeatureStore& features, bool want_grad) {
  const std::size_t b = batch.size();
  if (features.dim() != model.feature_dim()) {
    throw Error("feature dimension " + std::to_string(features.dim()) +
                " does not match model D=" + std::to_string(model.feature_dim()));
  }
  Matrix q(b, model.feature_dim());
  std::vector<std::vector<std::size_t>> sentences;
  std::vector<std::size_t> groups;
  std::map<std::string, std::size_t> group_of;
  for (std::size_t i = 0; i < b; ++i) {
    if (!features.contains(batch[i].image_id)) {
      throw Error("missing image features for image_id '" + batch[i].image_id + "'");
    }
    auto f = features.get(batch[i].image_id);
    std::copy(f.begin(), f.end(), q.row(i).begin());
    sentences.push_back(batch[i].tokens);
    groups.push_back(group_of.emplace(batch[i].image_id, group_of.size()).first->second);
  }

  ParamStore& store = model.params();
  const Matrix x = model.embed_images(q);
  EncodeTrace trace;
  Matrix v;
  if (model.kind() == EncoderKind::kLstm) {
    v = capgen::encode_batch(sentences, model.word_table(), store, model.lstm(),
                             want_grad ? &trace : nullptr);
  } else {
    v = model.encode_batch(sentences);
  }
  RankingLossResult r = ranking_loss(x, v, model.margin(), groups);
  if (want_grad) {
    store.grad(model.image_projection()) += matmul_tn(r.d_images, q);
    if (model.kind() == EncoderKind::kLstm) {
      encode_backward(trace, r.d_sentences, store, model.lstm());
    } else {
      Matrix& g = store.grad(model.word_table_param());
      for (std::size_t i = 0; i < b; ++i)
        for (std::size_t id : sentences[i]) axpy(1.0, r.d_sentences.row(i), g.row(id));
    }
  }
  return r.loss;
}

std::vector<EpochLog> train_embedding(const std::vector<TrainingPair>& pairs,
                                      const FeatureStore& features, JointModel& model,
                                      const TrainConfig& config) {
  if (!(config.learning_rate > 0.0)) throw Error("train_embedding: learning rate must be positive");
  if (!(config.decay > 0.0 && config.decay <= 1.0)) {
    throw Error("train_embedding: decay must lie in (0, 1]");
  }
  if (config.batch_size < 2) throw Error("train_embedding: minibatch size must be at least 2");
  if (pairs.size() < 2) {
    throw Error("train_embedding: need at least 2 pairs to form contrastive terms");
  }
  for (const auto& p : pairs) {
    if (!features.contains(p.image_id)) {
      throw Error("missing image features for image_id '" + p.image_id + "'");
    }
  }
  SeededRng rng(config.seed);
  std::vector<std::size_t> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const std::size_t batch = std::min(config.batch_size, pairs.size());

  std::vector<EpochLog> log;
  double lr = config.learning_rate;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size();) {
      std::size_t end = std::min(start + batch, order.size());
      // A trailing singleton cannot form a contrastive pair; fold it in.
      if (order.size() - end == 1) end = order.size();
      std::vector<TrainingPair> items;
      for (std::size_t i = start; i < end; ++i) items.push_back(pairs[order[i]]);
      model.params().zero_grad();
      total += batch_loss_and_grad(model, items, features, true);
      model.params().sgd_step(lr / static_cast<double>(items.size()));
      start = end;
    }
    log.push_back({epoch + 1, lr, total / static_cast<double>(pairs.size())});
    lr *= config.decay;
  }
  model.params().zero_grad();
  return log;
}

}  // namespace capgen
