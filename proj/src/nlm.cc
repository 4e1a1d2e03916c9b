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

#include "capgen/nlm.h"

#include <algorithm>
#include <cmath>

namespace capgen {

namespace {

void check_index(std::size_t index, std::size_t limit, std::string_view what) {
  if (index >= limit) {
    throw Error(std::string(what) + " index " + std::to_string(index) + " out of range (size " +
                std::to_string(limit) + ")");
  }
}

void check_context(std::span<const std::size_t> context, std::size_t expected, std::size_t vocab) {
  if (context.size() != expected) {
    throw Error("context has " + std::to_string(context.size()) + " words, model expects " +
                std::to_string(expected));
  }
  for (std::size_t w : context) check_index(w, vocab, "context word");
}

std::vector<ParamId> add_context_matrices(ParamStore& store, std::size_t count, std::size_t dim,
                                          SeededRng& rng, const std::string& prefix,
                                          double scale = kInitScale) {
  if (count == 0) throw Error("context size must be at least 1");
  std::vector<ParamId> ids;
  for (std::size_t i = 0; i < count; ++i) {
    ids.push_back(store.add(prefix + std::to_string(i + 1), uniform_matrix(dim, dim, rng, scale)));
  }
  return ids;
}

Vector column(const Matrix& m, std::size_t c) {
  Vector v(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) v[r] = m(r, c);
  return v;
}

// Softmax cross-entropy at `target`; fills dlogit = p - onehot when asked.
double cross_entropy(std::span<const double> logits, std::size_t target, Vector* dlogit) {
  const double nll = -log_softmax_at(logits, target);
  if (dlogit != nullptr) {
    *dlogit = stable_softmax(logits);
    (*dlogit)[target] -= 1.0;
  }
  return nll;
}

// ---------------------------------------------------------------------------
// Shared multiplicative core.

struct FactoredForward {
  std::vector<Vector> inputs;  // E(:, w_i) per context slot
  Vector r_hat, a, d, f, logits;
};

FactoredForward factored_forward(std::span<const std::size_t> context, std::span<const double> u,
                                 const ParamStore& store, const FactoredTensor& ft,
                                 std::span<const ParamId> ctx, const Matrix& folded) {
  const Matrix& w_fk = store.value(ft.w_fk);
  const Matrix& w_fd = store.value(ft.w_fd);
  const Matrix& w_fv = store.value(ft.w_fv);
  const std::size_t k = w_fk.cols();
  if (u.size() != w_fd.cols()) {
    throw Error("conditioning vector has " + std::to_string(u.size()) + " entries, expected " +
                std::to_string(w_fd.cols()));
  }
  check_context(context, ctx.size(), w_fv.cols());
  FactoredForward fw;
  fw.r_hat.assign(k, 0.0);
  for (std::size_t i = 0; i < ctx.size(); ++i) {
    fw.inputs.push_back(column(folded, context[i]));
    axpy(1.0, matvec(store.value(ctx[i]), fw.inputs.back()), fw.r_hat);
  }
  fw.a = matvec(w_fk, fw.r_hat);
  fw.d = matvec(w_fd, u);
  fw.f.resize(fw.a.size());
  for (std::size_t i = 0; i < fw.f.size(); ++i) fw.f[i] = fw.a[i] * fw.d[i];
  fw.logits = matvec_t(w_fv, fw.f);
  axpy(1.0, store.value(ft.bias).row(0), fw.logits);
  return fw;
}

// Backprop of one position. Gradient w.r.t. the folded matrix is collected in
// `d_folded` and pushed into W^fk / W^fv once per sentence.
Vector factored_backward(const FactoredForward& fw, std::span<const std::size_t> context,
                         std::span<const double> u, std::span<const double> dlogit,
                         ParamStore& store, const FactoredTensor& ft, std::span<const ParamId> ctx,
                         Matrix& d_folded) {
  const Matrix& w_fk = store.value(ft.w_fk);
  const Matrix& w_fd = store.value(ft.w_fd);
  const Matrix& w_fv = store.value(ft.w_fv);
  axpy(1.0, dlogit, store.grad(ft.bias).row(0));
  add_outer(store.grad(ft.w_fv), fw.f, dlogit);
  const Vector df = matvec(w_fv, dlogit);
  Vector da(df.size()), dd(df.size());
  for (std::size_t i = 0; i < df.size(); ++i) {
    da[i] = df[i] * fw.d[i];
    dd[i] = df[i] * fw.a[i];
  }
  add_outer(store.grad(ft.w_fd), dd, u);
  Vector du = matvec_t(w_fd, dd);
  add_outer(store.grad(ft.w_fk), da, fw.r_hat);
  const Vector dr = matvec_t(w_fk, da);
  for (std::size_t i = 0; i < ctx.size(); ++i) {
    add_outer(store.grad(ctx[i]), dr, fw.inputs[i]);
    const Vector de = matvec_t(store.value(ctx[i]), dr);
    for (std::size_t r = 0; r < de.size(); ++r) d_folded(r, context[i]) += de[r];
  }
  return du;
}

void folded_backward(ParamStore& store, const FactoredTensor& ft, const Matrix& d_folded) {
  // E = Wfk^T Wfv  =>  dWfk = Wfv dE^T, dWfv = Wfk dE.
  store.grad(ft.w_fk) += matmul_nt(store.value(ft.w_fv), d_folded);
  store.grad(ft.w_fv) += matmul(store.value(ft.w_fk), d_folded);
}

struct AttributeForward {
  std::vector<std::size_t> tags;
  Vector pre, value;
};

AttributeForward attribute_forward(std::span<const double> u, std::span<const std::size_t> tags,
                                   const ScnlmModel& m) {
  const ParamStore& s = m.params;
  const Matrix& table = s.value(m.tag_table);
  if (tags.size() != m.structure_context.size()) {
    throw Error("tag window has " + std::to_string(tags.size()) + " tags, model expects " +
                std::to_string(m.structure_context.size()));
  }
  if (u.size() != m.content_dim()) {
    throw Error("content vector has " + std::to_string(u.size()) + " entries, expected " +
                std::to_string(m.content_dim()));
  }
  AttributeForward aw;
  aw.tags.assign(tags.begin(), tags.end());
  aw.pre = matvec(s.value(m.content_proj), u);
  axpy(1.0, s.value(m.structure_bias).row(0), aw.pre);
  for (std::size_t i = 0; i < tags.size(); ++i) {
    check_index(tags[i], table.rows(), "tag");
    axpy(1.0, matvec(s.value(m.structure_context[i]), table.row(tags[i])), aw.pre);
  }
  aw.value.resize(aw.pre.size());
  for (std::size_t i = 0; i < aw.pre.size(); ++i) aw.value[i] = relu(aw.pre[i]);
  return aw;
}

void attribute_backward(const AttributeForward& aw, std::span<const double> u,
                        std::span<const double> d_value, ScnlmModel& m) {
  ParamStore& s = m.params;
  Vector dz(aw.pre.size());
  for (std::size_t i = 0; i < dz.size(); ++i) dz[i] = d_value[i] * relu_grad(aw.pre[i]);
  add_outer(s.grad(m.content_proj), dz, u);
  axpy(1.0, dz, s.grad(m.structure_bias).row(0));
  const Matrix& table = s.value(m.tag_table);
  for (std::size_t i = 0; i < aw.tags.size(); ++i) {
    add_outer(s.grad(m.structure_context[i]), dz, table.row(aw.tags[i]));
    axpy(1.0, matvec_t(s.value(m.structure_context[i]), dz), s.grad(m.tag_table).row(aw.tags[i]));
  }
}

void check_example(const NlmExample& ex, std::size_t vocab) {
  if (ex.words.empty()) throw Error("nlm: empty training sentence");
  for (std::size_t w : ex.words) check_index(w, vocab, "word");
}

}  // namespace

// ---------------------------------------------------------------------------
// Windows

std::vector<std::size_t> context_window(std::span<const std::size_t> words, std::size_t pos,
                                        std::size_t context_size, std::size_t start_index) {
  std::vector<std::size_t> ctx(context_size, start_index);
  for (std::size_t i = 0; i < context_size; ++i) {
    // Slot i holds word pos - context_size + i.
    const std::size_t back = context_size - i;
    if (pos >= back) ctx[i] = words[pos - back];
  }
  return ctx;
}

std::vector<std::size_t> tag_window(std::span<const std::size_t> tags, std::size_t pos,
                                    std::size_t forward_size, std::size_t endpos_index) {
  std::vector<std::size_t> win(forward_size + 1, endpos_index);
  for (std::size_t i = 0; i <= forward_size; ++i) {
    if (pos + i < tags.size()) win[i] = tags[pos + i];
  }
  return win;
}

// ---------------------------------------------------------------------------
// LBL

LblModel make_lbl(std::size_t vocab_size, std::size_t dim, std::size_t context_size,
                  std::size_t start_index, SeededRng& rng) {
  if (vocab_size == 0 || dim == 0) throw Error("lbl: dimensions must be positive");
  check_index(start_index, vocab_size, "start token");
  LblModel m;
  m.r = m.params.add("R", uniform_matrix(vocab_size, dim, rng));
  m.bias = m.params.add("b", Matrix(1, vocab_size));
  m.context = add_context_matrices(m.params, context_size, dim, rng, "C");
  m.start_index = start_index;
  return m;
}

namespace {

Vector lbl_r_hat(std::span<const std::size_t> context, const LblModel& m) {
  check_context(context, m.context_size(), m.vocab_size());
  const Matrix& r = m.params.value(m.r);
  Vector r_hat(m.dim(), 0.0);
  for (std::size_t i = 0; i < context.size(); ++i) {
    axpy(1.0, matvec(m.params.value(m.context[i]), r.row(context[i])), r_hat);
  }
  return r_hat;
}

Vector lbl_logits(const Vector& r_hat, const LblModel& m) {
  Vector logits = matvec(m.params.value(m.r), r_hat);
  axpy(1.0, m.params.value(m.bias).row(0), logits);
  return logits;
}

}  // namespace

Vector lbl_distribution(std::span<const std::size_t> context, const LblModel& model) {
  return stable_softmax(lbl_logits(lbl_r_hat(context, model), model));
}

double sentence_nll(LblModel& m, const NlmExample& ex, bool want_grad) {
  check_example(ex, m.vocab_size());
  double total = 0.0;
  Vector dlogit;
  for (std::size_t pos = 0; pos < ex.words.size(); ++pos) {
    const auto ctx = context_window(ex.words, pos, m.context_size(), m.start_index);
    const Vector r_hat = lbl_r_hat(ctx, m);
    const Vector logits = lbl_logits(r_hat, m);
    total += cross_entropy(logits, ex.words[pos], want_grad ? &dlogit : nullptr);
    if (!want_grad) continue;
    const Matrix& r = m.params.value(m.r);
    axpy(1.0, dlogit, m.params.grad(m.bias).row(0));
    add_outer(m.params.grad(m.r), dlogit, r_hat);
    const Vector dr = matvec_t(r, dlogit);
    for (std::size_t i = 0; i < ctx.size(); ++i) {
      add_outer(m.params.grad(m.context[i]), dr, r.row(ctx[i]));
      axpy(1.0, matvec_t(m.params.value(m.context[i]), dr), m.params.grad(m.r).row(ctx[i]));
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// Multiplicative

FactoredTensor add_factored_tensor(ParamStore& store, std::size_t vocab_size, std::size_t dim,
                                   std::size_t cond_dim, std::size_t factors, SeededRng& rng,
                                   double scale) {
  if (vocab_size == 0 || dim == 0 || cond_dim == 0 || factors == 0) {
    throw Error("factored tensor: V, K, G and F must be positive");
  }
  FactoredTensor ft;
  ft.w_fk = store.add("W_fk", uniform_matrix(factors, dim, rng, scale));
  ft.w_fd = store.add("W_fd", uniform_matrix(factors, cond_dim, rng, scale));
  ft.w_fv = store.add("W_fv", uniform_matrix(factors, vocab_size, rng, scale));
  ft.bias = store.add("b", Matrix(1, vocab_size));
  return ft;
}

Matrix fold_embeddings(const Matrix& w_fk, const Matrix& w_fv) {
  if (w_fk.rows() != w_fv.rows()) {
    throw Error("fold_embeddings: W^fk has " + std::to_string(w_fk.rows()) +
                " factors but W^fv has " + std::to_string(w_fv.rows()));
  }
  return matmul_tn(w_fk, w_fv);
}

MnlmModel make_mnlm(std::size_t vocab_size, std::size_t dim, std::size_t cond_dim,
                    std::size_t factors, std::size_t context_size, std::size_t start_index,
                    SeededRng& rng) {
  check_index(start_index, vocab_size, "start token");
  MnlmModel m;
  m.factored = add_factored_tensor(m.params, vocab_size, dim, cond_dim, factors, rng);
  m.context = add_context_matrices(m.params, context_size, dim, rng, "C");
  m.start_index = start_index;
  return m;
}

Vector factored_logits(std::span<const std::size_t> context, std::span<const double> u,
                       const ParamStore& store, const FactoredTensor& factored,
                       std::span<const ParamId> context_matrices) {
  const Matrix folded = fold_embeddings(store.value(factored.w_fk), store.value(factored.w_fv));
  return factored_forward(context, u, store, factored, context_matrices, folded).logits;
}

Vector mnlm_distribution(std::span<const std::size_t> context, std::span<const double> u,
                         const MnlmModel& model) {
  return stable_softmax(factored_logits(context, u, model.params, model.factored, model.context));
}

double sentence_nll(MnlmModel& m, const NlmExample& ex, bool want_grad) {
  check_example(ex, m.vocab_size());
  const Matrix folded = fold_embeddings(m.params.value(m.factored.w_fk), m.params.value(m.factored.w_fv));
  Matrix d_folded(folded.rows(), folded.cols());
  double total = 0.0;
  Vector dlogit;
  for (std::size_t pos = 0; pos < ex.words.size(); ++pos) {
    const auto ctx = context_window(ex.words, pos, m.context_size(), m.start_index);
    const auto fw = factored_forward(ctx, ex.cond, m.params, m.factored, m.context, folded);
    total += cross_entropy(fw.logits, ex.words[pos], want_grad ? &dlogit : nullptr);
    if (want_grad) factored_backward(fw, ctx, ex.cond, dlogit, m.params, m.factored, m.context, d_folded);
  }
  if (want_grad) folded_backward(m.params, m.factored, d_folded);
  return total;
}

// ---------------------------------------------------------------------------
// SC-NLM

namespace {

ScnlmModel make_scnlm_impl(const ScnlmDims& dims, std::size_t start_index, TagSet tags,
                           std::vector<std::string> tokens, SeededRng& rng) {
  check_index(start_index, dims.vocab_size, "start token");
  if (dims.content_dim == 0) throw Error("scnlm: content dimension must be positive");
  ScnlmModel m;
  if (!(dims.init_scale > 0.0)) throw Error("scnlm: init scale must be positive");
  const double scale = dims.init_scale;
  m.factored = add_factored_tensor(m.params, dims.vocab_size, dims.dim, dims.attr_dim,
                                   dims.factors, rng, scale);
  m.context = add_context_matrices(m.params, dims.context_size, dims.dim, rng, "C", scale);
  m.tag_table = m.params.add("tag_table", uniform_matrix(tags.size(), dims.attr_dim, rng, scale));
  for (std::size_t i = 0; i <= dims.forward_size; ++i) {
    m.structure_context.push_back(
        m.params.add("T" + std::to_string(i), uniform_matrix(dims.attr_dim, dims.attr_dim, rng, scale)));
  }
  m.content_proj = m.params.add("T_u", uniform_matrix(dims.attr_dim, dims.content_dim, rng, scale));
  m.structure_bias = m.params.add("b_s", Matrix(1, dims.attr_dim));
  m.start_index = start_index;
  m.tags = std::move(tags);
  m.vocab_tokens = std::move(tokens);
  return m;
}

}  // namespace

ScnlmModel make_scnlm(const ScnlmDims& dims, const Vocabulary& vocab, TagSet tags,
                      SeededRng& rng) {
  ScnlmDims d = dims;
  d.vocab_size = vocab.size();
  return make_scnlm_impl(d, vocab.start_index(), std::move(tags), vocab.tokens(), rng);
}

ScnlmModel make_scnlm(const ScnlmDims& dims, std::size_t start_index, TagSet tags,
                      SeededRng& rng) {
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < dims.vocab_size; ++i) tokens.push_back("w" + std::to_string(i));
  return make_scnlm_impl(dims, start_index, std::move(tags), std::move(tokens), rng);
}

Vector scnlm_attribute(std::span<const double> u, std::span<const std::size_t> tags,
                       const ScnlmModel& model) {
  return attribute_forward(u, tags, model).value;
}

Vector scnlm_distribution(std::span<const std::size_t> context, std::span<const std::size_t> tags,
                          std::span<const double> u, const ScnlmModel& model) {
  const Vector u_hat = scnlm_attribute(u, tags, model);
  return stable_softmax(factored_logits(context, u_hat, model.params, model.factored, model.context));
}

Vector scnlm_log_probs(std::span<const std::size_t> context, std::span<const std::size_t> tags,
                       std::span<const double> u, const ScnlmModel& model, const Matrix* folded) {
  const Vector u_hat = scnlm_attribute(u, tags, model);
  if (folded == nullptr) {
    return log_softmax(factored_logits(context, u_hat, model.params, model.factored, model.context));
  }
  return log_softmax(
      factored_forward(context, u_hat, model.params, model.factored, model.context, *folded).logits);
}

double sentence_nll(ScnlmModel& m, const NlmExample& ex, bool want_grad) {
  check_example(ex, m.vocab_size());
  if (ex.tags.size() != ex.words.size()) throw Error("scnlm: word and tag counts differ");
  const Matrix folded = fold_embeddings(m.params.value(m.factored.w_fk), m.params.value(m.factored.w_fv));
  Matrix d_folded(folded.rows(), folded.cols());
  const std::size_t endpos = m.tags.endpos_index();
  double total = 0.0;
  Vector dlogit;
  for (std::size_t pos = 0; pos < ex.words.size(); ++pos) {
    const auto ctx = context_window(ex.words, pos, m.context_size(), m.start_index);
    const auto win = tag_window(ex.tags, pos, m.forward_size(), endpos);
    const auto aw = attribute_forward(ex.cond, win, m);
    const auto fw = factored_forward(ctx, aw.value, m.params, m.factored, m.context, folded);
    total += cross_entropy(fw.logits, ex.words[pos], want_grad ? &dlogit : nullptr);
    if (want_grad) {
      const Vector du =
          factored_backward(fw, ctx, aw.value, dlogit, m.params, m.factored, m.context, d_folded);
      attribute_backward(aw, ex.cond, du, m);
    }
  }
  if (want_grad) folded_backward(m.params, m.factored, d_folded);
  return total;
}

void ScnlmModel::save(Archive& archive) const {
  archive.set_dim("V", static_cast<std::int64_t>(vocab_size()));
  archive.set_dim("K", static_cast<std::int64_t>(dim()));
  archive.set_dim("G", static_cast<std::int64_t>(attr_dim()));
  archive.set_dim("F", static_cast<std::int64_t>(factors()));
  archive.set_dim("U", static_cast<std::int64_t>(content_dim()));
  archive.set_dim("context", static_cast<std::int64_t>(context_size()));
  archive.set_dim("forward", static_cast<std::int64_t>(forward_size()));
  archive.set_dim("start", static_cast<std::int64_t>(start_index));
  archive.put_strings("scnlm.tags", tags.tags());
  archive.put_strings("scnlm.vocab", vocab_tokens);
  archive.put_params(params, "scnlm.");
}

ScnlmModel ScnlmModel::load(const Archive& archive) {
  ScnlmDims dims;
  auto get = [&](const char* name) {
    const auto v = archive.dim(name);
    if (v < 0) throw Error(std::string("archive: negative dim ") + name);
    return static_cast<std::size_t>(v);
  };
  dims.vocab_size = get("V");
  dims.dim = get("K");
  dims.attr_dim = get("G");
  dims.factors = get("F");
  dims.content_dim = get("U");
  dims.context_size = get("context");
  dims.forward_size = get("forward");
  const auto& tag_names = archive.strings("scnlm.tags");
  if (tag_names.empty() || tag_names[0] != kEndPosTag) {
    throw Error("archive: SC-NLM tag table must start with <endpos>");
  }
  TagSet tags(std::vector<std::string>(tag_names.begin() + 1, tag_names.end()));
  SeededRng rng(0);
  ScnlmModel m = make_scnlm_impl(dims, get("start"), std::move(tags),
                                 archive.strings("scnlm.vocab"), rng);
  if (m.vocab_tokens.size() != dims.vocab_size) throw Error("archive: SC-NLM vocabulary size mismatch");
  archive.get_params(m.params, "scnlm.");
  return m;
}

// ---------------------------------------------------------------------------
// Training

std::vector<NlmExample> make_examples(const std::vector<CaptionRecord>& records,
                                      const std::vector<Vector>& conds, const TagSet& tags) {
  if (conds.size() != records.size()) {
    throw Error("missing conditioning vector: " + std::to_string(records.size()) + " records, " +
                std::to_string(conds.size()) + " vectors");
  }
  std::vector<NlmExample> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.ids.size() != r.words.size()) throw Error("caption for '" + r.image_id + "' lacks vocabulary ids");
    NlmExample ex;
    ex.words = r.ids;
    for (const auto& t : r.tags) ex.tags.push_back(tags.index(t));
    ex.cond = conds[i];
    out.push_back(std::move(ex));
  }
  return out;
}

void init_bias_from_unigrams(Matrix& bias, const std::vector<NlmExample>& corpus) {
  const std::size_t v = bias.cols();
  std::vector<double> counts(v, 0.0);
  double total = 0.0;
  for (const auto& ex : corpus) {
    for (std::size_t w : ex.words) {
      check_index(w, v, "word");
      counts[w] += 1.0;
      total += 1.0;
    }
  }
  for (std::size_t i = 0; i < v; ++i) {
    bias(0, i) = std::log((counts[i] + 1.0) / (total + static_cast<double>(v)));
  }
}

namespace {

template <typename Model>
std::vector<NlmEpochLog> train_impl(Model& model, const std::vector<NlmExample>& corpus,
                                    const NlmTrainConfig& config) {
  if (!(config.learning_rate > 0.0)) throw Error("train_nlm: learning rate must be positive");
  if (!(config.decay > 0.0 && config.decay <= 1.0)) throw Error("train_nlm: decay must lie in (0, 1]");
  if (corpus.empty() && config.epochs > 0) throw Error("train_nlm: empty corpus");
  SeededRng rng(config.seed);
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<NlmEpochLog> log;
  double lr = config.learning_rate;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double total = 0.0;
    std::size_t tokens = 0;
    for (std::size_t i : order) {
      model.params.zero_grad();
      total += sentence_nll(model, corpus[i], true);
      tokens += corpus[i].words.size();
      model.params.sgd_step(lr);
    }
    log.push_back({epoch + 1, lr, total / static_cast<double>(tokens)});
    lr *= config.decay;
  }
  model.params.zero_grad();
  return log;
}

template <typename Model>
double perplexity_impl(Model& model, const std::vector<NlmExample>& corpus) {
  if (corpus.empty()) throw Error("perplexity: empty corpus");
  double total = 0.0;
  std::size_t tokens = 0;
  for (const auto& ex : corpus) {
    total += sentence_nll(model, ex, false);
    tokens += ex.words.size();
  }
  return std::exp(total / static_cast<double>(tokens));
}

}  // namespace

std::vector<NlmEpochLog> train_nlm(LblModel& model, const std::vector<NlmExample>& corpus,
                                   const NlmTrainConfig& config) {
  return train_impl(model, corpus, config);
}
std::vector<NlmEpochLog> train_nlm(MnlmModel& model, const std::vector<NlmExample>& corpus,
                                   const NlmTrainConfig& config) {
  return train_impl(model, corpus, config);
}
std::vector<NlmEpochLog> train_nlm(ScnlmModel& model, const std::vector<NlmExample>& corpus,
                                   const NlmTrainConfig& config) {
  return train_impl(model, corpus, config);
}

double perplexity(LblModel& model, const std::vector<NlmExample>& corpus) {
  return perplexity_impl(model, corpus);
}
double perplexity(MnlmModel& model, const std::vector<NlmExample>& corpus) {
  return perplexity_impl(model, corpus);
}
double perplexity(ScnlmModel& model, const std::vector<NlmExample>& corpus) {
  return perplexity_impl(model, corpus);
}

}  // namespace capgen
