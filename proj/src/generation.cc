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

#include "capgen/generation.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <utility>

namespace capgen {

PosTemplatePool PosTemplatePool::harvest(const std::vector<CaptionRecord>& records) {
  PosTemplatePool pool;
  for (const auto& r : records) {
    if (r.tags.size() < kMinTemplateLength || r.tags.size() > kMaxTemplateLength) continue;
    pool.add(r.tags);
  }
  return pool;
}

void PosTemplatePool::add(std::vector<std::string> tags, std::size_t count) {
  if (tags.size() < kMinTemplateLength || tags.size() > kMaxTemplateLength) {
    throw Error("template pool: length " + std::to_string(tags.size()) + " outside [4, 12]");
  }
  if (count == 0) throw Error("template pool: frequency must be at least 1");
  auto it = std::lower_bound(entries_.begin(), entries_.end(), tags,
                             [](const Entry& e, const std::vector<std::string>& t) { return e.tags < t; });
  if (it != entries_.end() && it->tags == tags) {
    it->count += count;
  } else {
    entries_.insert(it, Entry{std::move(tags), count});
  }
  total_ += count;
}

std::size_t sample_pos_template_index(const PosTemplatePool& pool, SeededRng& rng) {
  if (pool.empty()) throw Error("sample_pos_template: empty template pool");
  std::size_t draw = rng.uniform_index(pool.total_count());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const std::size_t c = pool.entries()[i].count;
    if (draw < c) return i;
    draw -= c;
  }
  return pool.size() - 1;  // unreachable while counts sum to the total
}

const std::vector<std::string>& sample_pos_template(const PosTemplatePool& pool, SeededRng& rng) {
  return pool.entries()[sample_pos_template_index(pool, rng)].tags;
}

void validate(const GenConfig& config) {
  if (config.return_count < 1) throw Error("generation: return count must be at least 1");
  if (config.candidate_count < config.return_count) {
    throw Error("generation: candidate count must be at least the return count");
  }
  if (!(config.gamma > 0.0 && config.gamma <= 1.0)) {
    throw Error("generation: gamma must lie in (0, 1]");
  }
  if (config.concepts < 1) throw Error("generation: concept count must be at least 1");
  if (config.beam_width < 1) throw Error("generation: beam width must be at least 1");
}

std::vector<ConditioningVector> conditioning_candidates(std::span<const double> image_embedding,
                                                        const EmbeddingIndex& words,
                                                        const EmbeddingIndex& sentences,
                                                        const GenConfig& config) {
  if (words.empty()) throw Error("conditioning: empty word index");
  if (sentences.empty()) throw Error("conditioning: empty sentence index");
  if (config.concepts < 1) throw Error("conditioning: concept count must be at least 1");
  std::vector<ConditioningVector> out;
  out.push_back({"image", unit_normalize(image_embedding)});

  const auto near_words = nearest(image_embedding, words, config.concepts);
  const auto near_sentences = nearest(image_embedding, sentences, config.concepts);
  Vector mean(image_embedding.size(), 0.0);
  for (const auto& n : near_words) axpy(1.0, words.vector(n.index), mean);
  for (const auto& n : near_sentences) axpy(1.0, sentences.vector(n.index), mean);
  for (double& v : mean) v /= static_cast<double>(near_words.size() + near_sentences.size());
  out.push_back({"concepts", unit_normalize(mean)});

  if (config.per_concept) {
    for (const auto& n : near_words) {
      const auto v = words.vector(n.index);
      out.push_back({"concept:" + n.id, Vector(v.begin(), v.end())});
    }
    for (const auto& n : near_sentences) {
      const auto v = sentences.vector(n.index);
      out.push_back({"concept:" + n.id, Vector(v.begin(), v.end())});
    }
  }
  return out;
}

namespace {

struct Hypothesis {
  std::vector<std::size_t> tokens;
  double log_prob = 0.0;
};

bool better(const Hypothesis& a, const Hypothesis& b) {
  if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
  return a.tokens < b.tokens;
}

}  // namespace

DecodeResult map_decode(const ScnlmModel& model, std::span<const double> u,
                        std::span<const std::size_t> template_tags, std::size_t beam_width,
                        const std::vector<bool>& banned) {
  if (beam_width < 1) throw Error("map_decode: beam width must be at least 1");
  if (template_tags.empty()) throw Error("map_decode: empty template");
  const std::size_t vocab = model.vocab_size();
  if (!banned.empty() && banned.size() != vocab) {
    throw Error("map_decode: banned mask has " + std::to_string(banned.size()) +
                " entries, vocabulary has " + std::to_string(vocab));
  }
  const Matrix folded =
      fold_embeddings(model.params.value(model.factored.w_fk), model.params.value(model.factored.w_fv));
  const std::size_t endpos = model.tags.endpos_index();

  std::vector<Hypothesis> beam{Hypothesis{}};
  for (std::size_t pos = 0; pos < template_tags.size(); ++pos) {
    const auto win = tag_window(template_tags, pos, model.forward_size(), endpos);
    std::vector<Hypothesis> expanded;
    expanded.reserve(beam.size() * vocab);
    for (const auto& h : beam) {
      const auto ctx = context_window(h.tokens, pos, model.context_size(), model.start_index);
      const Vector lp = scnlm_log_probs(ctx, win, u, model, &folded);
      for (std::size_t w = 0; w < vocab; ++w) {
        if (!banned.empty() && banned[w]) continue;
        Hypothesis next{h.tokens, h.log_prob + lp[w]};
        next.tokens.push_back(w);
        expanded.push_back(std::move(next));
      }
    }
    if (expanded.empty()) throw Error("map_decode: every word is banned");
    const std::size_t keep = std::min(beam_width, expanded.size());
    std::partial_sort(expanded.begin(), expanded.begin() + static_cast<std::ptrdiff_t>(keep),
                      expanded.end(), better);
    expanded.resize(keep);
    beam = std::move(expanded);
  }
  return DecodeResult{std::move(beam.front().tokens), beam.front().log_prob};
}

double repetition_penalty(const std::vector<std::string>& tokens,
                          const std::set<std::string>& stopwords, double gamma) {
  std::map<std::string, std::size_t> counts;
  for (const auto& t : tokens) ++counts[t];
  double penalty = 1.0;
  for (const auto& [word, c] : counts) {
    if (c > 1 && !stopwords.contains(word)) {
      penalty *= std::pow(gamma, static_cast<double>(c - 1));
    }
  }
  return penalty;
}

ScoreParts score_candidate(const std::vector<std::string>& tokens,
                           std::span<const double> image_embedding, const JointModel& encoder,
                           const TrigramCounts& kn, const GenConfig& config) {
  if (tokens.empty()) throw Error("score_candidate: empty candidate");
  std::vector<std::size_t> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(encoder.vocab().index_or_unk(t));
  const Vector v = encoder.encode(ids);
  const double cosine = score(image_embedding, v);

  ScoreParts s;
  s.translation = 0.5 * (1.0 + cosine) * repetition_penalty(tokens, config.stopwords, config.gamma);
  s.lm = kn_logprob(kn, tokens) / static_cast<double>(tokens.size());
  s.total = config.w_translation * s.translation + config.w_lm * s.lm;
  return s;
}

std::string Candidate::text() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

namespace {

template <typename T>
const T& require_model(const T* model, const char* name) {
  if (model == nullptr) throw Error(std::string("generation: missing model: ") + name);
  return *model;
}

bool ranks_before(const Candidate& a, const Candidate& b) {
  if (a.scores.total != b.scores.total) return a.scores.total > b.scores.total;
  return a.tokens < b.tokens;
}

}  // namespace

std::vector<Candidate> generate_captions(std::span<const double> image_features,
                                         const GenerationModels& models, const GenConfig& config) {
  validate(config);
  const auto& encoder = require_model(models.encoder, "encoder");
  const auto& decoder = require_model(models.decoder, "scnlm");
  const auto& lm = require_model(models.language_model, "kn");
  const auto& words = require_model(models.words, "word index");
  const auto& sentences = require_model(models.sentences, "sentence index");
  const auto& templates = require_model(models.templates, "template pool");
  if (templates.empty()) throw Error("generation: empty template pool");
  if (decoder.vocab_tokens.size() != decoder.vocab_size()) {
    throw Error("generation: decoder has no vocabulary");
  }
  if (decoder.content_dim() != encoder.dim()) {
    throw Error("generation: decoder conditioning dimension " +
                std::to_string(decoder.content_dim()) + " differs from embedding dimension " +
                std::to_string(encoder.dim()));
  }

  const Vector x = encoder.embed_image(image_features);
  const auto conds = conditioning_candidates(x, words, sentences, config);

  std::vector<std::vector<std::size_t>> template_ids;
  for (const auto& e : templates.entries()) {
    std::vector<std::size_t> ids;
    for (const auto& t : e.tags) ids.push_back(decoder.tags.index(t));
    template_ids.push_back(std::move(ids));
  }
  std::vector<bool> banned(decoder.vocab_size(), false);
  for (std::size_t w = 0; w < banned.size(); ++w) {
    const auto& tok = decoder.vocab_tokens[w];
    banned[w] = tok == kStartToken || tok == kEndToken || tok == kUnkToken;
  }

  // Draw every (conditioning vector, template) pair first; decodes of repeated
  // pairs are shared and the merge below is order independent.
  SeededRng rng(config.seed);
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> draws;
  for (std::size_t i = 0; i < config.candidate_count; ++i) {
    const std::size_t c = rng.uniform_index(conds.size());
    const std::size_t t = sample_pos_template_index(templates, rng);
    ++draws[{c, t}];
  }

  std::map<std::vector<std::string>, Candidate> distinct;
  for (const auto& [key, count] : draws) {
    const auto [c, t] = key;
    const auto decoded = map_decode(decoder, conds[c].u, template_ids[t], config.beam_width, banned);
    Candidate cand;
    for (std::size_t w : decoded.tokens) cand.tokens.push_back(decoder.vocab_tokens[w]);
    if (distinct.contains(cand.tokens)) continue;
    cand.pos = templates.entries()[t].tags;
    cand.source = conds[c].source;
    cand.scores = score_candidate(cand.tokens, x, encoder, lm, config);
    distinct.emplace(cand.tokens, std::move(cand));
  }

  std::vector<Candidate> ranked;
  ranked.reserve(distinct.size());
  for (auto& [tokens, cand] : distinct) ranked.push_back(std::move(cand));
  std::sort(ranked.begin(), ranked.end(), ranks_before);
  if (ranked.size() > config.return_count) ranked.resize(config.return_count);
  return ranked;
}

EmbeddingIndex build_word_index(const JointModel& encoder) {
  EmbeddingIndex index(encoder.dim());
  const auto& vocab = encoder.vocab();
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    if (vocab.is_reserved(i)) continue;
    const std::size_t one[] = {i};
    const Vector v = encoder.encode(one);
    if (norm2(v) < kNormEpsilon) continue;
    index.add(vocab.token(i), "word", v);
  }
  return index;
}

EmbeddingIndex build_sentence_index(const JointModel& encoder,
                                    const std::vector<CaptionRecord>& records) {
  EmbeddingIndex index(encoder.dim());
  std::map<std::string, std::size_t> per_image;
  for (const auto& r : records) {
    const std::size_t n = per_image[r.image_id]++;
    if (r.words.empty()) continue;
    std::vector<std::size_t> ids;
    for (const auto& w : r.words) ids.push_back(encoder.vocab().index_or_unk(w));
    const Vector v = encoder.encode(ids);
    if (norm2(v) < kNormEpsilon) continue;
    index.add(r.image_id + "#" + std::to_string(n), "sentence", v);
  }
  return index;
}

std::string format_candidates_tsv(const std::string& image_id,
                                  const std::vector<Candidate>& candidates) {
  std::string out;
  char buf[128];
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& s = candidates[i].scores;
    std::snprintf(buf, sizeof buf, "\t%zu\t%.6f\t%.6f\t%.6f\t", i + 1, s.total, s.translation, s.lm);
    out += image_id;
    out += buf;
    out += candidates[i].text();
    out += '\n';
  }
  return out;
}

std::string format_generation_report(const std::string& image_id,
                                     const std::vector<std::string>& originals,
                                     const std::string& nearest_sentence,
                                     const std::vector<Candidate>& candidates) {
  std::string out = "image " + image_id + "\n";
  for (const auto& o : originals) out += "  original: " + o + "\n";
  if (!nearest_sentence.empty()) out += "  nearest training sentence: " + nearest_sentence + "\n";
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    out += "  sample " + std::to_string(i + 1) + " [" + candidates[i].source + "]: " +
           candidates[i].text() + "\n";
  }
  return out;
}

}  // namespace capgen
