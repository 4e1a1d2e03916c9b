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

#include "capgen/kn_lm.h"

#include <algorithm>
#include <cmath>

#include "capgen/ingest.h"

namespace capgen {

namespace {

template <typename Map, typename Key>
std::uint64_t lookup(const Map& m, const Key& key) {
  auto it = m.find(key);
  return it == m.end() ? 0 : it->second;
}

}  // namespace

TrigramCounts::Id TrigramCounts::id_of(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it != index_.end()) return it->second;
  return index_.at(std::string(kUnkToken));
}

std::uint64_t TrigramCounts::unigram(Id a) const { return a < unigram_.size() ? unigram_[a] : 0; }
std::uint64_t TrigramCounts::bigram(Id a, Id b) const { return lookup(bigram_, Bigram{a, b}); }
std::uint64_t TrigramCounts::trigram(Id a, Id b, Id c) const {
  return lookup(trigram_, Trigram{a, b, c});
}

TrigramCounts::Id TrigramCounts::intern(const std::string& word) {
  auto [it, inserted] = index_.emplace(word, static_cast<Id>(types_.size()));
  if (inserted) types_.push_back(word);
  return it->second;
}

void TrigramCounts::add_sentence(const std::vector<std::string>& words) {
  std::vector<Id> seq{intern(std::string(kStartToken)), intern(std::string(kStartToken))};
  for (const auto& w : words) seq.push_back(intern(to_lower(w)));
  seq.push_back(intern(std::string(kEndToken)));
  for (std::size_t i = 2; i < seq.size(); ++i) {
    ++trigram_[{seq[i - 2], seq[i - 1], seq[i]}];
    ++total_tokens_;
  }
}

void TrigramCounts::finalize() {
  const std::size_t n = types_.size();
  bigram_.clear();
  trigram_followers_.clear();
  cont_bigram_.clear();
  unigram_.assign(n, 0);
  cont_bigram_total_.assign(n, 0);
  cont_bigram_followers_.assign(n, 0);
  cont_unigram_.assign(n, 0);
  cont_unigram_total_ = 0;
  cont_unigram_types_ = 0;
  for (const auto& [t, c] : trigram_) {
    bigram_[{t[0], t[1]}] += c;
    unigram_[t[0]] += c;
    ++trigram_followers_[{t[0], t[1]}];
    ++cont_bigram_[{t[1], t[2]}];
  }
  for (const auto& [b, c] : cont_bigram_) {
    cont_bigram_total_[b[0]] += c;
    ++cont_bigram_followers_[b[0]];
    ++cont_unigram_[b[1]];
  }
  for (std::size_t w = 0; w < n; ++w) {
    cont_unigram_total_ += cont_unigram_[w];
    if (cont_unigram_[w] > 0) ++cont_unigram_types_;
  }
}

double TrigramCounts::prob_unigram(Id w) const {
  const double uniform = 1.0 / static_cast<double>(predictable_count());
  if (cont_unigram_total_ == 0) return uniform;
  const double total = static_cast<double>(cont_unigram_total_);
  const double c = static_cast<double>(cont_unigram_[w]);
  return std::max(c - discount_, 0.0) / total +
         discount_ * static_cast<double>(cont_unigram_types_) / total * uniform;
}

double TrigramCounts::prob_bigram(Id v, Id w) const {
  const double lower = prob_unigram(w);
  const std::uint64_t total = cont_bigram_total_[v];
  if (total == 0) return lower;
  const double t = static_cast<double>(total);
  const double c = static_cast<double>(lookup(cont_bigram_, Bigram{v, w}));
  return std::max(c - discount_, 0.0) / t +
         discount_ * static_cast<double>(cont_bigram_followers_[v]) / t * lower;
}

double TrigramCounts::prob(Id u, Id v, Id w) const {
  if (u >= types_.size() || v >= types_.size() || w >= types_.size()) {
    throw Error("kn: type id out of range");
  }
  if (types_[w] == kStartToken) return 0.0;
  const double lower = prob_bigram(v, w);
  const std::uint64_t history = bigram(u, v);
  if (history == 0) return lower;
  const double h = static_cast<double>(history);
  const double c = static_cast<double>(trigram(u, v, w));
  const double followers = static_cast<double>(lookup(trigram_followers_, Bigram{u, v}));
  return std::max(c - discount_, 0.0) / h + discount_ * followers / h * lower;
}

TrigramCounts build_kn_trigram(const std::vector<std::vector<std::string>>& corpus,
                               double discount) {
  if (corpus.empty()) throw Error("kn: empty corpus");
  if (!(discount >= 0.0 && discount < 1.0)) throw Error("kn: discount must lie in [0, 1)");
  TrigramCounts m;
  m.discount_ = discount;
  for (std::string_view reserved : {kStartToken, kEndToken, kUnkToken}) {
    m.intern(std::string(reserved));
  }
  for (const auto& s : corpus) {
    if (s.empty()) continue;
    m.add_sentence(s);
  }
  if (m.total_tokens_ == 0) throw Error("kn: corpus has no non-empty sentences");
  m.finalize();
  return m;
}

double kn_logprob(const TrigramCounts& model, const std::vector<std::string>& sentence) {
  if (sentence.empty()) throw Error("kn_logprob: empty sentence");
  using Id = TrigramCounts::Id;
  const Id start = model.id_of(kStartToken);
  Id u = start, v = start;
  double total = 0.0;
  auto step = [&](Id w) {
    total += std::log(model.prob(u, v, w));
    u = v;
    v = w;
  };
  for (const auto& w : sentence) {
    const Id id = model.id_of(to_lower(w));
    step(id == start ? model.id_of(kUnkToken) : id);
  }
  step(model.id_of(kEndToken));
  return total;
}

void TrigramCounts::save(Archive& archive) const {
  archive.put_strings("kn.types", types_);
  archive.put_matrix("kn.discount", Matrix(1, 1, {discount_}));
  Matrix table(trigram_.size(), 4);
  std::size_t r = 0;
  for (const auto& [t, c] : trigram_) {
    table(r, 0) = t[0];
    table(r, 1) = t[1];
    table(r, 2) = t[2];
    table(r, 3) = static_cast<double>(c);
    ++r;
  }
  archive.put_matrix("kn.trigrams", table);
}

TrigramCounts TrigramCounts::load(const Archive& archive) {
  TrigramCounts m;
  for (const auto& t : archive.strings("kn.types")) {
    if (m.index_.contains(t)) throw Error("archive: duplicate KN type '" + t + "'");
    m.intern(t);
  }
  for (std::string_view reserved : {kStartToken, kEndToken, kUnkToken}) {
    if (!m.index_.contains(std::string(reserved))) throw Error("archive: KN types lack reserved tokens");
  }
  m.discount_ = archive.matrix("kn.discount", 1, 1)(0, 0);
  const Matrix& table = archive.matrix("kn.trigrams");
  require_shape(table, table.rows(), 4, "archive KN trigram table");
  for (std::size_t r = 0; r < table.rows(); ++r) {
    Trigram t;
    for (int j = 0; j < 3; ++j) {
      const double id = table(r, j);
      if (!(id >= 0 && id < static_cast<double>(m.types_.size())) || id != std::floor(id)) {
        throw Error("archive: bad KN type id");
      }
      t[j] = static_cast<Id>(id);
    }
    const double c = table(r, 3);
    if (!(c >= 1) || c != std::floor(c)) throw Error("archive: bad KN count");
    m.trigram_[t] += static_cast<std::uint64_t>(c);
    m.total_tokens_ += static_cast<std::uint64_t>(c);
  }
  m.finalize();
  return m;
}

}  // namespace capgen
