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

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "capgen/ingest.h"
#include "fixtures.h"

namespace capgen {
namespace {

using Corpus = std::vector<std::vector<std::string>>;
using Tri = std::array<std::string, 3>;

const std::string kStart(kStartToken), kEnd(kEndToken), kUnk(kUnkToken);

// Interpolated KN written from sets of observed trigram tokens, sharing no
// code with the library.
class KnOracle {
 public:
  KnOracle(const Corpus& corpus, double d) : d_(d) {
    std::set<std::string> types = {kStart, kEnd, kUnk};
    for (const auto& s : corpus) {
      std::vector<std::string> seq = {kStart, kStart};
      seq.insert(seq.end(), s.begin(), s.end());
      seq.push_back(kEnd);
      types.insert(seq.begin(), seq.end());
      for (std::size_t i = 2; i < seq.size(); ++i) tokens_.push_back({seq[i - 2], seq[i - 1], seq[i]});
    }
    predictable_ = types.size() - 1;
  }

  double p(const std::string& u, const std::string& v, const std::string& w) const {
    double hist = 0, cw = 0;
    std::set<std::string> followers;
    for (const auto& t : tokens_) {
      if (t[0] != u || t[1] != v) continue;
      ++hist;
      followers.insert(t[2]);
      if (t[2] == w) ++cw;
    }
    const double lower = p2(v, w);
    if (hist == 0) return lower;
    return std::max(cw - d_, 0.0) / hist + d_ * followers.size() / hist * lower;
  }

 private:
  // Distinct (left, v, w) triples give continuation counts for (v, w).
  double p2(const std::string& v, const std::string& w) const {
    std::set<Tri> distinct(tokens_.begin(), tokens_.end());
    double total = 0, cw = 0;
    std::set<std::string> followers;
    for (const auto& t : distinct) {
      if (t[1] != v) continue;
      ++total;
      followers.insert(t[2]);
      if (t[2] == w) ++cw;
    }
    const double lower = p1(w);
    if (total == 0) return lower;
    return std::max(cw - d_, 0.0) / total + d_ * followers.size() / total * lower;
  }

  double p1(const std::string& w) const {
    std::set<std::pair<std::string, std::string>> pairs;
    for (const auto& t : tokens_) pairs.insert({t[1], t[2]});
    std::set<std::string> cont_types;
    double cw = 0;
    for (const auto& [v, x] : pairs) {
      cont_types.insert(x);
      if (x == w) ++cw;
    }
    const double total = pairs.size();
    return std::max(cw - d_, 0.0) / total + d_ * cont_types.size() / total / predictable_;
  }

  double d_;
  std::vector<Tri> tokens_;
  std::size_t predictable_ = 0;
};

Corpus random_corpus(std::size_t sentences, std::size_t vocab, std::uint64_t seed) {
  SeededRng rng(seed);
  Corpus c(sentences);
  for (auto& s : c) {
    s.resize(1 + rng.uniform_index(6));
    for (auto& w : s) w = "w" + std::to_string(rng.uniform_index(vocab));
  }
  return c;
}

TEST(KnCounts, SingleSentenceByHand) {
  const auto m = build_kn_trigram({{"a", "b"}});
  const auto s = m.id_of(kStartToken), e = m.id_of(kEndToken), a = m.id_of("a"), b = m.id_of("b");
  EXPECT_EQ(m.trigram(s, s, a), 1u);
  EXPECT_EQ(m.trigram(s, a, b), 1u);
  EXPECT_EQ(m.trigram(a, b, e), 1u);
  EXPECT_EQ(m.trigrams().size(), 3u);
  EXPECT_EQ(m.bigram(s, s), 1u);
  EXPECT_EQ(m.unigram(s), 2u);
  EXPECT_EQ(m.total_tokens(), 3u);
  EXPECT_EQ(m.type_count(), 5u);
  EXPECT_EQ(m.id_of("zzz"), m.id_of(kUnkToken));
}

TEST(KnCounts, DuplicatingTheCorpusDoublesEveryCount) {
  Corpus c = random_corpus(10, 6, 1);
  const auto once = build_kn_trigram(c);
  Corpus twice = c;
  twice.insert(twice.end(), c.begin(), c.end());
  const auto two = build_kn_trigram(twice);
  ASSERT_EQ(two.trigrams().size(), once.trigrams().size());
  for (const auto& [t, n] : once.trigrams()) EXPECT_EQ(two.trigram(t[0], t[1], t[2]), 2 * n);
  EXPECT_EQ(two.total_tokens(), 2 * once.total_tokens());
}

TEST(KnCounts, MarginalsAreConsistent) {
  const auto m = build_kn_trigram(random_corpus(20, 8, 2));
  std::map<TrigramCounts::Bigram, std::uint64_t> bi;
  std::vector<std::uint64_t> uni(m.type_count(), 0);
  std::uint64_t total = 0;
  for (const auto& [t, n] : m.trigrams()) {
    bi[{t[0], t[1]}] += n;
    uni[t[0]] += n;
    total += n;
  }
  EXPECT_EQ(bi, m.bigrams());
  EXPECT_EQ(uni, m.unigrams());
  EXPECT_EQ(total, m.total_tokens());
}

TEST(KnProb, MatchesIndependentOracle) {
  for (double d : {0.0, 0.4, 0.75}) {
    const Corpus c = random_corpus(15, 5, 3);
    const auto m = build_kn_trigram(c, d);
    const KnOracle oracle(c, d);
    for (TrigramCounts::Id u = 0; u < m.type_count(); ++u)
      for (TrigramCounts::Id v = 0; v < m.type_count(); ++v)
        for (TrigramCounts::Id w = 0; w < m.type_count(); ++w) {
          if (m.types()[w] == kStartToken) {
            EXPECT_EQ(m.prob(u, v, w), 0.0);
            continue;
          }
          EXPECT_NEAR(m.prob(u, v, w), oracle.p(m.types()[u], m.types()[v], m.types()[w]), 1e-12)
              << m.types()[u] << " " << m.types()[v] << " " << m.types()[w] << " d=" << d;
        }
  }
}

TEST(KnProb, NormalizedForRandomContexts) {
  const auto m = build_kn_trigram(random_corpus(40, 45, 4));
  ASSERT_LE(m.type_count(), 50u);
  SeededRng rng(5);
  for (int t = 0; t < 100; ++t) {
    const auto u = static_cast<TrigramCounts::Id>(rng.uniform_index(m.type_count()));
    const auto v = static_cast<TrigramCounts::Id>(rng.uniform_index(m.type_count()));
    double s = 0.0;
    for (TrigramCounts::Id w = 0; w < m.type_count(); ++w) {
      const double p = m.prob(u, v, w);
      if (m.types()[w] != kStartToken) {
        EXPECT_GT(p, 0.0);
      }
      s += p;
    }
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
}

TEST(KnProb, MaximumLikelihoodLimitAtZeroDiscount) {
  const auto m = build_kn_trigram({{"a", "b", "c"}, {"b", "d"}}, 0.0);
  EXPECT_DOUBLE_EQ(m.prob(m.id_of("a"), m.id_of("b"), m.id_of("c")), 1.0);
}

TEST(KnProb, MoreEvidenceNeverLowersTheTrigram) {
  Corpus c = random_corpus(20, 5, 6);
  c.push_back({"w1", "w2", "w3"});
  double prev = 0.0;
  for (int extra = 0; extra < 5; ++extra) {
    const auto m = build_kn_trigram(c);
    const double p = m.prob(m.id_of("w1"), m.id_of("w2"), m.id_of("w3"));
    EXPECT_GE(p, prev);
    prev = p;
    c.push_back({"w1", "w2", "w3"});
  }
}

TEST(KnLogprob, FiniteNegativeAndSumOfTerms) {
  const auto m = build_kn_trigram(testing::toy_kn_corpus());
  const std::vector<std::string> s = {"a", "dog", "runs"};
  const double lp = kn_logprob(m, s);
  EXPECT_LT(lp, 0.0);
  const auto st = m.id_of(kStartToken);
  const double want = std::log(m.prob(st, st, m.id_of("a"))) +
                      std::log(m.prob(st, m.id_of("a"), m.id_of("dog"))) +
                      std::log(m.prob(m.id_of("a"), m.id_of("dog"), m.id_of("runs"))) +
                      std::log(m.prob(m.id_of("dog"), m.id_of("runs"), m.id_of(kEndToken)));
  EXPECT_NEAR(lp, want, 1e-12);
  EXPECT_TRUE(std::isfinite(kn_logprob(m, {kUnk})));
  EXPECT_TRUE(std::isfinite(kn_logprob(m, {"never", "seen", "words"})));
  EXPECT_EQ(kn_logprob(m, {"A", "Dog", "RUNS"}), lp);
  EXPECT_THROW(kn_logprob(m, {}), Error);
}

TEST(KnModel, SaveLoadAndBadInputs) {
  const auto m = build_kn_trigram(testing::toy_kn_corpus(), 0.6);
  Archive a;
  m.save(a);
  const auto back = TrigramCounts::load(Archive::parse(a.serialize()));
  EXPECT_EQ(back.types(), m.types());
  EXPECT_EQ(back.discount(), 0.6);
  EXPECT_EQ(back.trigrams(), m.trigrams());
  for (const auto& s : testing::toy_kn_corpus()) EXPECT_EQ(kn_logprob(back, s), kn_logprob(m, s));
  EXPECT_THROW(build_kn_trigram({}), Error);
  EXPECT_THROW(build_kn_trigram({{}}), Error);
  EXPECT_THROW(build_kn_trigram({{"a"}}, 1.0), Error);
  EXPECT_THROW(build_kn_trigram({{"a"}}, -0.1), Error);
}

}  // namespace
}  // namespace capgen
