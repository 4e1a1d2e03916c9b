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

#ifndef CAPGEN_KN_LM_H_
#define CAPGEN_KN_LM_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "capgen/archive.h"

namespace capgen {

inline constexpr double kDefaultKnDiscount = 0.75;

// Interpolated Kneser-Ney trigram model with one absolute discount.
//
// Every sentence is padded as <start> <start> w_1 .. w_N <end>. The history
// tables count a bigram/unigram each time it is the prefix of a counted
// trigram, so trigram counts marginalize exactly onto them. Lower orders use
// continuation counts (number of distinct left contexts), and the lowest
// order interpolates with a uniform distribution over the predictable
// vocabulary (every type except <start>), so no probability is ever zero.
class TrigramCounts {
 public:
  using Id = std::uint32_t;
  using Bigram = std::array<Id, 2>;
  using Trigram = std::array<Id, 3>;

  TrigramCounts() = default;

  const std::vector<std::string>& types() const { return types_; }
  std::size_t type_count() const { return types_.size(); }
  // Types that can be predicted (excludes <start>).
  std::size_t predictable_count() const { return types_.size() - 1; }
  Id id_of(std::string_view word) const;  // <unk> when absent
  double discount() const { return discount_; }
  std::uint64_t total_tokens() const { return total_tokens_; }

  std::uint64_t unigram(Id a) const;
  std::uint64_t bigram(Id a, Id b) const;
  std::uint64_t trigram(Id a, Id b, Id c) const;
  const std::map<Trigram, std::uint64_t>& trigrams() const { return trigram_; }
  const std::map<Bigram, std::uint64_t>& bigrams() const { return bigram_; }
  const std::vector<std::uint64_t>& unigrams() const { return unigram_; }

  // P_KN(w | u, v) for type ids.
  double prob(Id u, Id v, Id w) const;

  void save(Archive& archive) const;
  static TrigramCounts load(const Archive& archive);

  friend TrigramCounts build_kn_trigram(const std::vector<std::vector<std::string>>& corpus,
                                        double discount);

 private:
  Id intern(const std::string& word);
  void add_sentence(const std::vector<std::string>& words);
  void finalize();
  double prob_bigram(Id v, Id w) const;
  double prob_unigram(Id w) const;

  double discount_ = kDefaultKnDiscount;
  std::vector<std::string> types_;
  std::unordered_map<std::string, Id> index_;
  std::uint64_t total_tokens_ = 0;

  std::map<Trigram, std::uint64_t> trigram_;
  std::map<Bigram, std::uint64_t> bigram_;  // history counts c(a, b, .)
  std::vector<std::uint64_t> unigram_;      // history counts c(a, ., .)
  std::map<Bigram, std::uint64_t> trigram_followers_;  // N1+(a, b, .)

  std::map<Bigram, std::uint64_t> cont_bigram_;         // N1+(., v, w)
  std::vector<std::uint64_t> cont_bigram_total_;        // N1+(., v, .)
  std::vector<std::uint64_t> cont_bigram_followers_;    // |{w : N1+(., v, w) > 0}|
  std::vector<std::uint64_t> cont_unigram_;             // N1+(., w)
  std::uint64_t cont_unigram_total_ = 0;                // N1+(., .)
  std::uint64_t cont_unigram_types_ = 0;                // |{w : N1+(., w) > 0}|
};

// Words are lowercased; <start>, <end> and <unk> are always in the type list.
TrigramCounts build_kn_trigram(const std::vector<std::vector<std::string>>& corpus,
                               double discount = kDefaultKnDiscount);

// Sum over w_1..w_N and <end> of ln P_KN(w | two previous tokens). Words not
// seen in training map to <unk>.
double kn_logprob(const TrigramCounts& model, const std::vector<std::string>& sentence);

}  // namespace capgen

#endif  // CAPGEN_KN_LM_H_
