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

#ifndef CAPGEN_GENERATION_H_
#define CAPGEN_GENERATION_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "capgen/ingest.h"
#include "capgen/joint_embedding.h"
#include "capgen/kn_lm.h"
#include "capgen/nlm.h"
#include "capgen/regularities.h"

namespace capgen {

inline constexpr std::size_t kMinTemplateLength = 4;
inline constexpr std::size_t kMaxTemplateLength = 12;

// Distinct POS sequences with their corpus frequencies, in lexicographic
// order of the sequence.
class PosTemplatePool {
 public:
  struct Entry {
    std::vector<std::string> tags;
    std::size_t count = 0;
  };

  // Keeps only sequences whose length lies in [4, 12].
  static PosTemplatePool harvest(const std::vector<CaptionRecord>& records);
  void add(std::vector<std::string> tags, std::size_t count = 1);

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t total_count() const { return total_; }

 private:
  std::vector<Entry> entries_;
  std::size_t total_ = 0;
};

// Draws a template with probability proportional to its frequency.
const std::vector<std::string>& sample_pos_template(const PosTemplatePool& pool, SeededRng& rng);
std::size_t sample_pos_template_index(const PosTemplatePool& pool, SeededRng& rng);

struct GenConfig {
  std::size_t concepts = 5;  // N nearest words and sentences
  std::size_t candidate_count = 1000;
  std::size_t return_count = 5;
  std::size_t beam_width = 8;
  double w_translation = 1.0;
  double w_lm = 0.25;
  double gamma = 0.5;  // repetition penalty base
  bool per_concept = false;
  std::set<std::string> stopwords;
  std::uint64_t seed = 1234;
};

void validate(const GenConfig& config);

struct ConditioningVector {
  std::string source;  // "image", "concepts" or "concept:<id>"
  Vector u;            // unit norm
};

// The unit image embedding plus the normalized mean of its N nearest words
// and N nearest sentences; with per_concept, each of those neighbours too.
std::vector<ConditioningVector> conditioning_candidates(std::span<const double> image_embedding,
                                                        const EmbeddingIndex& words,
                                                        const EmbeddingIndex& sentences,
                                                        const GenConfig& config);

struct DecodeResult {
  std::vector<std::size_t> tokens;
  double log_prob = 0.0;
};

// Beam search for the most probable word sequence whose length equals the
// template. Hypotheses are ordered by log-probability, ties by the token
// sequence. Tokens flagged in `banned` are never emitted.
DecodeResult map_decode(const ScnlmModel& model, std::span<const double> u,
                        std::span<const std::size_t> template_tags, std::size_t beam_width,
                        const std::vector<bool>& banned = {});

struct ScoreParts {
  double translation = 0.0;
  double lm = 0.0;
  double total = 0.0;
};

// Product over non-stopword types occurring c > 1 times of gamma^(c-1).
double repetition_penalty(const std::vector<std::string>& tokens,
                          const std::set<std::string>& stopwords, double gamma);

// translation = ((1 + cos(x, v)) / 2) * repetition_penalty, lm = KN
// log-probability per token, total = w_t * translation + w_lm * lm.
ScoreParts score_candidate(const std::vector<std::string>& tokens,
                           std::span<const double> image_embedding, const JointModel& encoder,
                           const TrigramCounts& kn, const GenConfig& config);

struct Candidate {
  std::vector<std::string> tokens;
  std::vector<std::string> pos;
  std::string source;
  ScoreParts scores;

  std::string text() const;
};

struct GenerationModels {
  const JointModel* encoder = nullptr;
  const ScnlmModel* decoder = nullptr;
  const TrigramCounts* language_model = nullptr;
  const EmbeddingIndex* words = nullptr;
  const EmbeddingIndex* sentences = nullptr;
  const PosTemplatePool* templates = nullptr;
};

// Generates config.candidate_count decodes (sampling a conditioning vector
// and a template for each), scores the distinct ones and returns the best
// return_count, ordered by total score then caption text.
std::vector<Candidate> generate_captions(std::span<const double> image_features,
                                         const GenerationModels& models, const GenConfig& config);

// Index of the joint-space embedding of every non-reserved vocabulary word.
EmbeddingIndex build_word_index(const JointModel& encoder);
// Every caption, with id "<image_id>#<n>" (n counts captions per image).
EmbeddingIndex build_sentence_index(const JointModel& encoder,
                                    const std::vector<CaptionRecord>& records);

// image_id<TAB>rank<TAB>total<TAB>translation<TAB>lm<TAB>caption
std::string format_candidates_tsv(const std::string& image_id,
                                  const std::vector<Candidate>& candidates);

// Plain-text gallery entry: the image's own captions, its nearest training
// sentence and the returned samples.
std::string format_generation_report(const std::string& image_id,
                                     const std::vector<std::string>& originals,
                                     const std::string& nearest_sentence,
                                     const std::vector<Candidate>& candidates);

}  // namespace capgen

#endif  // CAPGEN_GENERATION_H_
