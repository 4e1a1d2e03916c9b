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

#ifndef CAPGEN_INGEST_H_
#define CAPGEN_INGEST_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "capgen/numcore.h"

namespace capgen {

inline constexpr std::string_view kStartToken = "<start>";
inline constexpr std::string_view kEndToken = "<end>";
inline constexpr std::string_view kUnkToken = "<unk>";
inline constexpr std::string_view kEndPosTag = "<endpos>";

// Seed used for the embeddings of reserved tokens appended by the loader.
inline constexpr std::uint64_t kReservedEmbeddingSeed = 0x9e3779b97f4a7c15ULL;

// Token <-> index bijection plus the fixed V x K word embedding table.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> tokens, Matrix embeddings);

  std::size_t size() const { return tokens_.size(); }
  std::size_t dim() const { return embeddings_.cols(); }

  const std::string& token(std::size_t index) const { return tokens_.at(index); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::optional<std::size_t> find(std::string_view token) const;
  // Index of token, or of <unk> when absent.
  std::size_t index_or_unk(std::string_view token) const;
  std::size_t start_index() const { return *find(kStartToken); }
  std::size_t end_index() const { return *find(kEndToken); }
  std::size_t unk_index() const { return *find(kUnkToken); }
  bool is_reserved(std::size_t index) const;

  const Matrix& embeddings() const { return embeddings_; }
  std::span<const double> embedding(std::size_t index) const { return embeddings_.row(index); }

  // Appends any missing reserved token with a uniform[-0.08, 0.08] row.
  void ensure_reserved(SeededRng& rng);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
  Matrix embeddings_;
};

// One tagged caption. `words` are lowercased, with out-of-vocabulary words
// replaced by <unk> once a vocabulary is applied; `ids` is then filled.
struct CaptionRecord {
  std::string image_id;
  std::vector<std::string> words;
  std::vector<std::string> tags;
  std::vector<std::size_t> ids;
};

// Finite POS-tag vocabulary, always containing <endpos>.
class TagSet {
 public:
  TagSet();
  explicit TagSet(const std::vector<std::string>& tags);
  static TagSet from_records(const std::vector<CaptionRecord>& records);

  std::size_t size() const { return tags_.size(); }
  const std::vector<std::string>& tags() const { return tags_; }
  const std::string& tag(std::size_t index) const { return tags_.at(index); }
  std::size_t index(std::string_view tag) const;
  std::size_t endpos_index() const { return index(kEndPosTag); }

 private:
  void add(const std::string& tag);
  std::vector<std::string> tags_;
  std::unordered_map<std::string, std::size_t> index_;
};

class FeatureStore {
 public:
  explicit FeatureStore(std::size_t dim = 0) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  bool contains(std::string_view id) const { return index_.contains(std::string(id)); }
  std::span<const double> get(std::string_view id) const;

  void add(std::string id, std::span<const double> features);

 private:
  std::size_t dim_;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> values_;
};

// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);
std::string to_lower(std::string_view s);
std::vector<std::string> split_whitespace(std::string_view s);

Vocabulary load_word_embeddings(const std::string& path,
                                std::uint64_t reserved_seed = kReservedEmbeddingSeed);
Vocabulary parse_word_embeddings(std::string_view text,
                                 std::uint64_t reserved_seed = kReservedEmbeddingSeed);
std::string serialize_word_embeddings(const Vocabulary& vocab);

FeatureStore load_image_features(const std::string& path);
FeatureStore parse_image_features(std::string_view text);
std::string serialize_image_features(const FeatureStore& store);

// Without a vocabulary the records keep their words verbatim and `ids` empty.
std::vector<CaptionRecord> load_caption_corpus(const std::string& path);
std::vector<CaptionRecord> load_caption_corpus(const std::string& path, const Vocabulary& vocab);
std::vector<CaptionRecord> parse_caption_corpus(std::string_view text);
std::string serialize_caption_corpus(const std::vector<CaptionRecord>& records);
// Maps every word through the vocabulary, substituting <unk>.
void apply_vocabulary(std::vector<CaptionRecord>& records, const Vocabulary& vocab);

std::set<std::string> load_stopwords(const std::string& path);
// Plain text, one whitespace-tokenized sentence per line.
std::vector<std::vector<std::string>> load_sentences(const std::string& path);

Vocabulary build_vocabulary(const std::vector<CaptionRecord>& records, std::size_t min_count,
                            std::size_t dim, SeededRng& rng);

// Word -> most frequent tag lookup. Only meant for building tagged fixtures.
class FrequencyTagger {
 public:
  explicit FrequencyTagger(const std::vector<CaptionRecord>& tagged,
                           std::string fallback_tag = "NN");
  std::vector<std::string> tag(const std::vector<std::string>& words) const;

 private:
  std::map<std::string, std::string> best_;
  std::string fallback_;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace capgen

#endif  // CAPGEN_INGEST_H_
