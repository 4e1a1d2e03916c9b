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

#include "capgen/ingest.h"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace capgen {

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_char(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t end = s.find(sep, start);
    if (end == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, end - start));
    start = end + 1;
  }
}

bool parse_number(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

bool parse_count(std::string_view s, std::size_t& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string where(std::string_view what, std::size_t line) {
  return std::string(what) + " line " + std::to_string(line);
}

void append_row(std::string& out, std::span<const double> row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i > 0) out += ' ';
    out += format_double(row[i]);
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write file: " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Vocabulary

Vocabulary::Vocabulary(std::vector<std::string> tokens, Matrix embeddings)
    : tokens_(std::move(tokens)), embeddings_(std::move(embeddings)) {
  if (embeddings_.rows() != tokens_.size()) {
    throw Error("vocabulary: " + std::to_string(tokens_.size()) + " tokens but " +
                std::to_string(embeddings_.rows()) + " embedding rows");
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], i).second) {
      throw Error("vocabulary: duplicate token '" + tokens_[i] + "'");
    }
  }
}

std::optional<std::size_t> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Vocabulary::index_or_unk(std::string_view token) const {
  if (auto i = find(token)) return *i;
  auto unk = find(kUnkToken);
  if (!unk) throw Error("vocabulary: no <unk> token for '" + std::string(token) + "'");
  return *unk;
}

bool Vocabulary::is_reserved(std::size_t index) const {
  const std::string& t = tokens_.at(index);
  return t == kStartToken || t == kEndToken || t == kUnkToken;
}

void Vocabulary::ensure_reserved(SeededRng& rng) {
  for (std::string_view reserved : {kStartToken, kEndToken, kUnkToken}) {
    if (find(reserved)) continue;
    const std::size_t k = embeddings_.cols();
    std::vector<double> values(embeddings_.values().begin(), embeddings_.values().end());
    for (std::size_t i = 0; i < k; ++i) values.push_back(rng.uniform(-kInitScale, kInitScale));
    embeddings_ = Matrix(embeddings_.rows() + 1, k, std::move(values));
    index_.emplace(std::string(reserved), tokens_.size());
    tokens_.emplace_back(reserved);
  }
}

// ---------------------------------------------------------------------------
// TagSet

TagSet::TagSet() { add(std::string(kEndPosTag)); }

TagSet::TagSet(const std::vector<std::string>& tags) : TagSet() {
  for (const auto& t : tags) add(t);
}

TagSet TagSet::from_records(const std::vector<CaptionRecord>& records) {
  std::set<std::string> seen;
  for (const auto& r : records) seen.insert(r.tags.begin(), r.tags.end());
  return TagSet(std::vector<std::string>(seen.begin(), seen.end()));
}

void TagSet::add(const std::string& tag) {
  if (index_.contains(tag)) return;
  index_.emplace(tag, tags_.size());
  tags_.push_back(tag);
}

std::size_t TagSet::index(std::string_view tag) const {
  auto it = index_.find(std::string(tag));
  if (it == index_.end()) throw Error("unknown POS tag '" + std::string(tag) + "'");
  return it->second;
}

// ---------------------------------------------------------------------------
// FeatureStore

std::span<const double> FeatureStore::get(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) throw Error("no image features for image_id '" + std::string(id) + "'");
  return {values_.data() + it->second * dim_, dim_};
}

void FeatureStore::add(std::string id, std::span<const double> features) {
  if (features.size() != dim_) {
    throw Error("image '" + id + "' has " + std::to_string(features.size()) +
                " features, expected D=" + std::to_string(dim_));
  }
  if (index_.contains(id)) throw Error("duplicate image_id '" + id + "'");
  for (double v : features) {
    if (!std::isfinite(v)) throw Error("image '" + id + "' has a non-finite feature");
  }
  index_.emplace(id, ids_.size());
  ids_.push_back(std::move(id));
  values_.insert(values_.end(), features.begin(), features.end());
}

// ---------------------------------------------------------------------------
// Word embeddings

Vocabulary parse_word_embeddings(std::string_view text, std::uint64_t reserved_seed) {
  auto lines = split_lines(text);
  if (lines.empty()) throw Error("word embeddings: empty file");
  auto header = split_whitespace(lines[0]);
  std::size_t v = 0, k = 0;
  if (header.size() != 2 || !parse_count(header[0], v) || !parse_count(header[1], k) || k == 0) {
    throw Error("word embeddings: " + where("bad header '<V> <K>' at", 1));
  }
  std::vector<std::string> tokens;
  std::vector<double> values;
  values.reserve(v * k);
  std::set<std::string> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto fields = split_whitespace(lines[i]);
    if (fields.size() != k + 1) {
      throw Error("word embeddings: " + where("dimension mismatch at", i + 1) + ": expected " +
                  std::to_string(k) + " values, got " + std::to_string(fields.size() - 1));
    }
    if (!seen.insert(fields[0]).second) {
      throw Error("word embeddings: duplicate token '" + fields[0] + "' at line " +
                  std::to_string(i + 1));
    }
    for (std::size_t j = 1; j <= k; ++j) {
      double x;
      if (!parse_number(fields[j], x)) {
        throw Error("word embeddings: " + where("bad number at", i + 1));
      }
      values.push_back(x);
    }
    tokens.push_back(std::move(fields[0]));
  }
  if (tokens.size() != v) {
    throw Error("word embeddings: header declares " + std::to_string(v) + " tokens, found " +
                std::to_string(tokens.size()));
  }
  const std::size_t rows = tokens.size();
  Vocabulary vocab(std::move(tokens), Matrix(rows, k, std::move(values)));
  SeededRng rng(reserved_seed);
  vocab.ensure_reserved(rng);
  return vocab;
}

Vocabulary load_word_embeddings(const std::string& path, std::uint64_t reserved_seed) {
  try {
    return parse_word_embeddings(read_file(path), reserved_seed);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

std::string serialize_word_embeddings(const Vocabulary& vocab) {
  std::string out = std::to_string(vocab.size()) + " " + std::to_string(vocab.dim()) + "\n";
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    out += vocab.token(i);
    out += ' ';
    append_row(out, vocab.embedding(i));
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Image features

FeatureStore parse_image_features(std::string_view text) {
  auto lines = split_lines(text);
  if (lines.empty()) throw Error("image features: empty file");
  std::size_t d = 0;
  std::string_view header = lines[0];
  if (!header.starts_with("D=") || !parse_count(header.substr(2), d) || d == 0) {
    throw Error("image features: line 1 must be 'D=<int>'");
  }
  FeatureStore store(d);
  std::vector<double> row;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto parts = split_char(lines[i], '\t');
    if (parts.size() != 2 || parts[0].empty()) {
      throw Error("image features: " + where("expected 'image_id<TAB>values' at", i + 1));
    }
    std::string id(parts[0]);
    auto fields = split_whitespace(parts[1]);
    if (fields.size() != d) {
      throw Error("image features: image_id '" + id + "' has " + std::to_string(fields.size()) +
                  " values, expected D=" + std::to_string(d));
    }
    row.assign(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
      if (!parse_number(fields[j], row[j])) {
        throw Error("image features: bad number for image_id '" + id + "'");
      }
    }
    if (store.contains(id)) throw Error("image features: duplicate image_id '" + id + "'");
    store.add(std::move(id), row);
  }
  return store;
}

FeatureStore load_image_features(const std::string& path) {
  try {
    return parse_image_features(read_file(path));
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

std::string serialize_image_features(const FeatureStore& store) {
  std::string out = "D=" + std::to_string(store.dim()) + "\n";
  for (const auto& id : store.ids()) {
    out += id;
    out += '\t';
    append_row(out, store.get(id));
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Captions

std::vector<CaptionRecord> parse_caption_corpus(std::string_view text) {
  std::vector<CaptionRecord> records;
  auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto parts = split_char(lines[i], '\t');
    if (parts.size() != 3 || parts[0].empty()) {
      throw Error("captions: " + where("expected 3 tab-separated fields at", i + 1));
    }
    CaptionRecord rec;
    rec.image_id = std::string(parts[0]);
    for (auto& w : split_whitespace(parts[1])) rec.words.push_back(to_lower(w));
    rec.tags = split_whitespace(parts[2]);
    if (rec.words.empty()) throw Error("captions: " + where("empty caption at", i + 1));
    if (rec.words.size() != rec.tags.size()) {
      throw Error("captions: " + where("token/tag count mismatch at", i + 1) + " (" +
                  std::to_string(rec.words.size()) + " tokens, " +
                  std::to_string(rec.tags.size()) + " tags)");
    }
    records.push_back(std::move(rec));
  }
  return records;
}

void apply_vocabulary(std::vector<CaptionRecord>& records, const Vocabulary& vocab) {
  for (auto& rec : records) {
    rec.ids.clear();
    for (auto& w : rec.words) {
      const std::size_t id = vocab.index_or_unk(w);
      w = vocab.token(id);
      rec.ids.push_back(id);
    }
  }
}

std::vector<CaptionRecord> load_caption_corpus(const std::string& path) {
  try {
    return parse_caption_corpus(read_file(path));
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

std::vector<CaptionRecord> load_caption_corpus(const std::string& path, const Vocabulary& vocab) {
  auto records = load_caption_corpus(path);
  apply_vocabulary(records, vocab);
  return records;
}

std::string serialize_caption_corpus(const std::vector<CaptionRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += r.image_id;
    out += '\t';
    for (std::size_t i = 0; i < r.words.size(); ++i) {
      if (i > 0) out += ' ';
      out += r.words[i];
    }
    out += '\t';
    for (std::size_t i = 0; i < r.tags.size(); ++i) {
      if (i > 0) out += ' ';
      out += r.tags[i];
    }
    out += '\n';
  }
  return out;
}

std::set<std::string> load_stopwords(const std::string& path) {
  std::set<std::string> words;
  const std::string text = read_file(path);
  for (auto line : split_lines(text)) {
    for (auto& w : split_whitespace(line)) words.insert(to_lower(w));
  }
  return words;
}

std::vector<std::vector<std::string>> load_sentences(const std::string& path) {
  std::vector<std::vector<std::string>> sentences;
  const std::string text = read_file(path);
  for (auto line : split_lines(text)) {
    auto words = split_whitespace(line);
    if (words.empty()) continue;
    for (auto& w : words) w = to_lower(w);
    sentences.push_back(std::move(words));
  }
  return sentences;
}

Vocabulary build_vocabulary(const std::vector<CaptionRecord>& records, std::size_t min_count,
                            std::size_t dim, SeededRng& rng) {
  if (min_count < 1) throw Error("build_vocabulary: min_count must be >= 1");
  if (dim == 0) throw Error("build_vocabulary: embedding dimension must be positive");
  if (records.empty()) throw Error("build_vocabulary: empty corpus");
  std::map<std::string, std::size_t> counts;
  std::vector<std::string> order;
  for (const auto& r : records) {
    for (const auto& w : r.words) {
      if (counts[w]++ == 0) order.push_back(w);
    }
  }
  std::vector<std::string> tokens;
  for (const auto& w : order) {
    if (counts[w] >= min_count && w != kStartToken && w != kEndToken && w != kUnkToken) {
      tokens.push_back(w);
    }
  }
  for (std::string_view reserved : {kStartToken, kEndToken, kUnkToken}) {
    tokens.emplace_back(reserved);
  }
  Matrix table = uniform_matrix(tokens.size(), dim, rng);
  return Vocabulary(std::move(tokens), std::move(table));
}

// ---------------------------------------------------------------------------
// FrequencyTagger

FrequencyTagger::FrequencyTagger(const std::vector<CaptionRecord>& tagged,
                                 std::string fallback_tag)
    : fallback_(std::move(fallback_tag)) {
  std::map<std::string, std::map<std::string, std::size_t>> counts;
  for (const auto& r : tagged) {
    for (std::size_t i = 0; i < r.words.size() && i < r.tags.size(); ++i) {
      ++counts[r.words[i]][r.tags[i]];
    }
  }
  for (const auto& [word, tags] : counts) {
    auto best = std::max_element(tags.begin(), tags.end(), [](const auto& a, const auto& b) {
      return a.second < b.second;
    });
    best_[word] = best->first;
  }
}

std::vector<std::string> FrequencyTagger::tag(const std::vector<std::string>& words) const {
  std::vector<std::string> tags;
  tags.reserve(words.size());
  for (const auto& w : words) {
    auto it = best_.find(to_lower(w));
    tags.push_back(it == best_.end() ? fallback_ : it->second);
  }
  return tags;
}

}  // namespace capgen
