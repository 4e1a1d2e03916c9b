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

#include "capgen/eval.h"

#include <algorithm>
#include <cstdio>
#include <unordered_map>

namespace capgen {

namespace {

Matrix unit_rows(const Matrix& m, std::string_view what) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    Vector u;
    try {
      u = unit_normalize(m.row(r));
    } catch (const Error&) {
      throw Error("rank_all: " + std::string(what) + " embedding " + std::to_string(r) +
                  " has zero norm");
    }
    std::copy(u.begin(), u.end(), out.row(r).begin());
  }
  return out;
}

// Rank of the best ground-truth candidate, with ties broken by candidate id.
std::size_t best_rank(std::span<const double> scores, const std::vector<std::string>& ids,
                      const std::vector<std::size_t>& truth) {
  std::size_t best = scores.size();
  for (std::size_t g : truth) {
    std::size_t ahead = 0;
    for (std::size_t c = 0; c < scores.size(); ++c) {
      if (scores[c] > scores[g] || (scores[c] == scores[g] && ids[c] < ids[g])) ++ahead;
    }
    best = std::min(best, ahead + 1);
  }
  return best;
}

}  // namespace

RankPair rank_all(const LabelledEmbeddings& images, const LabelledEmbeddings& captions,
                  const std::map<std::string, std::vector<std::string>>& ground_truth) {
  if (images.ids.size() != images.vectors.rows() || captions.ids.size() != captions.vectors.rows()) {
    throw Error("rank_all: id count does not match embedding rows");
  }
  if (images.ids.empty() || captions.ids.empty()) throw Error("rank_all: nothing to rank");
  if (images.vectors.cols() != captions.vectors.cols()) {
    throw Error("rank_all: image and caption embeddings differ in dimension");
  }
  std::unordered_map<std::string, std::size_t> image_pos, caption_pos;
  for (std::size_t i = 0; i < images.ids.size(); ++i) image_pos.emplace(images.ids[i], i);
  for (std::size_t i = 0; i < captions.ids.size(); ++i) caption_pos.emplace(captions.ids[i], i);

  std::vector<std::vector<std::size_t>> image_truth(images.ids.size());
  std::vector<std::vector<std::size_t>> caption_truth(captions.ids.size());
  for (const auto& [image, caps] : ground_truth) {
    auto ip = image_pos.find(image);
    if (ip == image_pos.end()) continue;
    for (const auto& c : caps) {
      auto cp = caption_pos.find(c);
      if (cp == caption_pos.end()) continue;
      image_truth[ip->second].push_back(cp->second);
      caption_truth[cp->second].push_back(ip->second);
    }
  }

  const Matrix xi = unit_rows(images.vectors, "image");
  const Matrix vc = unit_rows(captions.vectors, "caption");
  const Matrix s = matmul_nt(xi, vc);  // images x captions

  RankPair out;
  out.annotation.direction = RankDirection::kAnnotation;
  out.annotation.candidate_count = captions.ids.size();
  for (std::size_t i = 0; i < images.ids.size(); ++i) {
    if (image_truth[i].empty()) throw Error("rank_all: image '" + images.ids[i] + "' has no ground-truth caption");
    out.annotation.queries.push_back(images.ids[i]);
    out.annotation.ranks.push_back(best_rank(s.row(i), captions.ids, image_truth[i]));
  }
  out.search.direction = RankDirection::kSearch;
  out.search.candidate_count = images.ids.size();
  const Matrix st = s.transpose();
  for (std::size_t c = 0; c < captions.ids.size(); ++c) {
    if (caption_truth[c].empty()) throw Error("rank_all: caption '" + captions.ids[c] + "' has no ground-truth image");
    out.search.queries.push_back(captions.ids[c]);
    out.search.ranks.push_back(best_rank(st.row(c), images.ids, caption_truth[c]));
  }
  return out;
}

double recall_at_k(const RankResult& result, std::size_t k) {
  if (result.ranks.empty()) return 0.0;
  const auto hits = std::count_if(result.ranks.begin(), result.ranks.end(),
                                  [k](std::size_t r) { return r <= k; });
  return 100.0 * static_cast<double>(hits) / static_cast<double>(result.ranks.size());
}

double median_rank(const RankResult& result) {
  if (result.ranks.empty()) throw Error("median_rank: no ranks");
  std::vector<std::size_t> r = result.ranks;
  std::sort(r.begin(), r.end());
  const std::size_t n = r.size();
  if (n % 2 == 1) return static_cast<double>(r[n / 2]);
  return 0.5 * static_cast<double>(r[n / 2 - 1] + r[n / 2]);
}

std::string format_rank_table(const RankPair& ranks) {
  std::string out = "direction\tR@1\tR@5\tR@10\tMedr\n";
  char buf[160];
  for (const RankResult* r : {&ranks.annotation, &ranks.search}) {
    std::snprintf(buf, sizeof(buf), "%s\t%.1f\t%.1f\t%.1f\t%.1f\n",
                  r->direction == RankDirection::kAnnotation ? "annotation" : "search",
                  recall_at_k(*r, 1), recall_at_k(*r, 5), recall_at_k(*r, 10), median_rank(*r));
    out += buf;
  }
  return out;
}

}  // namespace capgen
