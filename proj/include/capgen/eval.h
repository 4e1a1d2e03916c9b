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

#ifndef CAPGEN_EVAL_H_
#define CAPGEN_EVAL_H_

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "capgen/numcore.h"

namespace capgen {

struct LabelledEmbeddings {
  std::vector<std::string> ids;
  Matrix vectors;  // one row per id
};

enum class RankDirection { kAnnotation, kSearch };

// Per-query 1-based rank of the best-ranked ground-truth item.
struct RankResult {
  RankDirection direction = RankDirection::kAnnotation;
  std::vector<std::string> queries;
  std::vector<std::size_t> ranks;
  std::size_t candidate_count = 0;
};

struct RankPair {
  RankResult annotation;  // rank captions for each image
  RankResult search;      // rank images for each caption
};

// Candidates are sorted by descending cosine, ties by ascending candidate
// id. `ground_truth` maps image id to its caption ids; every image and
// every caption must appear in it.
RankPair rank_all(const LabelledEmbeddings& images, const LabelledEmbeddings& captions,
                  const std::map<std::string, std::vector<std::string>>& ground_truth);

double recall_at_k(const RankResult& result, std::size_t k);
double median_rank(const RankResult& result);

// "R@1 R@5 R@10 Medr" for both directions as TSV with a header line.
std::string format_rank_table(const RankPair& ranks);

}  // namespace capgen

#endif  // CAPGEN_EVAL_H_
