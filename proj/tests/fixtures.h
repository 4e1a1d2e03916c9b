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

#ifndef CAPGEN_TESTS_FIXTURES_H_
#define CAPGEN_TESTS_FIXTURES_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "capgen/ingest.h"
#include "capgen/joint_embedding.h"
#include "capgen/nlm.h"
#include "capgen/numcore.h"

namespace capgen::testing {

// Vocabulary w0..w{n-1} plus the reserved tokens, uniform[-0.5, 0.5] rows.
Vocabulary numbered_vocab(std::size_t words, std::size_t dim, std::uint64_t seed);

// Random (feature, caption) pairs, one caption per image.
struct RetrievalWorld {
  Vocabulary vocab;
  FeatureStore features;
  std::vector<CaptionRecord> records;
};
RetrievalWorld overfit_world(std::size_t pairs, std::size_t dim, std::size_t feature_dim,
                             std::uint64_t seed);

// Every (template, scene) pair yields one sentence; word = lexicon[tag][scene].
struct GrammarWorld {
  std::vector<std::string> tokens;  // vocabulary, reserved tokens last
  std::size_t start_index = 0;
  TagSet tags;
  std::vector<std::vector<std::string>> templates;
  std::vector<Vector> scenes;                  // unit conditioning vectors
  std::vector<NlmExample> corpus;              // one per (template, scene)
  std::vector<std::size_t> corpus_template;    // template of corpus[i]
  std::vector<std::size_t> corpus_scene;       // scene of corpus[i]
};
GrammarWorld grammar_world(std::size_t scenes, std::size_t cond_dim, std::uint64_t seed);

// Image vectors that are exact sums of a colour and an object word vector.
struct AnalogyWorld {
  std::map<std::string, Vector> words;
  std::map<std::string, Vector> images;  // "<colour>_<object>"
  struct Query {
    std::string image, negative, positive, target;
  };
  std::vector<Query> queries;
};
AnalogyWorld analogy_world(std::size_t dim, std::uint64_t seed);

std::vector<std::vector<std::string>> toy_kn_corpus();

// Ten synthetic images, each with five tagged captions, stored as the CLI
// input files under `dir`: captions.tsv, features.txt, embeddings.txt,
// stopwords.txt.
struct CaptionWorldFiles {
  std::filesystem::path captions, features, embeddings, stopwords;
};
CaptionWorldFiles write_caption_world(const std::filesystem::path& dir, std::uint64_t seed = 11);
// The in-memory form of the same world.
struct CaptionWorld {
  Vocabulary vocab;
  FeatureStore features;
  std::vector<CaptionRecord> records;
  std::set<std::string> stopwords;
};
CaptionWorld caption_world(std::uint64_t seed = 11);

std::filesystem::path scratch_dir(const std::string& name);

}  // namespace capgen::testing

#endif  // CAPGEN_TESTS_FIXTURES_H_
