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

#include "fixtures.h"

#include <algorithm>
#include <cstdlib>

namespace capgen::testing {

Vocabulary numbered_vocab(std::size_t words, std::size_t dim, std::uint64_t seed) {
  SeededRng rng(seed);
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < words; ++i) tokens.push_back("w" + std::to_string(i));
  Vocabulary vocab(tokens, uniform_matrix(words, dim, rng, 0.5));
  vocab.ensure_reserved(rng);
  return vocab;
}

RetrievalWorld overfit_world(std::size_t pairs, std::size_t dim, std::size_t feature_dim,
                             std::uint64_t seed) {
  RetrievalWorld world{numbered_vocab(30, dim, seed), FeatureStore(feature_dim), {}};
  SeededRng rng(seed + 1);
  for (std::size_t i = 0; i < pairs; ++i) {
    const std::string id = "img" + std::to_string(i);
    Vector f(feature_dim);
    for (double& v : f) v = rng.normal();
    world.features.add(id, f);
    CaptionRecord r;
    r.image_id = id;
    const std::size_t len = 3 + rng.uniform_index(4);
    for (std::size_t t = 0; t < len; ++t) {
      r.words.push_back("w" + std::to_string(rng.uniform_index(30)));
      r.tags.push_back("NN");
    }
    world.records.push_back(std::move(r));
  }
  apply_vocabulary(world.records, world.vocab);
  return world;
}

GrammarWorld grammar_world(std::size_t scenes, std::size_t cond_dim, std::uint64_t seed) {
  GrammarWorld g;
  const std::vector<std::string> tag_names = {"DT", "IN", "JJ", "NN", "RB", "VBZ"};
  g.templates = {{"DT", "NN", "VBZ", "RB"},
                 {"DT", "JJ", "NN", "VBZ"},
                 {"JJ", "NN", "VBZ", "IN"},
                 {"DT", "JJ", "NN", "VBZ", "RB"}};
  std::map<std::string, std::vector<std::size_t>> lexicon;
  for (const auto& tag : tag_names) {
    for (std::size_t s = 0; s < scenes; ++s) {
      lexicon[tag].push_back(g.tokens.size());
      g.tokens.push_back(to_lower(tag) + std::to_string(s));
    }
  }
  for (auto r : {kStartToken, kEndToken, kUnkToken}) g.tokens.emplace_back(r);
  g.start_index = g.tokens.size() - 3;
  g.tags = TagSet(tag_names);

  SeededRng rng(seed);
  for (std::size_t s = 0; s < scenes; ++s) {
    Vector u(cond_dim);
    for (double& v : u) v = rng.normal();
    g.scenes.push_back(unit_normalize(u));
  }
  for (std::size_t t = 0; t < g.templates.size(); ++t) {
    for (std::size_t s = 0; s < scenes; ++s) {
      NlmExample ex;
      for (const auto& tag : g.templates[t]) {
        ex.words.push_back(lexicon[tag][s]);
        ex.tags.push_back(g.tags.index(tag));
      }
      ex.cond = g.scenes[s];
      g.corpus.push_back(std::move(ex));
      g.corpus_template.push_back(t);
      g.corpus_scene.push_back(s);
    }
  }
  return g;
}

AnalogyWorld analogy_world(std::size_t dim, std::uint64_t seed) {
  AnalogyWorld w;
  const std::vector<std::string> colours = {"red", "blue", "green", "white"};
  const std::vector<std::string> objects = {"car", "dog", "boat"};
  SeededRng rng(seed);
  auto random_vector = [&] {
    Vector v(dim);
    for (double& x : v) x = rng.normal();
    return unit_normalize(v);
  };
  for (const auto& c : colours) w.words[c] = random_vector();
  for (const auto& o : objects) w.words[o] = random_vector();
  for (const auto& c : colours) {
    for (const auto& o : objects) {
      Vector sum = w.words[c];
      axpy(1.0, w.words[o], sum);
      w.images[c + "_" + o] = sum;
    }
  }
  // One colour swap and one object swap per image: 12 + 12 queries.
  for (std::size_t ci = 0; ci < colours.size(); ++ci) {
    for (std::size_t oi = 0; oi < objects.size(); ++oi) {
      const auto& c = colours[ci];
      const auto& o = objects[oi];
      const auto& c2 = colours[(ci + 1) % colours.size()];
      const auto& o2 = objects[(oi + 1) % objects.size()];
      w.queries.push_back({c + "_" + o, c, c2, c2 + "_" + o});
      w.queries.push_back({c + "_" + o, o, o2, c + "_" + o2});
    }
  }
  return w;
}

std::vector<std::vector<std::string>> toy_kn_corpus() {
  const char* lines[] = {
      "a dog runs on the grass",       "a dog sits on the grass",
      "the cat sits on the mat",       "a cat runs in the snow",
      "the man rides a red bike",      "a woman rides a horse on the beach",
      "two dogs play in the snow",     "the dog plays with a ball",
      "a boy throws a ball",           "the girl runs on the beach",
      "a bird flies over the water",   "the red car drives on the street",
  };
  std::vector<std::vector<std::string>> corpus;
  for (const char* l : lines) corpus.push_back(split_whitespace(l));
  return corpus;
}

namespace {

struct Scene {
  std::string adj, noun, verb, place;
};

std::vector<Scene> caption_scenes() {
  const std::vector<std::string> adjs = {"black", "white", "brown", "red", "small"};
  const std::vector<std::string> nouns = {"dog", "cat", "man", "woman", "boy",
                                          "girl", "horse", "bird", "car", "bike"};
  const std::vector<std::string> verbs = {"runs", "sits", "jumps", "plays", "waits"};
  const std::vector<std::string> places = {"grass", "beach", "street", "snow", "field"};
  std::vector<Scene> scenes;
  for (std::size_t i = 0; i < nouns.size(); ++i) {
    scenes.push_back({adjs[i % 5], nouns[i], verbs[(2 * i + 1) % 5], places[(3 * i + 2) % 5]});
  }
  return scenes;
}

}  // namespace

CaptionWorld caption_world(std::uint64_t seed) {
  CaptionWorld w;
  w.stopwords = {"a", "the", "on"};
  const std::size_t dim = 16;
  const std::size_t feature_dim = 12;
  w.features = FeatureStore(feature_dim);
  SeededRng rng(seed);
  std::vector<std::string> tokens;
  auto intern = [&](const std::string& t) {
    if (std::find(tokens.begin(), tokens.end(), t) == tokens.end()) tokens.push_back(t);
  };
  const auto scenes = caption_scenes();
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const auto& s = scenes[i];
    const std::string id = "im" + std::to_string(i);
    Vector f(feature_dim);
    for (double& v : f) v = rng.normal();
    w.features.add(id, f);
    const std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> caps = {
        {{"a", s.adj, s.noun, s.verb, "on", "the", s.place},
         {"DT", "JJ", "NN", "VBZ", "IN", "DT", "NN"}},
        {{"the", s.noun, s.verb, "on", "the", s.place}, {"DT", "NN", "VBZ", "IN", "DT", "NN"}},
        {{"a", s.adj, s.noun, s.verb}, {"DT", "JJ", "NN", "VBZ"}},
        {{"the", s.adj, s.noun, s.verb, "outside"}, {"DT", "JJ", "NN", "VBZ", "RB"}},
        {{"a", s.noun, "on", "the", s.place}, {"DT", "NN", "IN", "DT", "NN"}},
    };
    for (const auto& [words, tags] : caps) {
      for (const auto& t : words) intern(t);
      w.records.push_back({id, words, tags, {}});
    }
  }
  w.vocab = Vocabulary(tokens, uniform_matrix(tokens.size(), dim, rng, 0.5));
  w.vocab.ensure_reserved(rng);
  apply_vocabulary(w.records, w.vocab);
  return w;
}

CaptionWorldFiles write_caption_world(const std::filesystem::path& dir, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  const CaptionWorld w = caption_world(seed);
  CaptionWorldFiles files{dir / "captions.tsv", dir / "features.txt", dir / "embeddings.txt",
                          dir / "stopwords.txt"};
  write_file(files.captions.string(), serialize_caption_corpus(w.records));
  write_file(files.features.string(), serialize_image_features(w.features));
  write_file(files.embeddings.string(), serialize_word_embeddings(w.vocab));
  std::string stop;
  for (const auto& s : w.stopwords) stop += s + "\n";
  write_file(files.stopwords.string(), stop);
  return files;
}

std::filesystem::path scratch_dir(const std::string& name) {
  const char* base = std::getenv("TMPDIR");
  auto dir = std::filesystem::path(base ? base : "/tmp") / ("capgen_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace capgen::testing
