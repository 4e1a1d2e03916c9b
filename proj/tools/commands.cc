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

#include "commands.h"

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "capgen/archive.h"
#include "capgen/eval.h"
#include "capgen/generation.h"
#include "capgen/ingest.h"
#include "capgen/joint_embedding.h"
#include "capgen/kn_lm.h"
#include "capgen/nlm.h"
#include "capgen/regularities.h"

namespace capgen::cli {
namespace {

struct Args {
  std::string captions, features, embeddings, stopwords;
  std::string model_in, model_out, scnlm_in, kn_in, out, report;
  std::uint64_t seed = 1234;

  // train-embed
  std::string encoder = "lstm";
  std::size_t embed_dim = 0;  // 0: take K from the embeddings file
  double margin = kDefaultMargin;
  std::size_t embed_epochs = 15;
  double embed_lr = 1.0;
  double embed_decay = 0.99;
  std::size_t batch = 100;

  // train-scnlm
  std::string source = "text";
  std::size_t nlm_dim = 300, attr_dim = 300, factors = 100, context = 5, forward = 3;
  std::size_t nlm_epochs = 10;
  double nlm_lr = 0.1;
  double nlm_decay = 1.0;
  double init_scale = kInitScale;
  std::size_t min_count = 1;

  // train-kn
  double discount = kDefaultKnDiscount;

  // generate
  std::size_t candidates = 1000, top = 5, beam = 8, concepts = 5;
  double wt = 1.0, wlm = 0.25, gamma = 0.5;
  bool per_concept = false;
  std::vector<std::string> images;

  // analogy / pca
  std::string image, minus, plus, words;
  bool resort = false, force = false, no_images = false;
  std::size_t components = 2;
};

// ---------------------------------------------------------------------------
// Shared loading helpers.

JointModel load_encoder(const std::string& path) {
  return JointModel::load(Archive::read(path));
}

std::string caption_text(const CaptionRecord& r) {
  std::string s;
  for (std::size_t i = 0; i < r.words.size(); ++i) s += (i ? " " : "") + r.words[i];
  return s;
}

std::vector<std::size_t> encoder_ids(const JointModel& m, const std::vector<std::string>& words) {
  std::vector<std::size_t> ids;
  for (const auto& w : words) ids.push_back(m.vocab().index_or_unk(w));
  return ids;
}

// Embeds every listed image; ids must all be present in `features`.
LabelledEmbeddings embed_feature_set(const JointModel& m, const FeatureStore& features,
                                     const std::vector<std::string>& ids) {
  Matrix q(ids.size(), features.dim());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto f = features.get(ids[i]);
    std::copy(f.begin(), f.end(), q.row(i).begin());
  }
  return {ids, m.embed_images(q)};
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_file(path, text);
  }
}

// ---------------------------------------------------------------------------
// Subcommands.

int train_embed(const Args& a) {
  Vocabulary vocab = load_word_embeddings(a.embeddings);
  if (a.embed_dim != 0 && a.embed_dim != vocab.dim()) {
    throw Error("dimension mismatch: --dim-k " + std::to_string(a.embed_dim) + " but " +
                a.embeddings + " has K=" + std::to_string(vocab.dim()));
  }
  const auto records = load_caption_corpus(a.captions, vocab);
  const FeatureStore features = load_image_features(a.features);
  SeededRng rng(a.seed);
  JointModel model(vocab, features.dim(), parse_encoder_kind(a.encoder), rng, a.margin);
  TrainConfig cfg{a.batch, a.embed_lr, a.embed_decay, a.embed_epochs, a.seed};
  for (const auto& log : train_embedding(make_pairs(records), features, model, cfg)) {
    std::printf("epoch %zu\tlr %.6g\tloss %.6f\n", log.epoch, log.learning_rate, log.mean_loss);
  }
  Archive archive;
  model.save(archive);
  archive.write(a.model_out);
  return 0;
}

int train_scnlm(const Args& a) {
  const JointModel encoder = load_encoder(a.model_in);
  auto records = load_caption_corpus(a.captions);
  SeededRng rng(a.seed);
  Vocabulary vocab = build_vocabulary(records, a.min_count, 1, rng);
  apply_vocabulary(records, vocab);

  std::vector<Vector> conds;
  if (a.source == "text") {
    for (const auto& r : records) conds.push_back(unit_normalize(encoder.encode(encoder_ids(encoder, r.words))));
  } else if (a.source == "image") {
    if (a.features.empty()) throw Error("--source image requires --features");
    const FeatureStore features = load_image_features(a.features);
    for (const auto& r : records) {
      if (!features.contains(r.image_id)) throw Error("no features for image '" + r.image_id + "'");
      conds.push_back(unit_normalize(encoder.embed_image(features.get(r.image_id))));
    }
  } else {
    throw Error("--source must be text or image, got '" + a.source + "'");
  }

  ScnlmDims dims{vocab.size(), a.nlm_dim, a.attr_dim, a.factors, encoder.dim(), a.context, a.forward};
  dims.init_scale = a.init_scale;
  ScnlmModel model = make_scnlm(dims, vocab, TagSet::from_records(records), rng);
  const auto corpus = make_examples(records, conds, model.tags);
  init_bias_from_unigrams(model.params.value(model.factored.bias), corpus);
  NlmTrainConfig cfg;
  cfg.context_size = a.context;
  cfg.forward_size = a.forward;
  cfg.epochs = a.nlm_epochs;
  cfg.learning_rate = a.nlm_lr;
  cfg.decay = a.nlm_decay;
  cfg.seed = a.seed;
  cfg.source = a.source == "text" ? ConditioningSource::kText : ConditioningSource::kImage;
  for (const auto& log : train_nlm(model, corpus, cfg)) {
    std::printf("epoch %zu\tlr %.6g\tnll %.6f\n", log.epoch, log.learning_rate, log.mean_nll);
  }
  std::printf("perplexity\t%.6f\n", perplexity(model, corpus));
  Archive archive;
  model.save(archive);
  archive.write(a.model_out);
  return 0;
}

int train_kn(const Args& a) {
  const auto records = load_caption_corpus(a.captions);
  std::vector<std::vector<std::string>> sentences;
  for (const auto& r : records) sentences.push_back(r.words);
  const TrigramCounts model = build_kn_trigram(sentences, a.discount);
  std::printf("types\t%zu\ttokens\t%llu\ttrigrams\t%zu\n", model.type_count(),
              static_cast<unsigned long long>(model.total_tokens()), model.trigrams().size());
  Archive archive;
  model.save(archive);
  archive.write(a.model_out);
  return 0;
}

int rank(const Args& a) {
  const JointModel model = load_encoder(a.model_in);
  const auto records = load_caption_corpus(a.captions);
  const FeatureStore features = load_image_features(a.features);
  std::vector<std::string> image_ids, caption_ids;
  std::vector<std::vector<std::size_t>> sentences;
  std::map<std::string, std::vector<std::string>> truth;
  for (const auto& r : records) {
    if (!features.contains(r.image_id)) throw Error("no features for image '" + r.image_id + "'");
    auto& caps = truth[r.image_id];
    if (caps.empty()) image_ids.push_back(r.image_id);
    caption_ids.push_back(r.image_id + "#" + std::to_string(caps.size()));
    caps.push_back(caption_ids.back());
    sentences.push_back(encoder_ids(model, r.words));
  }
  const auto ranks = rank_all(embed_feature_set(model, features, image_ids),
                              {caption_ids, model.encode_batch(sentences)}, truth);
  emit(a.out, format_rank_table(ranks));
  return 0;
}

int generate(const Args& a) {
  const JointModel encoder = load_encoder(a.model_in);
  const ScnlmModel decoder = ScnlmModel::load(Archive::read(a.scnlm_in));
  const TrigramCounts lm = TrigramCounts::load(Archive::read(a.kn_in));
  const auto records = load_caption_corpus(a.captions);
  const FeatureStore features = load_image_features(a.features);

  GenConfig cfg;
  cfg.concepts = a.concepts;
  cfg.candidate_count = a.candidates;
  cfg.return_count = a.top;
  cfg.beam_width = a.beam;
  cfg.w_translation = a.wt;
  cfg.w_lm = a.wlm;
  cfg.gamma = a.gamma;
  cfg.per_concept = a.per_concept;
  cfg.seed = a.seed;
  if (!a.stopwords.empty()) cfg.stopwords = load_stopwords(a.stopwords);
  validate(cfg);

  const EmbeddingIndex words = build_word_index(encoder);
  const EmbeddingIndex sentences = build_sentence_index(encoder, records);
  const PosTemplatePool templates = PosTemplatePool::harvest(records);
  GenerationModels models{&encoder, &decoder, &lm, &words, &sentences, &templates};

  std::map<std::string, std::vector<std::string>> originals;
  std::map<std::string, std::string> sentence_text;
  {
    std::map<std::string, std::size_t> n;
    for (const auto& r : records) {
      originals[r.image_id].push_back(caption_text(r));
      sentence_text[r.image_id + "#" + std::to_string(n[r.image_id]++)] = caption_text(r);
    }
  }

  const std::vector<std::string> ids = a.images.empty() ? features.ids() : a.images;
  std::string tsv, report;
  for (const auto& id : ids) {
    if (!features.contains(id)) throw Error("no features for image '" + id + "'");
    const auto best = generate_captions(features.get(id), models, cfg);
    tsv += format_candidates_tsv(id, best);
    const auto nn = nearest(encoder.embed_image(features.get(id)), sentences, 1);
    report += format_generation_report(id, originals[id], nn.empty() ? "" : sentence_text[nn[0].id],
                                       best);
  }
  emit(a.out, tsv);
  if (!a.report.empty()) write_file(a.report, report);
  return 0;
}

constexpr const char* kLstmArithmeticCaveat =
    "note: vector arithmetic is only expected to be meaningful for the linear encoder";

int analogy(const Args& a) {
  const JointModel model = load_encoder(a.model_in);
  if (model.kind() != EncoderKind::kLinear) {
    if (!a.force) {
      throw Error("analogy needs a linear-encoder model (" + a.model_in +
                  " uses lstm); pass --force to run anyway");
    }
    std::cerr << kLstmArithmeticCaveat << "\n";
  }
  const FeatureStore features = load_image_features(a.features);
  if (!features.contains(a.image)) throw Error("no features for image '" + a.image + "'");
  EmbeddingIndex index(model.dim());
  const auto embedded = embed_feature_set(model, features, features.ids());
  for (std::size_t i = 0; i < embedded.ids.size(); ++i) {
    index.add(embedded.ids[i], "image", embedded.vectors.row(i));
  }
  auto word_vector = [&](const std::string& w, const char* flag) {
    const auto idx = model.vocab().find(to_lower(w));
    if (!idx) throw Error(std::string(flag) + ": word '" + w + "' not in the vocabulary");
    const std::size_t one[] = {*idx};
    return model.encode(one);
  };
  const Vector q = unit_normalize(model.embed_image(features.get(a.image)));
  auto hits = analogy_query(q, unit_normalize(word_vector(a.minus, "--minus")),
                            unit_normalize(word_vector(a.plus, "--plus")), index, a.top, a.image);
  if (a.resort) hits = resort_by_mean(hits, index);
  std::string text;
  char buf[64];
  for (std::size_t i = 0; i < hits.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu\t", i + 1);
    text += buf + hits[i].id;
    std::snprintf(buf, sizeof buf, "\t%.6f\n", hits[i].score);
    text += buf;
  }
  emit(a.out, text);
  return 0;
}

int pca(const Args& a) {
  const JointModel model = load_encoder(a.model_in);
  std::vector<std::string> ids, kinds;
  std::vector<Vector> rows;
  if (!a.no_images) {
    if (a.features.empty()) throw Error("pca needs --features (or --no-images with --words)");
    const FeatureStore features = load_image_features(a.features);
    const auto embedded = embed_feature_set(model, features, features.ids());
    for (std::size_t i = 0; i < embedded.ids.size(); ++i) {
      ids.push_back(embedded.ids[i]);
      kinds.push_back("image");
      rows.push_back(unit_normalize(embedded.vectors.row(i)));
    }
  }
  std::stringstream list(a.words);
  for (std::string w; std::getline(list, w, ',');) {
    if (w.empty()) continue;
    const auto idx = model.vocab().find(to_lower(w));
    if (!idx) throw Error("--words: word '" + w + "' not in the vocabulary");
    const std::size_t one[] = {*idx};
    ids.push_back(w);
    kinds.push_back("word");
    rows.push_back(unit_normalize(model.encode(one)));
  }
  if (rows.empty()) throw Error("pca: nothing to project");
  Matrix m(rows.size(), model.dim());
  for (std::size_t i = 0; i < rows.size(); ++i) std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  const PcaResult r = pca_project(m, a.components);

  std::string text = "# explained_variance_ratio";
  for (double v : r.explained_variance_ratio) text += " " + format_double(v);
  text += "\nid\tkind";
  for (std::size_t c = 0; c < a.components; ++c) text += "\tpc" + std::to_string(c + 1);
  text += "\n";
  char buf[32];
  for (std::size_t i = 0; i < ids.size(); ++i) {
    text += ids[i] + "\t" + kinds[i];
    for (std::size_t c = 0; c < a.components; ++c) {
      std::snprintf(buf, sizeof buf, "\t%.6f", r.coordinates(i, c));
      text += buf;
    }
    text += "\n";
  }
  emit(a.out, text);
  return 0;
}

void randomize(ParamStore& params, SeededRng& rng) {
  for (auto& e : params.entries()) {
    for (double& v : e.value.values()) v = rng.uniform(-0.5, 0.5);
  }
}

int gradcheck(const Args& a) {
  constexpr double kBound = 1e-4;
  SeededRng rng(a.seed);
  std::vector<std::pair<std::string, GradientReport>> reports;

  {
    std::vector<std::string> tokens;
    for (int i = 0; i < 10; ++i) tokens.push_back("w" + std::to_string(i));
    Vocabulary vocab(tokens, uniform_matrix(10, 8, rng, 0.5));
    vocab.ensure_reserved(rng);
    JointModel model(vocab, 8, EncoderKind::kLstm, rng);
    randomize(model.params(), rng);
    FeatureStore features(8);
    std::vector<TrainingPair> batch;
    for (std::size_t i = 0; i < 3; ++i) {
      Vector f(8);
      for (double& v : f) v = rng.normal();
      features.add("i" + std::to_string(i), f);
      std::vector<std::size_t> toks;
      for (std::size_t t = 0; t < 2 + i; ++t) toks.push_back(rng.uniform_index(10));
      batch.push_back({"i" + std::to_string(i), toks});
    }
    LossFn fn = [&](ParamStore&, bool g) { return batch_loss_and_grad(model, batch, features, g); };
    reports.emplace_back("lstm_ranking", check_gradient(fn, model.params()));
  }

  const std::size_t vocab = 20, start = 19;
  TagSet tags(std::vector<std::string>{"DT", "NN", "VB"});
  std::vector<NlmExample> corpus(3);
  for (auto& ex : corpus) {
    for (int t = 0; t < 4; ++t) {
      ex.words.push_back(rng.uniform_index(start));
      ex.tags.push_back(1 + rng.uniform_index(3));
    }
    ex.cond.resize(8);
    for (double& v : ex.cond) v = rng.normal();
  }
  auto nll = [&](auto& model) {
    return [&](ParamStore&, bool g) {
      double total = 0.0;
      for (const auto& ex : corpus) total += sentence_nll(model, ex, g);
      return total;
    };
  };
  LblModel lbl = make_lbl(vocab, 8, 2, start, rng);
  randomize(lbl.params, rng);
  reports.emplace_back("lbl", check_gradient(nll(lbl), lbl.params));
  MnlmModel mnlm = make_mnlm(vocab, 8, 8, 5, 2, start, rng);
  randomize(mnlm.params, rng);
  reports.emplace_back("mnlm", check_gradient(nll(mnlm), mnlm.params));
  ScnlmModel sc = make_scnlm(ScnlmDims{vocab, 8, 8, 5, 8, 2, 2}, start, tags, rng);
  randomize(sc.params, rng);
  reports.emplace_back("scnlm", check_gradient(nll(sc), sc.params));

  bool ok = true;
  for (const auto& [name, r] : reports) {
    std::printf("%s\t%.3e\t%s[%zu]\n", name.c_str(), r.max_relative_error, r.worst_param.c_str(),
                r.worst_index);
    ok = ok && r.max_relative_error < kBound;
  }
  if (!ok) throw Error("gradient check failed: relative error above 1e-4");
  return 0;
}

// ---------------------------------------------------------------------------
// Command-line plumbing.

struct Subcommand {
  CLI::App* app;
  int (*handler)(const Args&);
  std::string* primary_output;
};

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::map<std::string, std::string> out;
  std::istringstream in(read_file(path));
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

bool flag_given(const std::vector<std::string>& args, const std::string& name) {
  const std::string flag = "--" + name;
  return std::any_of(args.begin(), args.end(), [&](const std::string& s) {
    return s == flag || s.rfind(flag + "=", 0) == 0;
  });
}

// Appends config-file settings for every option not given on the command line.
void merge_config(CLI::App& sub, std::vector<std::string>& args, const std::string& path) {
  for (const auto& [key, value] : read_config_file(path)) {
    if (key == "subcommand") {
      if (value != sub.get_name()) {
        throw Error(path + ": written for '" + value + "', not '" + sub.get_name() + "'");
      }
      continue;
    }
    CLI::Option* opt = sub.get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config") throw Error(path + ": unknown key '" + key + "'");
    if (flag_given(args, key)) continue;
    if (opt->get_expected_min() == 0) {
      if (value == "true") args.push_back("--" + key);
      else if (value != "false") throw Error(path + ": key '" + key + "' takes true or false");
      continue;
    }
    std::stringstream items(value);
    for (std::string item; std::getline(items, item, ',');) {
      args.push_back("--" + key);
      args.push_back(item);
    }
  }
}

std::string render_run_config(const CLI::App& sub) {
  std::string text = "# resolved capgen run configuration\nsubcommand=" + sub.get_name() + "\n";
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config") continue;
    std::string value;
    if (opt->get_expected_min() == 0) {
      value = opt->count() > 0 ? "true" : "false";
    } else if (opt->count() > 0) {
      for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
    } else {
      value = opt->get_default_str();
    }
    if (opt->count() == 0 && (value.empty() || value == "{}")) continue;
    text += name + "=" + value + "\n";
  }
  return text;
}

}  // namespace

int run(const std::vector<std::string>& raw_args) {
  Args a;
  CLI::App app{"capgen: joint image-sentence embeddings and caption generation"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  std::vector<Subcommand> subs;

  auto add_sub = [&](const char* name, const char* help, int (*handler)(const Args&),
                     std::string* primary_output) {
    CLI::App* s = app.add_subcommand(name, help);
    s->option_defaults()->always_capture_default();
    s->add_option("--seed", a.seed, "random seed");
    s->add_option("--config", "key=value file; command-line flags take precedence");
    subs.push_back({s, handler, primary_output});
    return s;
  };
  auto input = [](CLI::App* s, const char* flag, std::string& target, const char* help,
                  bool required) {
    auto* o = s->add_option(flag, target, help)->check(CLI::ExistingFile);
    if (required) o->required();
    return o;
  };

  {
    auto* s = add_sub("train-embed", "train the joint image-sentence embedding", train_embed, &a.model_out);
    input(s, "--captions", a.captions, "tagged caption TSV", true);
    input(s, "--features", a.features, "image feature file", true);
    input(s, "--embeddings", a.embeddings, "word2vec text embeddings", true);
    s->add_option("--model-out", a.model_out, "output archive")->required();
    s->add_option("--encoder", a.encoder, "sentence encoder")->check(CLI::IsMember({"lstm", "linear"}));
    s->add_option("--dim-k", a.embed_dim, "expected embedding dimension (0: from --embeddings)");
    s->add_option("--margin", a.margin, "ranking margin");
    s->add_option("--epochs", a.embed_epochs);
    s->add_option("--lr", a.embed_lr);
    s->add_option("--decay", a.embed_decay, "per-epoch learning-rate factor");
    s->add_option("--batch", a.batch, "minibatch size");
  }
  {
    auto* s = add_sub("train-scnlm", "train the structure-content language model", train_scnlm, &a.model_out);
    input(s, "--captions", a.captions, "tagged caption TSV", true);
    input(s, "--model-in", a.model_in, "joint embedding archive", true);
    input(s, "--features", a.features, "image features (with --source image)", false);
    s->add_option("--model-out", a.model_out, "output archive")->required();
    s->add_option("--source", a.source, "conditioning vectors")->check(CLI::IsMember({"text", "image"}));
    s->add_option("--dim-k", a.nlm_dim, "word representation size K");
    s->add_option("--dim-g", a.attr_dim, "attribute size G");
    s->add_option("--factors", a.factors, "factor count F");
    s->add_option("--context", a.context, "word context n-1");
    s->add_option("--forward", a.forward, "forward tag context k");
    s->add_option("--init-scale", a.init_scale, "uniform initialization half-width");
    s->add_option("--min-count", a.min_count, "minimum word frequency");
    s->add_option("--epochs", a.nlm_epochs);
    s->add_option("--lr", a.nlm_lr);
    s->add_option("--decay", a.nlm_decay);
  }
  {
    auto* s = add_sub("train-kn", "count the Kneser-Ney trigram model", train_kn, &a.model_out);
    input(s, "--captions", a.captions, "caption TSV", true);
    s->add_option("--model-out", a.model_out, "output archive")->required();
    s->add_option("--discount", a.discount);
  }
  {
    auto* s = add_sub("rank", "bidirectional retrieval table", rank, &a.out);
    input(s, "--captions", a.captions, "caption TSV", true);
    input(s, "--features", a.features, "image feature file", true);
    input(s, "--model-in", a.model_in, "joint embedding archive", true);
    s->add_option("--out", a.out, "TSV output (default stdout)");
  }
  {
    auto* s = add_sub("generate", "generate and rank captions", generate, &a.out);
    input(s, "--captions", a.captions, "training captions (templates, sentence index)", true);
    input(s, "--features", a.features, "image feature file", true);
    input(s, "--model-in", a.model_in, "joint embedding archive", true);
    input(s, "--scnlm-in", a.scnlm_in, "SC-NLM archive", true);
    input(s, "--kn-in", a.kn_in, "Kneser-Ney archive", true);
    input(s, "--stopwords", a.stopwords, "stopword list", false);
    s->add_option("--out", a.out, "TSV output (default stdout)");
    s->add_option("--report", a.report, "text report path");
    s->add_option("--image", a.images, "image ids (default: all)");
    s->add_option("--candidates", a.candidates);
    s->add_option("--top", a.top);
    s->add_option("--beam", a.beam);
    s->add_option("--concepts", a.concepts, "nearest words and sentences pooled");
    s->add_flag("--per-concept", a.per_concept, "also condition on each concept alone");
    s->add_option("--wt", a.wt, "translation weight");
    s->add_option("--wlm", a.wlm, "language-model weight");
    s->add_option("--gamma", a.gamma, "repetition penalty base");
  }
  {
    auto* s = add_sub("analogy", "image - word + word retrieval", analogy, &a.out);
    input(s, "--model-in", a.model_in, "joint embedding archive", true);
    input(s, "--features", a.features, "image feature file", true);
    s->add_option("--image", a.image, "query image id")->required();
    s->add_option("--minus", a.minus, "word to subtract")->required();
    s->add_option("--plus", a.plus, "word to add")->required();
    s->add_option("--top", a.top);
    s->add_flag("--resort", a.resort, "re-sort the top items by distance to their mean");
    s->add_flag("--force", a.force, "allow LSTM-encoder archives");
    s->add_option("--out", a.out, "output (default stdout)");
  }
  {
    auto* s = add_sub("pca", "2-D projection of images and words", pca, &a.out);
    input(s, "--model-in", a.model_in, "joint embedding archive", true);
    input(s, "--features", a.features, "image feature file", false);
    s->add_option("--words", a.words, "comma-separated words");
    s->add_flag("--no-images", a.no_images);
    s->add_option("--components", a.components);
    s->add_option("--out", a.out, "output (default stdout)");
  }
  add_sub("gradcheck", "finite-difference check of every model", gradcheck, nullptr);

  try {
    std::vector<std::string> args = raw_args;
    if (!args.empty()) {
      for (const auto& s : subs) {
        if (s.app->get_name() != args[0]) continue;
        for (std::size_t i = 1; i < args.size(); ++i) {
          std::string path;
          if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
          else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
          if (!path.empty()) merge_config(*s.app, args, path);
        }
      }
    }
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  for (const auto& s : subs) {
    if (!s.app->parsed()) continue;
    try {
      const int status = s.handler(a);
      if (s.primary_output != nullptr && !s.primary_output->empty() && *s.primary_output != "-") {
        write_file(*s.primary_output + ".runconfig", render_run_config(*s.app));
      }
      return status;
    } catch (const std::exception& e) {
      std::string msg = e.what();
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      std::cerr << "error: " << msg << "\n";
      return 1;
    }
  }
  return 1;
}

}  // namespace capgen::cli
