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

#include "capgen/joint_embedding.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "fixtures.h"

namespace capgen {
namespace {

Matrix random_matrix(std::size_t r, std::size_t c, SeededRng& rng) {
  Matrix m(r, c);
  for (double& v : m.values()) v = rng.normal();
  return m;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

// Every hinge term spelled out.
double brute_loss(const Matrix& x, const Matrix& v, double alpha) {
  double l = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t k = 0; k < x.rows(); ++k) {
      if (k == i) continue;
      l += std::max(0.0, alpha - cosine(x.row(i), v.row(i)) + cosine(x.row(i), v.row(k)));
      l += std::max(0.0, alpha - cosine(v.row(i), x.row(i)) + cosine(v.row(i), x.row(k)));
    }
  return l;
}

TEST(EmbedImage, ProjectionCases) {
  const std::vector<double> q = {1.5, -2, 0.25};
  EXPECT_EQ(embed_image(q, Matrix::identity(3)), (Vector{1.5, -2, 0.25}));
  EXPECT_EQ(embed_image(std::vector<double>(3, 0.0), Matrix(2, 3, 1.0)), (Vector{0, 0}));
  SeededRng rng(1);
  const Matrix w = random_matrix(3, 5, rng);
  const std::vector<double> f = {0.5, -1, 2, 0, 3};
  const Vector x = embed_image(f, w);
  for (std::size_t i = 0; i < 3; ++i) {
    const double want = w(i, 0) * 0.5 - w(i, 1) + 2 * w(i, 2) + 3 * w(i, 4);
    EXPECT_NEAR(x[i], want, 1e-12);
  }
  EXPECT_THROW(embed_image(std::vector<double>(4), w), Error);
}

TEST(Score, CosineIdentities) {
  const std::vector<double> v = {0.3, -1, 2}, neg = {-0.3, 1, -2}, x = {1, 1, 0};
  EXPECT_NEAR(score(v, v), 1.0, 1e-15);
  EXPECT_NEAR(score(v, neg), -1.0, 1e-15);
  const std::vector<double> x7 = {7, 7, 0};
  EXPECT_NEAR(score(x7, v), score(x, v), 1e-15);
  EXPECT_THROW(score(std::vector<double>(3, 0.0), v), Error);
}

TEST(RankingLoss, ZeroWhenMarginsAreMet) {
  // Rows are +-e_i: matching pairs score 1, the rest 0 or -1.
  const Matrix x(2, 2, std::vector<double>{1, 0, -1, 0});
  const Matrix v = x;
  EXPECT_EQ(ranking_loss(x, v, 0.2).loss, 0.0);
}

TEST(RankingLoss, AllScoresEqualGivesFourAlpha) {
  const Matrix x(2, 3, 1.0), v(2, 3, 1.0);
  EXPECT_NEAR(ranking_loss(x, v, 0.2).loss, 0.8, 1e-12);
  EXPECT_NEAR(ranking_loss(x, v, 0.35).loss, 1.4, 1e-12);
}

TEST(RankingLoss, MatchesBruteForceAndIsNonNegative) {
  SeededRng rng(2);
  for (int t = 0; t < 50; ++t) {
    const std::size_t b = 2 + rng.uniform_index(5);
    const Matrix x = random_matrix(b, 4, rng), v = random_matrix(b, 4, rng);
    const double l = ranking_loss(x, v, 0.2).loss;
    EXPECT_NEAR(l, brute_loss(x, v, 0.2), 1e-12);
    EXPECT_GE(l, 0.0);
  }
}

TEST(RankingLoss, ScaleInvariant) {
  SeededRng rng(3);
  const Matrix x = random_matrix(4, 5, rng), v = random_matrix(4, 5, rng);
  Matrix scaled = x;
  for (std::size_t c = 0; c < 5; ++c) scaled(2, c) *= 13.0;
  EXPECT_NEAR(ranking_loss(x, v, 0.2).loss, ranking_loss(scaled, v, 0.2).loss, 1e-12);
}

TEST(RankingLoss, GroupsAreNeverContrasted) {
  SeededRng rng(4);
  const Matrix x = random_matrix(3, 4, rng), v = random_matrix(3, 4, rng);
  const std::vector<std::size_t> groups = {0, 0, 1};
  // Only pairs (i,k) across groups contribute.
  double want = 0.0;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < 3; ++k) {
      if (groups[i] == groups[k]) continue;
      want += std::max(0.0, 0.2 - cosine(x.row(i), v.row(i)) + cosine(x.row(i), v.row(k)));
      want += std::max(0.0, 0.2 - cosine(v.row(i), x.row(i)) + cosine(v.row(i), x.row(k)));
    }
  EXPECT_NEAR(ranking_loss(x, v, 0.2, groups).loss, want, 1e-12);
}

TEST(RankingLoss, RejectsDegenerateBatches) {
  EXPECT_THROW(ranking_loss(Matrix(1, 3, 1.0), Matrix(1, 3, 1.0), 0.2), Error);
  EXPECT_THROW(ranking_loss(Matrix(2, 3, 1.0), Matrix(3, 3, 1.0), 0.2), Error);
}

TEST(LinearEncode, SumOfRows) {
  const Matrix t(3, 2, std::vector<double>{1, 2, 10, 20, 100, 200});
  EXPECT_EQ(linear_encode(std::vector<std::size_t>{1}, t), (Vector{10, 20}));
  EXPECT_EQ(linear_encode(std::vector<std::size_t>{0, 2}, t), (Vector{101, 202}));
  EXPECT_EQ(linear_encode(std::vector<std::size_t>{2, 0}, t), (Vector{101, 202}));
  EXPECT_THROW(linear_encode(std::vector<std::size_t>{}, t), Error);
}

void scramble(ParamStore& store, SeededRng& rng) {
  for (auto& e : store.entries())
    for (double& v : store.value(store.id(e.name)).values()) v = rng.uniform(-0.5, 0.5);
}

TEST(JointModel, FullCompositePassesGradientCheck) {
  for (EncoderKind kind : {EncoderKind::kLstm, EncoderKind::kLinear}) {
    auto world = testing::overfit_world(3, 8, 8, 5);
    SeededRng rng(6);
    JointModel model(world.vocab, 8, kind, rng);
    scramble(model.params(), rng);
    const auto pairs = make_pairs(world.records);
    LossFn loss = [&](ParamStore&, bool g) {
      return batch_loss_and_grad(model, pairs, world.features, g);
    };
    EXPECT_LT(check_gradient(loss, model.params()).max_relative_error, 1e-4) << to_string(kind);
  }
}

TEST(JointModel, SaveLoadPreservesEncodings) {
  for (EncoderKind kind : {EncoderKind::kLstm, EncoderKind::kLinear}) {
    auto world = testing::overfit_world(4, 6, 5, 7);
    SeededRng rng(8);
    JointModel model(world.vocab, 5, kind, rng, 0.3);
    Archive a;
    model.save(a);
    const JointModel back = JointModel::load(Archive::parse(a.serialize()));
    EXPECT_EQ(back.kind(), kind);
    EXPECT_EQ(back.margin(), 0.3);
    const auto& rec = world.records[1];
    EXPECT_EQ(back.encode(rec.ids), model.encode(rec.ids));
    const auto f = world.features.get(rec.image_id);
    EXPECT_EQ(back.embed_image(f), model.embed_image(f));
  }
}

TEST(JointModel, LstmKeepsWordTableFixed) {
  auto world = testing::overfit_world(10, 8, 8, 9);
  SeededRng rng(10);
  JointModel model(world.vocab, 8, EncoderKind::kLstm, rng);
  const Matrix before = model.word_table();
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 5;
  train_embedding(make_pairs(world.records), world.features, model, cfg);
  EXPECT_EQ(model.word_table(), before);
  EXPECT_FALSE(model.params().contains("W_T"));
}

TEST(TrainEmbedding, ErrorsOnSinglePairAndMissingFeature) {
  auto world = testing::overfit_world(3, 4, 4, 11);
  SeededRng rng(12);
  JointModel model(world.vocab, 4, EncoderKind::kLinear, rng);
  auto pairs = make_pairs(world.records);
  TrainConfig cfg;
  cfg.epochs = 1;
  EXPECT_THROW(train_embedding({pairs[0]}, world.features, model, cfg), Error);
  pairs[1].image_id = "ghost";
  try {
    train_embedding(pairs, world.features, model, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos) << e.what();
  }
}

std::vector<EpochLog> run(std::uint64_t seed, std::size_t epochs) {
  auto world = testing::overfit_world(50, 16, 16, 13);
  SeededRng rng(14);
  JointModel model(world.vocab, 16, EncoderKind::kLstm, rng);
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.batch_size = 10;
  cfg.seed = seed;
  return train_embedding(make_pairs(world.records), world.features, model, cfg);
}

TEST(TrainEmbedding, LossDoesNotRiseAndIsDeterministic) {
  const auto a = run(15, 5), b = run(15, 5);
  ASSERT_EQ(a.size(), 5u);
  for (std::size_t e = 0; e < a.size(); ++e) {
    EXPECT_EQ(a[e].mean_loss, b[e].mean_loss);
    if (e > 0) {
      EXPECT_LE(a[e].mean_loss, a[e - 1].mean_loss * 1.05);
    }
  }
  EXPECT_LT(a.back().mean_loss, a.front().mean_loss);
  EXPECT_NEAR(a[1].learning_rate, a[0].learning_rate * 0.99, 1e-15);
}

TEST(TrainEmbedding, ZeroEpochsLeavesParametersAlone) {
  auto world = testing::overfit_world(6, 4, 4, 16);
  SeededRng rng(17);
  JointModel model(world.vocab, 4, EncoderKind::kLinear, rng);
  const Matrix before = model.params().value(model.image_projection());
  TrainConfig cfg;
  cfg.epochs = 0;
  EXPECT_TRUE(train_embedding(make_pairs(world.records), world.features, model, cfg).empty());
  EXPECT_EQ(model.params().value(model.image_projection()), before);
}

}  // namespace
}  // namespace capgen
