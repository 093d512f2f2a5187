#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <numeric>

#include "hlora/model.hpp"
#include "hlora/oracles.hpp"

using namespace hlora;

namespace {

model::ToyModel single_layer(Matrix w0, lora::Adapter adapter) {
  model::ToyModel m;
  m.layers.push_back({std::move(w0), std::move(adapter), model::Activation::identity});
  return m;
}

model::ToyModel random_two_layer(std::uint64_t seed, double adapter_std) {
  SeededRng rng(seed, stream_id("model-test"));
  const Index ranks[] = {3, 2};
  auto m = model::make_model(rng, 6, 5, 4, ranks);
  for (auto& layer : m.layers) {
    layer.adapter.b = linalg::random_gaussian(rng, layer.adapter.b.rows(), layer.adapter.b.cols(), adapter_std);
    layer.adapter.a = linalg::random_gaussian(rng, layer.adapter.a.rows(), layer.adapter.a.cols(), adapter_std);
  }
  return m;
}

model::Batch random_batch(std::uint64_t seed, Index n, Index dim, int classes) {
  SeededRng rng(seed, stream_id("batch"));
  model::Batch batch;
  batch.features = linalg::random_gaussian(rng, n, dim, 1.0);
  for (Index i = 0; i < n; ++i) {
    batch.labels.push_back(static_cast<int>(rng.uniform_int(0, classes - 1)));
  }
  return batch;
}

}  // namespace

TEST(Forward, ZeroWeightsGiveZeroLogits) {
  const auto m = single_layer(Matrix::Zero(3, 4), {Matrix::Zero(3, 1), Matrix::Zero(1, 4)});
  EXPECT_EQ(model::forward(m, Matrix::Ones(2, 4)), Matrix::Zero(2, 3));
}

TEST(Forward, IdentityLayerPassesFeatures) {
  const auto m = single_layer(Matrix::Identity(3, 3), {Matrix::Zero(3, 1), Matrix::Zero(1, 3)});
  SeededRng rng(1, 0);
  const Matrix x = linalg::random_gaussian(rng, 5, 3, 1.0);
  EXPECT_EQ(model::forward(m, x), x);
}

TEST(Forward, AdapterExample) {
  const auto m = single_layer(Matrix::Zero(2, 2), {(Matrix(2, 1) << 1, 0).finished(),
                                                  (Matrix(1, 2) << 1, 0).finished()});
  const Matrix x = (Matrix(1, 2) << 1, 0).finished();
  EXPECT_EQ(model::forward(m, x), (Matrix(1, 2) << 1, 0).finished());
}

TEST(Forward, MatchesLoopOracle) {
  const auto m = random_two_layer(2, 0.3);
  const auto batch = random_batch(2, 9, 6, 4);
  const auto dense = model::to_dense(m);
  EXPECT_LE((model::forward(m, batch.features) -
             oracles::naive_forward(dense.weights, dense.activations, batch.features))
                .cwiseAbs()
                .maxCoeff(),
            1e-12);
}

TEST(Forward, WrongFeatureWidth) {
  const auto m = random_two_layer(3, 0.1);
  EXPECT_THROW(model::forward(m, Matrix::Zero(2, 5)), DimensionError);
}

TEST(Loss, UniformLogitsGiveLogC) {
  const std::vector<int> labels{0, 3, 1};
  EXPECT_NEAR(model::loss(Matrix::Zero(3, 5), labels), std::log(5.0), 1e-15);
}

TEST(Loss, SaturatedLogit) {
  Matrix logits = Matrix::Zero(1, 4);
  logits(0, 2) = 20.0;
  const std::vector<int> labels{2};
  EXPECT_LT(model::loss(logits, labels), 1e-6);
}

TEST(Loss, MatchesLogSumExpOracleAndIsStable) {
  SeededRng rng(4, 0);
  const Matrix logits = linalg::random_gaussian(rng, 6, 5, 300.0);
  const std::vector<int> labels{0, 1, 2, 3, 4, 0};
  const double value = model::loss(logits, labels);
  EXPECT_TRUE(std::isfinite(value));
  EXPECT_NEAR(value, oracles::lse_cross_entropy(logits, labels), 1e-9 * std::abs(value));
}

TEST(Backward, MatchesCentralDifferences) {
  for (std::uint64_t point = 0; point < 10; ++point) {
    const auto m = random_two_layer(100 + point, 0.5);
    const auto batch = random_batch(100 + point, 8, 6, 4);
    const auto check = oracles::finite_difference_check(m, batch, model::backward(m, batch), 1e-5, 1e-8);
    EXPECT_GT(check.entries, 0u);
    EXPECT_LE(check.max_relative_error, 1e-6) << "point " << point;
  }
}

TEST(Backward, SingleLayerMatchesCentralDifferences) {
  SeededRng rng(5, 0);
  const auto m = single_layer(linalg::random_gaussian(rng, 3, 4, 1.0),
                              {linalg::random_gaussian(rng, 3, 2, 0.5), linalg::random_gaussian(rng, 2, 4, 0.5)});
  const auto batch = random_batch(5, 7, 4, 3);
  const auto check = oracles::finite_difference_check(m, batch, model::backward(m, batch), 1e-5, 1e-8);
  EXPECT_LE(check.max_relative_error, 1e-6);
}

TEST(Backward, DeadUnitHasZeroGradient) {
  auto m = random_two_layer(6, 0.3);
  // Hidden unit 0 never fires: its base row is hugely negative along a
  // constant positive input, and its adapter row contributes nothing.
  model::Batch batch;
  batch.features = Matrix::Ones(4, 6);
  batch.labels = {0, 1, 2, 3};
  m.layers[0].w0.row(0).setConstant(-100.0);
  m.layers[0].adapter.b.row(0).setZero();
  const auto grads = model::backward(m, batch);
  EXPECT_EQ(grads[0].d_b.row(0).norm(), 0.0);
  EXPECT_GT(grads[0].d_b.norm(), 0.0);
}

TEST(LocalTrain, ZeroLearningRateKeepsAdapters) {
  const auto m = random_two_layer(7, 0.2);
  const auto batch = random_batch(7, 40, 6, 4);
  std::vector<std::size_t> idx(40);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  SeededRng rng(7, 1);
  const auto out = model::local_train(m, {batch.features, batch.labels, idx}, {0.0, 2, 8}, rng);
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    EXPECT_EQ(out.model.layers[l].adapter.b, m.layers[l].adapter.b);
    EXPECT_EQ(out.model.layers[l].adapter.a, m.layers[l].adapter.a);
  }
}

TEST(LocalTrain, DeterministicAndFrozenBase) {
  const auto m = random_two_layer(8, 0.2);
  const auto batch = random_batch(8, 50, 6, 4);
  std::vector<std::size_t> idx(50);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  SeededRng r1(8, 1);
  SeededRng r2(8, 1);
  const auto a = model::local_train(m, {batch.features, batch.labels, idx}, {0.1, 3, 8}, r1);
  const auto b = model::local_train(m, {batch.features, batch.labels, idx}, {0.1, 3, 8}, r2);
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    EXPECT_EQ(a.model.layers[l].adapter.b, b.model.layers[l].adapter.b);
    EXPECT_EQ(a.model.layers[l].adapter.a, b.model.layers[l].adapter.a);
    const auto& before = m.layers[l].w0;
    const auto& after = a.model.layers[l].w0;
    EXPECT_EQ(std::memcmp(before.data(), after.data(), sizeof(double) * before.size()), 0);
    EXPECT_NE(a.model.layers[l].adapter.a, m.layers[l].adapter.a);
  }
  EXPECT_EQ(a.epoch_losses.size(), 3u);
}

TEST(LocalTrain, UpdateRankBoundedByAdapterRank) {
  const auto m = random_two_layer(9, 0.2);
  const auto batch = random_batch(9, 64, 6, 4);
  std::vector<std::size_t> idx(64);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  SeededRng rng(9, 1);
  const auto out = model::local_train(m, {batch.features, batch.labels, idx}, {0.2, 4, 8}, rng);
  for (const auto& layer : out.model.layers) {
    EXPECT_LE(linalg::numerical_rank(linalg::svd(lora::merge(layer.adapter)), 1e-10), layer.adapter.rank());
  }
}

TEST(LocalTrain, LossDecreasesOnSeparableData) {
  int monotone = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SeededRng rng(seed, stream_id("separable"));
    const Matrix x = linalg::random_gaussian(rng, 64, 4, 1.0);
    std::vector<int> labels;
    for (Index i = 0; i < x.rows(); ++i) {
      labels.push_back(x(i, 0) + 0.5 * x(i, 1) > 0.0 ? 1 : 0);
    }
    std::vector<std::size_t> idx(64);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const Index ranks[] = {1};
    const auto m = model::make_model(rng, 4, 0, 2, ranks);
    const auto out = model::local_train(m, {x, labels, idx}, {0.1, 5, 16}, rng);
    bool ok = true;
    for (std::size_t e = 1; e < out.epoch_losses.size(); ++e) {
      ok = ok && out.epoch_losses[e] < out.epoch_losses[e - 1];
    }
    monotone += ok ? 1 : 0;
  }
  EXPECT_GE(monotone, 18);
}

TEST(LocalTrain, EmptyShardThrows) {
  const auto m = random_two_layer(10, 0.1);
  const Matrix x = Matrix::Zero(3, 6);
  const std::vector<int> labels{0, 1, 2};
  const std::vector<std::size_t> none;
  SeededRng rng(10, 0);
  EXPECT_THROW(model::local_train(m, {x, labels, none}, {}, rng), DimensionError);
}

TEST(TrainSettings, Validate) {
  EXPECT_THROW((model::TrainSettings{-1.0, 2, 16}.validate()), ConfigError);
  EXPECT_THROW((model::TrainSettings{0.1, 0, 16}.validate()), ConfigError);
  EXPECT_THROW((model::TrainSettings{0.1, 2, 0}.validate()), ConfigError);
}

TEST(ToyModel, ValidateCatchesBrokenChaining) {
  auto m = random_two_layer(11, 0.1);
  EXPECT_NO_THROW(m.validate());
  m.layers[1].w0 = Matrix::Zero(4, 7);
  EXPECT_THROW(m.validate(), DimensionError);
}
