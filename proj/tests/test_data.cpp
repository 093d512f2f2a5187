#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "hlora/data.hpp"
#include "hlora/metrics.hpp"

using namespace hlora;

namespace {

data::Dataset labels_only(std::size_t n, int classes, std::uint64_t seed) {
  data::Dataset d;
  d.num_classes = classes;
  d.features = Matrix::Zero(static_cast<Index>(n), 1);
  SeededRng rng(seed, stream_id("labels"));
  for (std::size_t i = 0; i < n; ++i) {
    d.labels.push_back(static_cast<int>(rng.uniform_int(0, classes - 1)));
  }
  return d;
}

void expect_cover(const data::Partition& p, std::size_t n) {
  std::vector<int> seen(n, 0);
  for (const auto& shard : p.shards) {
    for (const auto i : shard) {
      ASSERT_LT(i, n);
      ++seen[i];
    }
  }
  for (const int v : seen) {
    ASSERT_EQ(v, 1);
  }
  EXPECT_EQ(p.total(), n);
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("hlora_test_" + name);
}

}  // namespace

TEST(Synthetic, PlantedModelIsPerfectWithoutNoise) {
  SeededRng rng(1, 0);
  data::SyntheticSpec spec;
  spec.samples = 2000;
  const auto syn = data::generate_synthetic(rng, spec);
  EXPECT_EQ(metrics::evaluate(model::to_dense(syn.planted), syn.dataset).accuracy, 1.0);
  for (const auto& layer : syn.planted.layers) {
    EXPECT_EQ(layer.adapter.rank(), spec.true_rank);
  }
}

TEST(Synthetic, LabelNoiseMatchesBinomialRange) {
  SeededRng rng(2, 0);
  data::SyntheticSpec spec;
  spec.samples = 10000;
  spec.label_noise = 0.1;
  const auto syn = data::generate_synthetic(rng, spec);
  const double acc = metrics::evaluate(model::to_dense(syn.planted), syn.dataset).accuracy;
  EXPECT_GE(acc, 0.88);
  EXPECT_LE(acc, 0.92);
}

TEST(Synthetic, Deterministic) {
  data::SyntheticSpec spec;
  spec.samples = 500;
  SeededRng a(3, 0);
  SeededRng b(3, 0);
  const auto x = data::generate_synthetic(a, spec);
  const auto y = data::generate_synthetic(b, spec);
  EXPECT_EQ(x.dataset.features, y.dataset.features);
  EXPECT_EQ(x.dataset.labels, y.dataset.labels);
}

TEST(Synthetic, EveryClassRepresented) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SeededRng rng(seed, 0);
    data::SyntheticSpec spec;
    spec.samples = 4000;
    const auto syn = data::generate_synthetic(rng, spec);
    std::vector<int> counts(8, 0);
    for (const int y : syn.dataset.labels) {
      ++counts[static_cast<std::size_t>(y)];
    }
    for (const int c : counts) {
      EXPECT_GE(c, 100) << "seed " << seed;
    }
  }
}

TEST(Synthetic, InfeasibleTrueRank) {
  SeededRng rng(4, 0);
  data::SyntheticSpec spec;
  spec.true_rank = 9;
  EXPECT_THROW(data::generate_synthetic(rng, spec), ConfigError);
  spec.true_rank = 2;
  spec.label_noise = 0.5;
  EXPECT_THROW(data::generate_synthetic(rng, spec), ConfigError);
}

TEST(Dirichlet, SingleClientGetsEverything) {
  const auto d = labels_only(300, 3, 5);
  SeededRng rng(5, 0);
  const auto p = data::dirichlet_partition(d, 1, 0.3, 1, rng);
  ASSERT_EQ(p.shards.size(), 1u);
  EXPECT_EQ(p.shards[0].size(), 300u);
}

TEST(Dirichlet, CoverAndMinimumAcrossGrid) {
  const auto d = labels_only(4000, 8, 6);
  for (const std::size_t k : {std::size_t{2}, std::size_t{10}, std::size_t{100}}) {
    for (const double alpha : {0.1, 0.3, 1.0, 1000.0}) {
      SeededRng rng(6, k);
      const auto p = data::dirichlet_partition(d, k, alpha, 16, rng);
      expect_cover(p, d.size());
      for (const auto& shard : p.shards) {
        EXPECT_GE(shard.size(), 16u);
      }
    }
  }
}

TEST(Dirichlet, LargeAlphaTracksGlobalProportions) {
  const auto d = labels_only(10000, 4, 7);
  SeededRng rng(7, 0);
  const auto p = data::dirichlet_partition(d, 10, 1000.0, 1, rng);
  std::vector<double> global(4, 0.0);
  for (const int y : d.labels) {
    global[static_cast<std::size_t>(y)] += 1.0 / 10000.0;
  }
  for (const auto& shard : p.shards) {
    std::vector<double> local(4, 0.0);
    for (const auto i : shard) {
      local[static_cast<std::size_t>(d.labels[i])] += 1.0 / static_cast<double>(shard.size());
    }
    for (std::size_t c = 0; c < 4; ++c) {
      EXPECT_NEAR(local[c], global[c], 0.05);
    }
  }
}

TEST(Dirichlet, SkewFallsAsAlphaGrows) {
  const auto d = labels_only(4000, 8, 8);
  double previous = 1e9;
  for (const double alpha : {0.1, 0.3, 1.0, 1000.0}) {
    double skew = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      SeededRng rng(seed, 1);
      skew += data::label_skew(d, data::dirichlet_partition(d, 10, alpha, 16, rng));
    }
    EXPECT_LT(skew, previous) << "alpha " << alpha;
    previous = skew;
  }
}

TEST(Dirichlet, DeterministicForSameArguments) {
  const auto d = labels_only(1000, 5, 9);
  SeededRng a(9, 3);
  SeededRng b(9, 3);
  const auto x = data::dirichlet_partition(d, 10, 0.3, 8, a);
  const auto y = data::dirichlet_partition(d, 10, 0.3, 8, b);
  EXPECT_EQ(x.shards, y.shards);
  EXPECT_EQ(data::partition_hash(x), data::partition_hash(y));
}

TEST(Dirichlet, Infeasible) {
  const auto d = labels_only(100, 2, 10);
  SeededRng rng(10, 0);
  EXPECT_THROW(data::dirichlet_partition(d, 20, 0.3, 16, rng), ConfigError);
  EXPECT_THROW(data::dirichlet_partition(d, 2, 0.0, 1, rng), ConfigError);
}

TEST(Iid, BalancedShards) {
  const auto d = labels_only(103, 3, 11);
  SeededRng rng(11, 0);
  const auto p = data::iid_partition(d, 10, rng);
  expect_cover(p, d.size());
  std::size_t lo = 1000;
  std::size_t hi = 0;
  for (const auto& shard : p.shards) {
    lo = std::min(lo, shard.size());
    hi = std::max(hi, shard.size());
  }
  EXPECT_LE(hi - lo, 1u);
}

TEST(Iid, TwoByFour) {
  data::Dataset d;
  d.num_classes = 2;
  d.features = Matrix::Zero(4, 1);
  d.labels = {0, 1, 0, 1};
  SeededRng rng(12, 0);
  const auto p = data::iid_partition(d, 2, rng);
  EXPECT_EQ(p.shards[0].size(), 2u);
  EXPECT_EQ(p.shards[1].size(), 2u);
  EXPECT_THROW(data::iid_partition(d, 5, rng), ConfigError);
}

TEST(ShardHash, OrderSensitive) {
  const std::vector<std::size_t> a{1, 2, 3};
  const std::vector<std::size_t> b{1, 3, 2};
  EXPECT_NE(data::shard_hash(a), data::shard_hash(b));
  EXPECT_EQ(data::shard_hash(a), data::shard_hash(a));
}

TEST(DatasetCsv, RoundTrip) {
  SeededRng rng(13, 0);
  data::SyntheticSpec spec;
  spec.samples = 200;
  spec.input_dim = 5;
  spec.hidden_dim = 0;
  spec.num_classes = 3;
  spec.true_rank = 2;
  const auto d = data::generate_synthetic(rng, spec).dataset;
  const auto path = temp_file("dataset.csv");
  data::write_csv(d, path);
  const auto back = data::read_csv(path);
  EXPECT_EQ(back.features, d.features);
  EXPECT_EQ(back.labels, d.labels);
  EXPECT_EQ(back.num_classes, 3);
  std::filesystem::remove(path);
}

TEST(DatasetCsv, RejectsBadHeader) {
  const auto path = temp_file("bad.csv");
  std::ofstream(path) << "y,f0\n0,1.0\n";
  EXPECT_THROW(data::read_csv(path), ConfigError);
  std::filesystem::remove(path);
}

TEST(Dataset, ValidateAndSubset) {
  data::Dataset d;
  d.num_classes = 2;
  d.features = (Matrix(3, 1) << 1, 2, 3).finished();
  d.labels = {0, 1, 1};
  EXPECT_NO_THROW(d.validate());
  const std::vector<std::size_t> pick{2, 0};
  const auto s = d.subset(pick);
  EXPECT_EQ(s.labels, (std::vector<int>{1, 0}));
  EXPECT_EQ(s.features(0, 0), 3.0);
  d.labels[1] = 2;
  EXPECT_THROW(d.validate(), DimensionError);
}
