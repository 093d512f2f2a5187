#ifndef HLORA_DATA_HPP
#define HLORA_DATA_HPP

#include <cstdint>
#include <filesystem>
#include <vector>

#include "hlora/model.hpp"
#include "hlora/rng.hpp"

namespace hlora {
namespace data {

struct Dataset {
  Matrix features;  // N x input_dim
  std::vector<int> labels;
  int num_classes = 0;

  std::size_t size() const { return labels.size(); }
  /// Throws DimensionError on out-of-range labels, row/label mismatch or a missing class.
  void validate() const;
  /// Rows selected by `indices`, in order.
  Dataset subset(std::span<const std::size_t> indices) const;
};

/// Disjoint index lists into a parent Dataset, one per client.
struct Partition {
  std::vector<std::vector<std::size_t>> shards;

  std::vector<std::size_t> sizes() const;
  std::size_t total() const;
};

struct SyntheticSpec {
  std::size_t samples = 4000;
  Index input_dim = 32;
  Index hidden_dim = 32;  // 0 selects the single linear layer
  int num_classes = 8;
  Index true_rank = 4;
  double label_noise = 0.0;
  /// Frobenius size of each planted delta relative to its base weight.
  double delta_scale = 1.5;
};

struct Synthetic {
  Dataset dataset;
  /// Frozen base plus the planted low-rank deltas carried in its adapters.
  model::ToyModel planted;
};

Synthetic generate_synthetic(SeededRng& rng, const SyntheticSpec& spec);

/// Fresh samples labelled by an existing planted model.
Dataset draw_samples(const model::ToyModel& planted, SeededRng& rng, std::size_t count,
                     double label_noise);

Partition dirichlet_partition(const Dataset& dataset, std::size_t clients, double alpha,
                              std::size_t min_samples, SeededRng& rng, int max_retries = 50);

Partition iid_partition(const Dataset& dataset, std::size_t clients, SeededRng& rng);

/// Order-sensitive 64-bit fingerprint of one shard's index list.
std::uint64_t shard_hash(std::span<const std::size_t> shard);
std::uint64_t partition_hash(const Partition& p);

/// Mean over clients of the L1 distance between shard and global label distributions.
double label_skew(const Dataset& dataset, const Partition& p);

/// CSV with header `label,f0,f1,...`.
Dataset read_csv(const std::filesystem::path& path);
void write_csv(const Dataset& dataset, const std::filesystem::path& path);

}  // namespace data
}  // namespace hlora

#endif  // HLORA_DATA_HPP
