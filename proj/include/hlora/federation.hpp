#ifndef HLORA_FEDERATION_HPP
#define HLORA_FEDERATION_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hlora/data.hpp"
#include "hlora/lora.hpp"
#include "hlora/metrics.hpp"
#include "hlora/model.hpp"

namespace hlora {
namespace federation {

enum class Strategy { naive, hlora_homogeneous, hlora_heterogeneous };

std::string_view to_string(Strategy s);
/// Throws ConfigError for unknown names.
Strategy parse_strategy(std::string_view name);

struct RankPolicy {
  enum class Kind { homogeneous, random_uniform };
  Kind kind = Kind::homogeneous;
  Index rank_min = 8;
  Index rank_max = 8;

  static RankPolicy homogeneous(Index r) { return {Kind::homogeneous, r, r}; }
  static RankPolicy random_uniform(Index lo, Index hi) { return {Kind::random_uniform, lo, hi}; }
};

/// One rank per client, fixed for the run. `max_rank` is the smallest
/// min(d, k) over adapted layers.
std::vector<Index> assign_ranks(const RankPolicy& policy, std::size_t clients, SeededRng& rng,
                                Index max_rank);

/// m distinct clients out of K, ascending.
std::vector<std::size_t> sample_clients(std::size_t clients, std::size_t sampled, SeededRng& rng);

struct AggregationWeights {
  std::vector<double> values;
};

/// eta_k = n_k / sum of n over the sampled cohort.
AggregationWeights compute_weights(std::span<const std::size_t> sample_counts);

/// Independent averaging of B and A factors. Requires one shared rank.
lora::Adapter aggregate_naive(std::span<const lora::Adapter> adapters,
                              const AggregationWeights& weights);

/// W' = sum_k eta_k B_k A_k. Ranks may differ; update shapes must not.
Matrix aggregate_hlora(std::span<const lora::Adapter> adapters, const AggregationWeights& weights);

/// || (sum eta B)(sum eta A) - sum eta B A ||_F for uniform-rank adapters.
double bias_gap(std::span<const lora::Adapter> adapters, const AggregationWeights& weights);

/// Re-factorizes one layer's aggregate: a single SVD, then a rank-r_k
/// truncation per client with b = U_r and a = Sigma_r Vt_r.
std::vector<lora::Adapter> distribute(const Matrix& update, std::span<const Index> ranks);

struct ClientConfig {
  std::size_t id = 0;
  /// Rank per adapted layer.
  std::vector<Index> ranks;
  std::vector<std::size_t> shard;

  std::size_t samples() const { return shard.size(); }
};

struct ServerState {
  std::vector<Matrix> base;
  std::vector<model::Activation> activations;
  /// Aggregated update per layer (naive: B'A').
  std::vector<Matrix> global_update;
  /// Naive: the global (B', A') pair. HLoRA: the shared starting factors,
  /// used only until the first aggregation produces an update.
  std::vector<lora::Adapter> global_factors;
  /// True once global_update came from aggregation or a warm start.
  bool has_update = false;
  std::int64_t round = 0;

  model::DenseModel global_model() const;
  std::size_t layers() const { return base.size(); }
};

/// Zero update; starting factors b = 0, a ~ N(0, init_std^2) at `init_ranks`.
/// Each layer draws from its own stream so ranks do not shift other layers.
ServerState initial_state(const model::ToyModel& base, std::span<const Index> init_ranks,
                          std::uint64_t seed, double init_std);

/// Replaces the update with a given one, as if a previous round produced it.
ServerState warm_start(ServerState state, std::vector<Matrix> update);

struct Federation {
  const data::Dataset& train;
  const data::Dataset& test;
  std::vector<ClientConfig> clients;
  model::TrainSettings settings;
  std::size_t sampled_per_round = 1;
  std::uint64_t seed = 0;
  int threads = 1;
  bool record_time = false;
};

struct ClientUpload {
  std::size_t client = 0;
  std::size_t samples = 0;
  std::vector<lora::Adapter> adapters;
  double final_loss = 0.0;
};

struct RoundOutcome {
  ServerState state;
  metrics::RoundReport report;
  std::vector<ClientUpload> uploads;
  AggregationWeights weights;
};

/// Factors client `client` starts from this round, one adapter per layer.
std::vector<lora::Adapter> starting_factors(const ServerState& state, Strategy strategy,
                                            const ClientConfig& client);

RoundOutcome run_round(const ServerState& state, Strategy strategy, const Federation& fed);

struct ExperimentSettings {
  std::uint64_t seed = 0;
  Strategy strategy = Strategy::hlora_heterogeneous;
  std::size_t clients = 100;
  std::size_t sampled_per_round = 20;
  int rounds = 50;
  Index rank = 8;
  Index rank_min = 2;
  Index rank_max = 8;
  /// Optional per-layer ceiling on client ranks.
  std::vector<Index> layer_rank_caps;
  data::SyntheticSpec synthetic;
  std::size_t test_samples = 2000;
  bool iid = false;
  double alpha = 0.3;
  /// 0 selects batch_size.
  std::size_t min_samples = 0;
  std::filesystem::path import_path;
  model::TrainSettings train;
  double init_std = 0.02;
  /// 0 selects the midpoint between the accuracy ceiling and 1/C.
  double target_accuracy = 0.0;
  int threads = 1;
  bool record_time = false;
};

struct ExperimentResult {
  metrics::History history;
  metrics::RoundReport initial;
  double ceiling = 1.0;
  double target_accuracy = 0.0;
  std::uint64_t partition_fingerprint = 0;
  std::vector<Index> client_ranks;
};

/// Data, partition, client ranks and the round-0 server state for a run.
/// Strategy only affects rank assignment and the starting factors, so two
/// strategies under one seed share data and partition.
struct PreparedExperiment {
  data::Dataset train;
  data::Dataset test;
  std::vector<ClientConfig> clients;
  ServerState state;
  double ceiling = 1.0;
  double target_accuracy = 0.0;
  std::uint64_t partition_fingerprint = 0;
  std::vector<Index> client_ranks;

  /// Refers to train/test; the prepared value must outlive it.
  Federation federation(const ExperimentSettings& s) const;
};

PreparedExperiment prepare_experiment(const ExperimentSettings& s);

/// Layer shapes (out, in) implied by the settings.
std::vector<std::pair<Index, Index>> layer_shapes(const ExperimentSettings& s);

/// Throws ConfigError naming the field for infeasible settings.
void validate(const ExperimentSettings& s);

ExperimentResult run_experiment(const ExperimentSettings& s);

namespace testing {
/// Adds `offset` to entry (0, 0) of every aggregate_hlora result. For
/// mutation checks of the verification suites only.
void set_hlora_fault(double offset);
double hlora_fault();
}  // namespace testing

}  // namespace federation
}  // namespace hlora

#endif  // HLORA_FEDERATION_HPP
