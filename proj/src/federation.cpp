#include "hlora/federation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

namespace hlora {
namespace federation {

namespace {

std::atomic<double> g_hlora_fault{0.0};

void check_same_shape(std::span<const lora::Adapter> adapters, const char* who) {
  if (adapters.empty()) {
    throw DimensionError(std::string(who) + ": no client adapters");
  }
  for (const auto& a : adapters) {
    if (a.rows() != adapters[0].rows() || a.cols() != adapters[0].cols()) {
      std::ostringstream os;
      os << who << ": update shapes differ (" << a.rows() << "x" << a.cols() << " vs "
         << adapters[0].rows() << "x" << adapters[0].cols() << ")";
      throw DimensionError(os.str());
    }
  }
}

void check_uniform_rank(std::span<const lora::Adapter> adapters, const char* who) {
  for (const auto& a : adapters) {
    if (a.rank() != adapters[0].rank()) {
      std::ostringstream os;
      os << who << ": naive factor averaging needs one shared rank, got " << adapters[0].rank()
         << " and " << a.rank();
      throw DimensionError(os.str());
    }
  }
}

void check_weights(std::span<const lora::Adapter> adapters, const AggregationWeights& w,
                   const char* who) {
  if (w.values.size() != adapters.size()) {
    std::ostringstream os;
    os << who << ": " << adapters.size() << " adapters but " << w.values.size() << " weights";
    throw DimensionError(os.str());
  }
}

bool uniform_ranks(const std::vector<ClientUpload>& uploads, std::size_t layer) {
  for (const auto& u : uploads) {
    if (u.adapters[layer].rank() != uploads.front().adapters[layer].rank()) {
      return false;
    }
  }
  return true;
}

}  // namespace

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::naive:
      return "naive";
    case Strategy::hlora_homogeneous:
      return "hlora_homogeneous";
    case Strategy::hlora_heterogeneous:
      return "hlora_heterogeneous";
  }
  return "unknown";
}

Strategy parse_strategy(std::string_view name) {
  for (const auto s : {Strategy::naive, Strategy::hlora_homogeneous, Strategy::hlora_heterogeneous}) {
    if (name == to_string(s)) {
      return s;
    }
  }
  throw ConfigError("strategy: unknown value '" + std::string(name) +
                    "' (expected naive, hlora_homogeneous or hlora_heterogeneous)");
}

std::vector<Index> assign_ranks(const RankPolicy& policy, std::size_t clients, SeededRng& rng,
                                Index max_rank) {
  if (policy.rank_min < 1 || policy.rank_min > policy.rank_max || policy.rank_max > max_rank) {
    std::ostringstream os;
    os << "rank bounds [" << policy.rank_min << ", " << policy.rank_max
       << "] infeasible; ranks must lie in [1, " << max_rank << "]";
    throw ConfigError(os.str());
  }
  std::vector<Index> ranks(clients, policy.rank_max);
  if (policy.kind == RankPolicy::Kind::random_uniform) {
    for (auto& r : ranks) {
      r = rng.uniform_int(policy.rank_min, policy.rank_max);
    }
  }
  return ranks;
}

std::vector<std::size_t> sample_clients(std::size_t clients, std::size_t sampled, SeededRng& rng) {
  if (sampled < 1 || sampled > clients) {
    throw ConfigError("sampled_per_round (" + std::to_string(sampled) +
                      ") must lie in [1, clients=" + std::to_string(clients) + "]");
  }
  std::vector<std::size_t> ids(clients);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  for (std::size_t i = 0; i < sampled; ++i) {
    const auto j = static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::int64_t>(i), static_cast<std::int64_t>(clients) - 1));
    std::swap(ids[i], ids[j]);
  }
  ids.resize(sampled);
  std::sort(ids.begin(), ids.end());
  return ids;
}

AggregationWeights compute_weights(std::span<const std::size_t> sample_counts) {
  if (sample_counts.empty()) {
    throw DimensionError("compute_weights: empty cohort");
  }
  double total = 0.0;
  for (const auto n : sample_counts) {
    if (n == 0) {
      throw DimensionError("compute_weights: client with zero samples");
    }
    total += static_cast<double>(n);
  }
  AggregationWeights w;
  for (const auto n : sample_counts) {
    w.values.push_back(static_cast<double>(n) / total);
  }
  return w;
}

lora::Adapter aggregate_naive(std::span<const lora::Adapter> adapters,
                              const AggregationWeights& weights) {
  check_same_shape(adapters, "aggregate_naive");
  check_uniform_rank(adapters, "aggregate_naive");
  check_weights(adapters, weights, "aggregate_naive");
  std::vector<Matrix> bs;
  std::vector<Matrix> as;
  for (const auto& a : adapters) {
    bs.push_back(a.b);
    as.push_back(a.a);
  }
  return {linalg::weighted_sum<double>(bs, weights.values),
          linalg::weighted_sum<double>(as, weights.values)};
}

Matrix aggregate_hlora(std::span<const lora::Adapter> adapters, const AggregationWeights& weights) {
  check_same_shape(adapters, "aggregate_hlora");
  check_weights(adapters, weights, "aggregate_hlora");
  Matrix out = Matrix::Zero(adapters[0].rows(), adapters[0].cols());
  for (std::size_t i = 0; i < adapters.size(); ++i) {
    out.noalias() += weights.values[i] * (adapters[i].b * adapters[i].a);
  }
  const double fault = g_hlora_fault.load();
  if (fault != 0.0) {
    out(0, 0) += fault;
  }
  return out;
}

double bias_gap(std::span<const lora::Adapter> adapters, const AggregationWeights& weights) {
  check_same_shape(adapters, "bias_gap");
  check_uniform_rank(adapters, "bias_gap");
  check_weights(adapters, weights, "bias_gap");
  const lora::Adapter averaged = aggregate_naive(adapters, weights);
  Matrix reconstructed = Matrix::Zero(adapters[0].rows(), adapters[0].cols());
  for (std::size_t i = 0; i < adapters.size(); ++i) {
    reconstructed.noalias() += weights.values[i] * (adapters[i].b * adapters[i].a);
  }
  return (lora::merge(averaged) - reconstructed).norm();
}

std::vector<lora::Adapter> distribute(const Matrix& update, std::span<const Index> ranks) {
  for (const auto r : ranks) {
    lora::check_rank(update.rows(), update.cols(), r, "distribute");
  }
  const auto factors = linalg::svd(update);
  std::map<Index, lora::Adapter> by_rank;
  std::vector<lora::Adapter> out;
  out.reserve(ranks.size());
  for (const auto r : ranks) {
    auto it = by_rank.find(r);
    if (it == by_rank.end()) {
      it = by_rank.emplace(r, lora::decompose(factors, r)).first;
    }
    out.push_back(it->second);
  }
  return out;
}

model::DenseModel ServerState::global_model() const {
  model::DenseModel m;
  for (std::size_t l = 0; l < base.size(); ++l) {
    m.weights.push_back(base[l] + global_update[l]);
    m.activations.push_back(activations[l]);
  }
  return m;
}

ServerState initial_state(const model::ToyModel& base, std::span<const Index> init_ranks,
                          std::uint64_t seed, double init_std) {
  if (init_ranks.size() != base.layers.size()) {
    throw DimensionError("initial_state: need one rank per layer");
  }
  ServerState s;
  for (std::size_t l = 0; l < base.layers.size(); ++l) {
    const auto& layer = base.layers[l];
    s.base.push_back(layer.w0);
    s.activations.push_back(layer.activation);
    s.global_update.push_back(Matrix::Zero(layer.w0.rows(), layer.w0.cols()));
    SeededRng rng(seed, stream_id("init", l));
    s.global_factors.push_back(
        lora::init_adapter(rng, layer.w0.rows(), layer.w0.cols(), init_ranks[l], init_std));
  }
  return s;
}

ServerState warm_start(ServerState state, std::vector<Matrix> update) {
  if (update.size() != state.base.size()) {
    throw DimensionError("warm_start: need one update per layer");
  }
  for (std::size_t l = 0; l < update.size(); ++l) {
    if (update[l].rows() != state.base[l].rows() || update[l].cols() != state.base[l].cols()) {
      throw DimensionError("warm_start: layer " + std::to_string(l) + " update is " +
                           linalg::shape_of(update[l]) + ", base is " +
                           linalg::shape_of(state.base[l]));
    }
  }
  state.global_update = std::move(update);
  state.has_update = true;
  return state;
}

namespace {

// Factors for one layer at rank r when no shared SVD is available.
lora::Adapter layer_start(const ServerState& state, Strategy strategy, std::size_t l, Index r,
                          std::size_t client) {
  const auto& global = state.global_factors[l];
  if (strategy == Strategy::naive) {
    if (global.rank() != r) {
      throw DimensionError("naive strategy: client " + std::to_string(client) + " rank " +
                           std::to_string(r) + " differs from global rank " +
                           std::to_string(global.rank()));
    }
    return global;
  }
  if (state.has_update) {
    const Index ranks[] = {r};
    return distribute(state.global_update[l], ranks).front();
  }
  if (r > global.rank()) {
    throw DimensionError("client " + std::to_string(client) + " rank " + std::to_string(r) +
                         " exceeds the shared initial factors");
  }
  return {global.b.leftCols(r), global.a.topRows(r)};
}

}  // namespace

std::vector<lora::Adapter> starting_factors(const ServerState& state, Strategy strategy,
                                            const ClientConfig& client) {
  if (client.ranks.size() != state.layers()) {
    throw DimensionError("client " + std::to_string(client.id) + " has " +
                         std::to_string(client.ranks.size()) + " ranks for " +
                         std::to_string(state.layers()) + " layers");
  }
  std::vector<lora::Adapter> out;
  for (std::size_t l = 0; l < state.layers(); ++l) {
    out.push_back(layer_start(state, strategy, l, client.ranks[l], client.id));
  }
  return out;
}

RoundOutcome run_round(const ServerState& state, Strategy strategy, const Federation& fed) {
  const auto started = std::chrono::steady_clock::now();
  SeededRng sampler(fed.seed, stream_id("sample", static_cast<std::uint64_t>(state.round)));
  const auto sampled = sample_clients(fed.clients.size(), fed.sampled_per_round, sampler);

  // Starting factors. HLoRA shares one SVD per layer across the cohort.
  std::vector<std::vector<lora::Adapter>> start(sampled.size());
  for (std::size_t l = 0; l < state.layers(); ++l) {
    std::vector<Index> ranks;
    for (const auto id : sampled) {
      ranks.push_back(fed.clients[id].ranks.at(l));
    }
    if (strategy != Strategy::naive && state.has_update) {
      auto adapters = distribute(state.global_update[l], ranks);
      for (std::size_t i = 0; i < sampled.size(); ++i) {
        start[i].push_back(std::move(adapters[i]));
      }
    } else {
      for (std::size_t i = 0; i < sampled.size(); ++i) {
        start[i].push_back(layer_start(state, strategy, l, ranks[i], sampled[i]));
      }
    }
  }

  std::vector<ClientUpload> uploads(sampled.size());
  std::vector<std::exception_ptr> failures(sampled.size());
  auto train_one = [&](std::size_t i) {
    try {
      const auto& client = fed.clients[sampled[i]];
      model::ToyModel local;
      for (std::size_t l = 0; l < state.layers(); ++l) {
        local.layers.push_back({state.base[l], start[i][l], state.activations[l]});
      }
      SeededRng rng(fed.seed, stream_id("train", static_cast<std::uint64_t>(state.round), client.id));
      const model::SampleView view{fed.train.features, fed.train.labels, client.shard};
      auto trained = model::local_train(local, view, fed.settings, rng);
      ClientUpload up;
      up.client = client.id;
      up.samples = client.samples();
      up.final_loss = trained.epoch_losses.back();
      for (auto& layer : trained.model.layers) {
        up.adapters.push_back(std::move(layer.adapter));
      }
      uploads[i] = std::move(up);
    } catch (...) {
      failures[i] = std::current_exception();
    }
  };
  const auto workers = static_cast<std::size_t>(std::max(1, fed.threads));
  if (workers == 1 || sampled.size() == 1) {
    for (std::size_t i = 0; i < sampled.size(); ++i) {
      train_one(i);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(workers, sampled.size()); ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < sampled.size(); i = next++) {
          train_one(i);
        }
      });
    }
  }
  for (const auto& f : failures) {
    if (f) {
      std::rethrow_exception(f);
    }
  }

  // Aggregation consumes uploads in ascending client-id order.
  std::vector<std::size_t> counts;
  for (const auto& u : uploads) {
    counts.push_back(u.samples);
  }
  RoundOutcome out{state, {}, std::move(uploads), compute_weights(counts)};
  auto& next = out.state;
  next.round = state.round + 1;

  double gap_sq = 0.0;
  bool gap_defined = true;
  for (std::size_t l = 0; l < state.layers(); ++l) {
    std::vector<lora::Adapter> layer;
    for (const auto& u : out.uploads) {
      layer.push_back(u.adapters[l]);
    }
    if (strategy == Strategy::naive) {
      next.global_factors[l] = aggregate_naive(layer, out.weights);
      next.global_update[l] = lora::merge(next.global_factors[l]);
    } else {
      next.global_update[l] = aggregate_hlora(layer, out.weights);
    }
    if (uniform_ranks(out.uploads, l)) {
      const double g = bias_gap(layer, out.weights);
      gap_sq += g * g;
    } else {
      gap_defined = false;
    }
  }
  if (strategy != Strategy::naive) {
    next.has_update = true;
  }
  for (const auto& m : next.global_update) {
    if (!m.allFinite()) {
      throw NumericalError("run_round: aggregated update is not finite");
    }
  }

  auto& report = out.report;
  report.round = next.round;
  report.strategy = std::string(to_string(strategy));
  report.seed = fed.seed;
  for (std::size_t i = 0; i < out.uploads.size(); ++i) {
    report.mean_train_loss += out.weights.values[i] * out.uploads[i].final_loss;
  }
  report.test_accuracy = metrics::evaluate(next.global_model(), fed.test).accuracy;
  if (gap_defined) {
    report.bias_gap = std::sqrt(gap_sq);
  }
  if (fed.record_time) {
    report.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::steady_clock::now() - started)
                         .count();
  }
  return out;
}

std::vector<std::pair<Index, Index>> layer_shapes(const ExperimentSettings& s) {
  const auto& syn = s.synthetic;
  if (syn.hidden_dim > 0) {
    return {{syn.hidden_dim, syn.input_dim}, {syn.num_classes, syn.hidden_dim}};
  }
  return {{syn.num_classes, syn.input_dim}};
}

namespace {

std::vector<Index> layer_caps(const ExperimentSettings& s) {
  const auto shapes = layer_shapes(s);
  std::vector<Index> caps;
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    caps.push_back(s.layer_rank_caps.empty() ? std::min(shapes[l].first, shapes[l].second)
                                             : s.layer_rank_caps[l]);
  }
  return caps;
}

}  // namespace

void validate(const ExperimentSettings& s) {
  if (s.clients < 1) {
    throw ConfigError("clients must be at least 1");
  }
  if (s.sampled_per_round < 1 || s.sampled_per_round > s.clients) {
    throw ConfigError("sampled_per_round (" + std::to_string(s.sampled_per_round) +
                      ") must lie in [1, clients=" + std::to_string(s.clients) + "]");
  }
  if (s.rounds < 0) {
    throw ConfigError("rounds must be nonnegative");
  }
  if (s.synthetic.input_dim < 1) {
    throw ConfigError("input_dim must be positive");
  }
  if (s.synthetic.hidden_dim < 0) {
    throw ConfigError("hidden_dim must be nonnegative");
  }
  if (s.synthetic.num_classes < 2) {
    throw ConfigError("num_classes must be at least 2");
  }
  const auto shapes = layer_shapes(s);
  if (!s.layer_rank_caps.empty()) {
    if (s.layer_rank_caps.size() != shapes.size()) {
      throw ConfigError("layer_rank_caps: expected " + std::to_string(shapes.size()) +
                        " entries, got " + std::to_string(s.layer_rank_caps.size()));
    }
    for (std::size_t l = 0; l < shapes.size(); ++l) {
      const Index limit = std::min(shapes[l].first, shapes[l].second);
      if (s.layer_rank_caps[l] < 1 || s.layer_rank_caps[l] > limit) {
        throw ConfigError("layer_rank_caps: layer " + std::to_string(l) + " cap " +
                          std::to_string(s.layer_rank_caps[l]) + " outside [1, " +
                          std::to_string(limit) + "]");
      }
    }
  }
  Index max_rank = std::numeric_limits<Index>::max();
  for (const auto& [d, k] : shapes) {
    max_rank = std::min(max_rank, std::min(d, k));
  }
  if (!s.layer_rank_caps.empty()) {
    // Caps absorb larger client ranks; the bound is the widest layer.
    max_rank = 0;
    for (const auto& [d, k] : shapes) {
      max_rank = std::max(max_rank, std::min(d, k));
    }
  }
  if (s.rank < 1 || s.rank > max_rank) {
    throw ConfigError("rank " + std::to_string(s.rank) + " outside [1, " +
                      std::to_string(max_rank) + "] for the model dimensions");
  }
  if (s.rank_min < 1 || s.rank_min > s.rank_max || s.rank_max > max_rank) {
    throw ConfigError("rank_min/rank_max [" + std::to_string(s.rank_min) + ", " +
                      std::to_string(s.rank_max) + "] infeasible; need 1 <= rank_min <= rank_max <= " +
                      std::to_string(max_rank));
  }
  if (s.import_path.empty()) {
    if (s.synthetic.true_rank < 1) {
      throw ConfigError("true_rank must be positive");
    }
    for (const auto& [d, k] : shapes) {
      if (s.synthetic.true_rank > std::min(d, k)) {
        throw ConfigError("true_rank " + std::to_string(s.synthetic.true_rank) +
                          " exceeds min(d, k) of a " + std::to_string(d) + "x" + std::to_string(k) +
                          " layer");
      }
    }
    if (!(s.synthetic.label_noise >= 0.0 && s.synthetic.label_noise < 0.5)) {
      throw ConfigError("label_noise must lie in [0, 0.5)");
    }
    if (s.synthetic.samples < s.clients) {
      throw ConfigError("samples (" + std::to_string(s.synthetic.samples) +
                        ") must be at least clients (" + std::to_string(s.clients) + ")");
    }
  }
  if (!s.iid && !(s.alpha > 0.0)) {
    throw ConfigError("alpha must be positive");
  }
  if (s.test_samples < 1) {
    throw ConfigError("test_samples must be positive");
  }
  if (!(s.init_std > 0.0)) {
    throw ConfigError("init_std must be positive");
  }
  if (s.target_accuracy < 0.0 || s.target_accuracy > 1.0) {
    throw ConfigError("target_accuracy must lie in [0, 1] (0 selects the automatic target)");
  }
  if (s.threads < 1) {
    throw ConfigError("threads must be at least 1");
  }
  s.train.validate();
}

PreparedExperiment prepare_experiment(const ExperimentSettings& s) {
  validate(s);
  const auto shapes = layer_shapes(s);
  PreparedExperiment p;

  model::ToyModel base;
  if (!s.import_path.empty()) {
    data::Dataset all = data::read_csv(s.import_path);
    if (all.features.cols() != s.synthetic.input_dim || all.num_classes != s.synthetic.num_classes) {
      throw ConfigError("import_path: file has " + std::to_string(all.features.cols()) +
                        " features and " + std::to_string(all.num_classes) +
                        " classes; config says input_dim=" + std::to_string(s.synthetic.input_dim) +
                        ", num_classes=" + std::to_string(s.synthetic.num_classes));
    }
    if (all.size() <= s.test_samples) {
      throw ConfigError("test_samples must be smaller than the imported sample count");
    }
    std::vector<std::size_t> order(all.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    SeededRng split(s.seed, stream_id("split"));
    split.shuffle(std::span<std::size_t>(order));
    const auto cut = static_cast<std::ptrdiff_t>(all.size() - s.test_samples);
    std::vector<std::size_t> train_idx(order.begin(), order.begin() + cut);
    std::vector<std::size_t> test_idx(order.begin() + cut, order.end());
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    p.train = all.subset(train_idx);
    p.test = all.subset(test_idx);
    SeededRng base_rng(s.seed, stream_id("base"));
    const std::vector<Index> ones(shapes.size(), 1);
    base = model::make_model(base_rng, s.synthetic.input_dim, s.synthetic.hidden_dim,
                             s.synthetic.num_classes, ones);
    p.ceiling = 1.0;
  } else {
    SeededRng data_rng(s.seed, stream_id("data"));
    auto syn = data::generate_synthetic(data_rng, s.synthetic);
    p.train = std::move(syn.dataset);
    SeededRng test_rng(s.seed, stream_id("test"));
    p.test = data::draw_samples(syn.planted, test_rng, s.test_samples, s.synthetic.label_noise);
    p.ceiling = metrics::evaluate(model::to_dense(syn.planted), p.test).accuracy;
    base = std::move(syn.planted);
  }
  p.target_accuracy =
      s.target_accuracy > 0.0
          ? s.target_accuracy
          : 0.5 * (p.ceiling + 1.0 / static_cast<double>(s.synthetic.num_classes));

  SeededRng part_rng(s.seed, stream_id("partition"));
  const std::size_t min_samples =
      s.min_samples > 0 ? s.min_samples : static_cast<std::size_t>(s.train.batch_size);
  const data::Partition partition =
      s.iid ? data::iid_partition(p.train, s.clients, part_rng)
            : data::dirichlet_partition(p.train, s.clients, s.alpha, min_samples, part_rng);
  p.partition_fingerprint = data::partition_hash(partition);

  const auto caps = layer_caps(s);
  Index max_rank = 0;
  for (const auto c : caps) {
    max_rank = std::max(max_rank, c);
  }
  const bool heterogeneous = s.strategy == Strategy::hlora_heterogeneous;
  const RankPolicy policy = heterogeneous ? RankPolicy::random_uniform(s.rank_min, s.rank_max)
                                          : RankPolicy::homogeneous(s.rank);
  SeededRng rank_rng(s.seed, stream_id("ranks"));
  p.client_ranks = assign_ranks(policy, s.clients, rank_rng, max_rank);

  p.clients.resize(s.clients);
  for (std::size_t k = 0; k < s.clients; ++k) {
    p.clients[k].id = k;
    p.clients[k].shard = partition.shards[k];
    for (const auto cap : caps) {
      p.clients[k].ranks.push_back(std::min(p.client_ranks[k], cap));
    }
  }
  std::vector<Index> init_ranks;
  for (const auto cap : caps) {
    init_ranks.push_back(std::min(heterogeneous ? s.rank_max : s.rank, cap));
  }
  p.state = initial_state(base, init_ranks, s.seed, s.init_std);
  return p;
}

Federation PreparedExperiment::federation(const ExperimentSettings& s) const {
  return {train, test, clients, s.train, s.sampled_per_round, s.seed, s.threads, s.record_time};
}

ExperimentResult run_experiment(const ExperimentSettings& s) {
  const PreparedExperiment prepared = prepare_experiment(s);
  const Federation fed = prepared.federation(s);
  ExperimentResult result;
  result.ceiling = prepared.ceiling;
  result.target_accuracy = prepared.target_accuracy;
  result.partition_fingerprint = prepared.partition_fingerprint;
  result.client_ranks = prepared.client_ranks;

  ServerState state = prepared.state;
  auto& initial = result.initial;
  initial.round = 0;
  initial.strategy = std::string(to_string(s.strategy));
  initial.seed = s.seed;
  initial.mean_train_loss = metrics::evaluate(state.global_model(), prepared.train).loss;
  initial.test_accuracy = metrics::evaluate(state.global_model(), prepared.test).accuracy;

  for (int r = 0; r < s.rounds; ++r) {
    auto outcome = run_round(state, s.strategy, fed);
    state = std::move(outcome.state);
    result.history.push_back(std::move(outcome.report));
  }
  return result;
}

namespace testing {
void set_hlora_fault(double offset) { g_hlora_fault.store(offset); }
double hlora_fault() { return g_hlora_fault.load(); }
}  // namespace testing

}  // namespace federation
}  // namespace hlora
