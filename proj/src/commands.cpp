#include "hlora/commands.hpp"

#include <charconv>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "hlora/selftest.hpp"

namespace hlora {
namespace cli {

namespace {

std::string describe_target(const federation::ExperimentResult& r) {
  metrics::History full{r.initial};
  full.insert(full.end(), r.history.begin(), r.history.end());
  const auto hit = metrics::rounds_to_target(full, r.target_accuracy);
  return hit ? std::to_string(*hit) : std::string("never");
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace

std::vector<federation::Strategy> parse_strategy_list(const std::string& list) {
  std::vector<federation::Strategy> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(federation::parse_strategy(item));
  }
  if (out.size() < 2) {
    throw ConfigError("strategies: need at least two entries");
  }
  return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& list) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::uint64_t v = 0;
    const auto r = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || r.ec != std::errc() || r.ptr != item.data() + item.size()) {
      throw ConfigError("seeds: bad seed '" + item + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) {
    throw ConfigError("seeds: need at least one seed");
  }
  return out;
}

int cmd_run(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto result = federation::run_experiment(config.settings);
    metrics::write_results(result.history, config.output);
    const double final_acc =
        result.history.empty() ? result.initial.test_accuracy : result.history.back().test_accuracy;
    out << "strategy " << federation::to_string(config.settings.strategy) << ", seed "
        << config.settings.seed << ", " << result.history.size() << " rounds\n"
        << std::fixed << std::setprecision(4) << "final accuracy " << final_acc
        << " (ceiling " << result.ceiling << ", target " << result.target_accuracy << ")\n"
        << "rounds to target: " << describe_target(result) << '\n'
        << "wrote " << config.output.string() << '\n';
    return kExitOk;
  });
}

int cmd_compare(const ExperimentConfig& config, const std::vector<federation::Strategy>& strategies,
                const std::vector<std::uint64_t>& seeds, const std::filesystem::path& output,
                std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (strategies.size() < 2) {
      throw ConfigError("strategies: need at least two entries");
    }
    metrics::History combined;
    std::vector<std::vector<double>> final_acc(strategies.size());
    std::ostringstream table;
    table << std::left << std::setw(8) << "seed";
    for (const auto s : strategies) {
      table << std::setw(34) << federation::to_string(s);
    }
    table << "partition\n";
    for (const auto seed : seeds) {
      table << std::left << std::setw(8) << seed;
      std::uint64_t fingerprint = 0;
      for (std::size_t i = 0; i < strategies.size(); ++i) {
        auto settings = config.settings;
        settings.seed = seed;
        settings.strategy = strategies[i];
        const auto result = federation::run_experiment(settings);
        if (i == 0) {
          fingerprint = result.partition_fingerprint;
        } else if (fingerprint != result.partition_fingerprint) {
          throw std::runtime_error("compare: partitions differ across strategies for seed " +
                                   std::to_string(seed));
        }
        const double acc = result.history.empty() ? result.initial.test_accuracy
                                                  : result.history.back().test_accuracy;
        final_acc[i].push_back(acc);
        std::ostringstream cell;
        cell << std::fixed << std::setprecision(4) << acc << " (target@" << describe_target(result)
             << ")";
        table << std::setw(34) << cell.str();
        combined.insert(combined.end(), result.history.begin(), result.history.end());
      }
      table << std::hex << std::setw(16) << std::setfill('0') << fingerprint << std::dec
            << std::setfill(' ') << '\n';
    }
    metrics::write_results(combined, output);

    out << table.str() << "\nmean final accuracy:\n";
    std::vector<std::size_t> order(strategies.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      order[i] = i;
    }
    auto mean = [&](std::size_t i) {
      double total = 0.0;
      for (const double a : final_acc[i]) {
        total += a;
      }
      return total / static_cast<double>(final_acc[i].size());
    };
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return mean(a) > mean(b); });
    for (const auto i : order) {
      out << "  " << std::left << std::setw(22) << federation::to_string(strategies[i]) << std::fixed
          << std::setprecision(4) << mean(i) << '\n';
    }
    out << "wrote " << output.string() << '\n';
    return kExitOk;
  });
}

int cmd_selftest(std::ostream& out) {
  const auto results = selftest::run_all(out);
  for (const auto& r : results) {
    if (!r.passed) {
      return kExitRuntime;
    }
  }
  return kExitOk;
}

}  // namespace cli
}  // namespace hlora
