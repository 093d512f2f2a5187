#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "hlora/commands.hpp"
#include "hlora/federation.hpp"

namespace {

using hlora::cli::kExitRuntime;
using hlora::cli::kExitValidation;

template <typename F>
int validated(F&& body) {
  try {
    return body();
  } catch (const hlora::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated LoRA simulator with reconstruction-based aggregation"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run one experiment and write its per-round CSV");
  std::string run_config;
  std::string run_seed;
  std::string run_out;
  run->add_option("--config", run_config, "Config file")->required();
  run->add_option("--seed", run_seed, "Override the config seed");
  run->add_option("--out", run_out, "Override the output CSV path");

  auto* compare = app.add_subcommand("compare", "Run strategies x seeds on shared data and partitions");
  std::string cmp_config;
  std::string cmp_strategies;
  std::string cmp_seeds;
  std::string cmp_out;
  compare->add_option("--config", cmp_config, "Config file")->required();
  compare->add_option("--strategies", cmp_strategies, "Comma-separated strategies")->required();
  compare->add_option("--seeds", cmp_seeds, "Comma-separated seeds")->required();
  compare->add_option("--out", cmp_out, "Combined output CSV")->required();

  auto* selftest = app.add_subcommand("selftest", "Run every property suite");
  double inject_bias = 0.0;
  selftest->add_option("--inject-bias", inject_bias)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  if (*run) {
    return validated([&] {
      hlora::cli::Overrides overrides;
      if (!run_seed.empty()) {
        overrides["seed"] = run_seed;
      }
      if (!run_out.empty()) {
        overrides["output"] = run_out;
      }
      const auto config = hlora::cli::parse_config(run_config, overrides);
      return hlora::cli::cmd_run(config, std::cout, std::cerr);
    });
  }
  if (*compare) {
    return validated([&] {
      const auto config = hlora::cli::parse_config(cmp_config);
      const auto strategies = hlora::cli::parse_strategy_list(cmp_strategies);
      const auto seeds = hlora::cli::parse_seed_list(cmp_seeds);
      return hlora::cli::cmd_compare(config, strategies, seeds, cmp_out, std::cout, std::cerr);
    });
  }
  hlora::federation::testing::set_hlora_fault(inject_bias);
  return hlora::cli::cmd_selftest(std::cout);
}
