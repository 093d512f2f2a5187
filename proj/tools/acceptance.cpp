// Acceptance run: one PASS/FAIL line per criterion. Exit status ignores the
// soft heterogeneous-vs-homogeneous comparison.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hlora/config.hpp"
#include "hlora/lora.hpp"
#include "hlora/metrics.hpp"
#include "hlora/selftest.hpp"

using namespace hlora;
using federation::Strategy;

namespace {

struct Line {
  int id;
  bool passed;
  bool soft;
  std::string text;
};

std::vector<Line> lines;

void report(int id, bool passed, const std::string& text, bool soft = false) {
  lines.push_back({id, passed, soft, text});
  std::cout << "criterion " << id << ": " << (passed ? "PASS" : "FAIL") << (soft ? " (soft)" : "") << "  "
            << text << std::endl;
}

std::string secs(double s) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << s << " s";
  return os.str();
}

void suite_criterion(int id, selftest::SuiteResult (*suite)(), double limit) {
  const auto r = suite();
  const bool fast = r.seconds < limit;
  report(id, r.passed && fast, r.name + " " + r.detail + ", " + secs(r.seconds) + (fast ? "" : " over limit"));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Outcome {
  double final_accuracy;
  std::optional<std::int64_t> to_target;
  double target;
};

Outcome run(federation::ExperimentSettings s, Strategy strategy, std::uint64_t seed) {
  s.strategy = strategy;
  s.seed = seed;
  const auto r = federation::run_experiment(s);
  const double final_acc = r.history.empty() ? r.initial.test_accuracy : r.history.back().test_accuracy;
  metrics::History full{r.initial};
  full.insert(full.end(), r.history.begin(), r.history.end());
  return {final_acc, metrics::rounds_to_target(full, r.target_accuracy), r.target_accuracy};
}

std::string rounds(const std::optional<std::int64_t>& r) { return r ? std::to_string(*r) : "-"; }

}  // namespace

int main(int argc, char** argv) {
  const std::filesystem::path config_dir = argc > 1 ? argv[1] : HLORA_CONFIG_DIR;
  lora::set_warning_stream(nullptr);
  const std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};

  suite_criterion(1, selftest::bias_witness, 1.0);
  suite_criterion(2, selftest::eckart_young, 30.0);
  suite_criterion(3, selftest::fedavg_equivalence, 60.0);
  suite_criterion(4, selftest::gradient_check, 30.0);
  suite_criterion(5, selftest::lossless_rank_equivalence, 60.0);

  const auto config = cli::parse_config(config_dir / "default.cfg");
  auto settings = config.settings;

  {
    const auto t0 = std::chrono::steady_clock::now();
    int faster = 0;
    int not_worse = 0;
    std::ostringstream table;
    table << "  seed  target  rounds(naive)  rounds(homog)  final(naive)  final(homog)\n";
    for (const auto seed : seeds) {
      const auto naive = run(settings, Strategy::naive, seed);
      const auto homog = run(settings, Strategy::hlora_homogeneous, seed);
      const bool quicker = homog.to_target && (!naive.to_target || *homog.to_target < *naive.to_target);
      faster += quicker ? 1 : 0;
      not_worse += homog.final_accuracy >= naive.final_accuracy ? 1 : 0;
      table << std::fixed << std::setprecision(4) << "  " << std::setw(4) << seed << "  " << homog.target
            << "  " << std::setw(13) << rounds(naive.to_target) << "  " << std::setw(13) << rounds(homog.to_target)
            << "  " << std::setw(12) << naive.final_accuracy << "  " << std::setw(12) << homog.final_accuracy
            << '\n';
    }
    const double elapsed = seconds_since(t0);
    std::cout << table.str();
    report(6, faster >= 4 && not_worse >= 4 && elapsed < 300.0,
           "homogeneous faster in " + std::to_string(faster) + "/5, final >= naive in " + std::to_string(not_worse) +
               "/5, " + secs(elapsed));
  }

  {
    int not_worse = 0;
    std::ostringstream table;
    table << "  seed  final(hetero)  final(homog)\n";
    for (const auto seed : seeds) {
      const auto hetero = run(settings, Strategy::hlora_heterogeneous, seed);
      const auto homog = run(settings, Strategy::hlora_homogeneous, seed);
      not_worse += hetero.final_accuracy >= homog.final_accuracy ? 1 : 0;
      table << std::fixed << std::setprecision(4) << "  " << std::setw(4) << seed << "  " << std::setw(13)
            << hetero.final_accuracy << "  " << std::setw(12) << homog.final_accuracy << '\n';
    }
    std::cout << table.str();
    report(7, not_worse >= 3, "heterogeneous final >= homogeneous in " + std::to_string(not_worse) + "/5", true);
  }

  {
    bool identical = true;
    const auto dir = std::filesystem::temp_directory_path() / "hlora_acceptance";
    std::filesystem::create_directories(dir);
    for (const char* name : {"default.cfg", "smoke.cfg"}) {
      for (const auto strategy : {Strategy::naive, Strategy::hlora_homogeneous, Strategy::hlora_heterogeneous}) {
        auto s = cli::parse_config(config_dir / name).settings;
        s.strategy = strategy;
        std::string bytes[2];
        for (int i = 0; i < 2; ++i) {
          const auto path = dir / ("run" + std::to_string(i) + ".csv");
          metrics::write_results(federation::run_experiment(s).history, path);
          std::ifstream in(path, std::ios::binary);
          std::ostringstream ss;
          ss << in.rdbuf();
          bytes[i] = ss.str();
        }
        identical = identical && bytes[0] == bytes[1] && !bytes[0].empty();
      }
    }
    std::filesystem::remove_all(dir);
    const auto t0 = std::chrono::steady_clock::now();
    std::ostringstream sink;
    const auto results = selftest::run_all(sink);
    const double elapsed = seconds_since(t0);
    std::size_t passed = 0;
    for (const auto& r : results) {
      passed += r.passed ? 1 : 0;
    }
    report(8, identical && passed == results.size() && elapsed < 120.0,
           std::string("repeated runs ") + (identical ? "byte-identical" : "DIFFER") + ", selftest " +
               std::to_string(passed) + "/" + std::to_string(results.size()) + " in " + secs(elapsed));
  }

  int hard_failures = 0;
  for (const auto& l : lines) {
    hard_failures += (!l.passed && !l.soft) ? 1 : 0;
  }
  std::cout << (hard_failures == 0 ? "ACCEPTED" : "REJECTED") << " (" << hard_failures << " hard failures)\n";
  return hard_failures == 0 ? 0 : 1;
}
