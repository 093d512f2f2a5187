#ifndef HLORA_METRICS_HPP
#define HLORA_METRICS_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hlora/data.hpp"
#include "hlora/model.hpp"

namespace hlora {
namespace metrics {

struct RoundReport {
  std::int64_t round = 0;
  std::string strategy;
  std::uint64_t seed = 0;
  double mean_train_loss = 0.0;
  double test_accuracy = 0.0;
  std::optional<double> bias_gap;
  std::int64_t wall_ms = 0;

  bool operator==(const RoundReport&) const = default;
};

using History = std::vector<RoundReport>;

struct Evaluation {
  double accuracy = 0.0;
  double loss = 0.0;
};

/// Argmax accuracy (ties go to the lowest class index) and mean cross-entropy.
Evaluation evaluate(const model::DenseModel& m, const data::Dataset& test);

/// `round` of the first report with test_accuracy >= target.
std::optional<std::int64_t> rounds_to_target(const History& history, double target);

inline constexpr const char* kCsvHeader =
    "round,strategy,seed,mean_train_loss,test_accuracy,bias_gap,wall_ms";

std::string format_results(const History& history);
History parse_results(const std::string& text);

void write_results(const History& history, const std::filesystem::path& path);
History read_results(const std::filesystem::path& path);

}  // namespace metrics
}  // namespace hlora

#endif  // HLORA_METRICS_HPP
