#ifndef HLORA_COMMANDS_HPP
#define HLORA_COMMANDS_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "hlora/config.hpp"

namespace hlora {
namespace cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

int cmd_run(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

/// Cross product of strategies x seeds on shared data, partitions and rank
/// draws; one combined CSV at `output`.
int cmd_compare(const ExperimentConfig& config, const std::vector<federation::Strategy>& strategies,
                const std::vector<std::uint64_t>& seeds, const std::filesystem::path& output,
                std::ostream& out, std::ostream& err);

int cmd_selftest(std::ostream& out);

std::vector<federation::Strategy> parse_strategy_list(const std::string& list);
std::vector<std::uint64_t> parse_seed_list(const std::string& list);

}  // namespace cli
}  // namespace hlora

#endif  // HLORA_COMMANDS_HPP
