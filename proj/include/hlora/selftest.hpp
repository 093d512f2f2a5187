#ifndef HLORA_SELFTEST_HPP
#define HLORA_SELFTEST_HPP

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace hlora {
namespace selftest {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct Suite {
  std::string name;
  std::function<SuiteResult()> run;
};

SuiteResult svd_round_trip();
SuiteResult svd_determinism();
SuiteResult weighted_sum_linearity();
SuiteResult eckart_young();
SuiteResult lora_round_trip();
SuiteResult lora_optimality();
SuiteResult gradient_check();
SuiteResult frozen_base();
SuiteResult update_rank();
SuiteResult partition_properties();
SuiteResult bias_witness();
SuiteResult fedavg_equivalence();
SuiteResult lossless_rank_equivalence();
SuiteResult degenerate_single_client();
SuiteResult replacement_semantics();
SuiteResult serialization_round_trip();
SuiteResult end_to_end_determinism();

const std::vector<Suite>& all_suites();

/// Runs every suite, printing one line each. Exceptions count as failures.
std::vector<SuiteResult> run_all(std::ostream& out);

}  // namespace selftest
}  // namespace hlora

#endif  // HLORA_SELFTEST_HPP
