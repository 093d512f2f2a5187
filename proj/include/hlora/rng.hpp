#ifndef HLORA_RNG_HPP
#define HLORA_RNG_HPP

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace hlora {

/// SplitMix64 used as a counter-based generator: draw n is mix(key + n * golden),
/// where key is derived from (seed, stream). All derived distributions are
/// implemented here rather than through <random> distributions, whose output
/// is implementation-defined, so sequences agree across standard libraries.
class SeededRng {
 public:
  SeededRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal (Marsaglia polar method).
  double normal();
  /// Uniform integer in [lo, hi], unbiased.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  /// Gamma(shape, 1) via Marsaglia-Tsang; shape < 1 uses the U^(1/shape) boost.
  double gamma(double shape);
  /// Symmetric Dirichlet(alpha) over `count` categories.
  std::vector<double> dirichlet(double alpha, std::size_t count);

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i - 1)));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Stream id for a (purpose, a, b, c) tuple. Purposes are short tags such as
/// "train" or "sample"; a/b/c are typically round, client id and layer.
std::uint64_t stream_id(std::string_view purpose, std::uint64_t a = 0, std::uint64_t b = 0,
                        std::uint64_t c = 0);

}  // namespace hlora

#endif  // HLORA_RNG_HPP
