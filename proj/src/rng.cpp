#include "hlora/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace hlora {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_id(std::string_view purpose, std::uint64_t a, std::uint64_t b,
                        std::uint64_t c) {
  // FNV-1a over the tag, then chained mixing of the numeric coordinates.
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const char ch : purpose) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001B3ULL;
  }
  h = splitmix64(h);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ (b + 0x632BE59BD9B4E019ULL));
  h = splitmix64(h ^ (c + 0x8CB92BA72F3D8DD7ULL));
  return h;
}

SeededRng::SeededRng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), key_(splitmix64(splitmix64(seed) ^ stream)) {}

std::uint64_t SeededRng::next_u64() {
  ++counter_;
  return splitmix64(key_ + counter_ * kGolden);
}

double SeededRng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeededRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  double u = 0.0;
  double v = 0.0;
  double s = 0.0;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_ = v * factor;
  has_spare_ = true;
  return u * factor;
}

std::int64_t SeededRng::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) {
    throw std::invalid_argument("uniform_int: empty range");
  }
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) {
    return static_cast<std::int64_t>(next_u64());
  }
  // Rejection sampling on the largest multiple of span.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % span;
  std::uint64_t x = next_u64();
  while (x >= limit) {
    x = next_u64();
  }
  return lo + static_cast<std::int64_t>(x % span);
}

double SeededRng::gamma(double shape) {
  if (!(shape > 0.0)) {
    throw std::invalid_argument("gamma: shape must be positive");
  }
  if (shape < 1.0) {
    const double g = gamma(shape + 1.0);
    double u = uniform();
    while (u == 0.0) {
      u = uniform();
    }
    return g * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) {
      return d * v;
    }
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
      return d * v;
    }
  }
}

std::vector<double> SeededRng::dirichlet(double alpha, std::size_t count) {
  std::vector<double> p(count);
  double total = 0.0;
  for (auto& x : p) {
    x = gamma(alpha);
    total += x;
  }
  if (total > 0.0) {
    for (auto& x : p) {
      x /= total;
    }
  } else if (count > 0) {
    // Every gamma draw underflowed (tiny alpha): all mass on one category.
    p[static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(count) - 1))] = 1.0;
  }
  return p;
}

}  // namespace hlora
