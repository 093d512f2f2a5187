#ifndef HLORA_LORA_HPP
#define HLORA_LORA_HPP

#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <tuple>
#include <utility>

#include "hlora/linalg.hpp"

namespace hlora {
namespace lora {

namespace detail {
inline std::mutex& warning_mutex() {
  static std::mutex mu;
  return mu;
}

inline std::ostream*& warning_stream() {
  static std::ostream* stream = &std::clog;
  return stream;
}

inline void warn_large_rank(Index d, Index k, Index rank) {
  static std::set<std::tuple<Index, Index, Index>> seen;
  std::lock_guard lock(warning_mutex());
  if (warning_stream() != nullptr && seen.emplace(d, k, rank).second) {
    *warning_stream() << "warning: LoRA rank " << rank << " exceeds half of min(" << d << ", "
                      << k << ")\n";
  }
}
}  // namespace detail

/// Where large-rank warnings go (std::clog by default); nullptr silences them.
/// Returns the previous stream.
inline std::ostream* set_warning_stream(std::ostream* stream) {
  std::lock_guard lock(detail::warning_mutex());
  return std::exchange(detail::warning_stream(), stream);
}

/// Low-rank update factors: the update is b * a with b (d x r), a (r x k).
template <typename Scalar>
struct LoraAdapter {
  MatrixX<Scalar> b;
  MatrixX<Scalar> a;

  Index rank() const { return b.cols(); }
  Index rows() const { return b.rows(); }
  Index cols() const { return a.cols(); }

  /// Throws DimensionError unless b.cols == a.rows and 1 <= rank <= min(d, k).
  void validate() const {
    if (b.cols() != a.rows()) {
      throw DimensionError("LoraAdapter: b is " + linalg::shape_of(b) + " but a is " +
                           linalg::shape_of(a));
    }
    if (rank() < 1 || rank() > std::min(rows(), cols())) {
      std::ostringstream os;
      os << "LoraAdapter: rank " << rank() << " outside [1, min(" << rows() << ", " << cols()
         << ")]";
      throw DimensionError(os.str());
    }
  }
};

using Adapter = LoraAdapter<double>;

inline void check_rank(Index d, Index k, Index rank, const char* who) {
  if (rank < 1 || rank > std::min(d, k)) {
    std::ostringstream os;
    os << who << ": rank " << rank << " outside [1, min(" << d << ", " << k << ")]";
    throw DimensionError(os.str());
  }
  if (2 * rank > std::min(d, k)) {
    detail::warn_large_rank(d, k, rank);
  }
}

/// Standard LoRA start: b = 0, a ~ N(0, init_std^2), so the update is exactly zero.
template <typename Scalar = double>
LoraAdapter<Scalar> init_adapter(SeededRng& rng, Index d, Index k, Index rank,
                                 Scalar init_std = Scalar(0.02)) {
  check_rank(d, k, rank, "init_adapter");
  return {MatrixX<Scalar>::Zero(d, rank), linalg::random_gaussian<Scalar>(rng, rank, k, init_std)};
}

template <typename Scalar>
MatrixX<Scalar> merge(const LoraAdapter<Scalar>& adapter) {
  return adapter.b * adapter.a;
}

/// Adapter from a rank-r truncation: b = U_r, a = diag(sigma_r) * Vt_r.
/// All singular-value mass sits in a.
template <typename Scalar>
LoraAdapter<Scalar> from_truncation(const linalg::Truncation<Scalar>& t) {
  return {t.u, t.sigma.asDiagonal() * t.vt};
}

template <typename Scalar>
LoraAdapter<Scalar> decompose(const linalg::SvdResult<Scalar>& factors, Index rank) {
  return from_truncation(linalg::truncate(factors, rank));
}

template <typename Derived>
LoraAdapter<typename Derived::Scalar> decompose(const Eigen::MatrixBase<Derived>& w, Index rank) {
  check_rank(w.rows(), w.cols(), rank, "decompose");
  return decompose(linalg::svd(w), rank);
}

template <typename Derived>
typename Derived::Scalar approximation_error(const Eigen::MatrixBase<Derived>& w,
                                             const LoraAdapter<typename Derived::Scalar>& adapter) {
  if (adapter.rows() != w.rows() || adapter.cols() != w.cols()) {
    throw DimensionError("approximation_error: target is " + linalg::shape_of(w) +
                         " but adapter merges to " + std::to_string(adapter.rows()) + "x" +
                         std::to_string(adapter.cols()));
  }
  return (w - adapter.b * adapter.a).norm();
}

}  // namespace lora
}  // namespace hlora

#endif  // HLORA_LORA_HPP
