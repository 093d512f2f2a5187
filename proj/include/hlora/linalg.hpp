#ifndef HLORA_LINALG_HPP
#define HLORA_LINALG_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "hlora/error.hpp"
#include "hlora/rng.hpp"

namespace hlora {

using Index = Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;

namespace linalg {

template <typename Derived>
std::string shape_of(const Eigen::MatrixBase<Derived>& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

/// Thin SVD m = u * diag(singular_values) * vt with p = min(rows, cols).
template <typename Scalar>
struct SvdResult {
  MatrixX<Scalar> u;
  VectorX<Scalar> singular_values;
  MatrixX<Scalar> vt;

  Index size() const { return singular_values.size(); }
  MatrixX<Scalar> reconstruct() const { return u * singular_values.asDiagonal() * vt; }
};

template <typename Scalar>
struct Truncation {
  MatrixX<Scalar> u;
  VectorX<Scalar> sigma;
  MatrixX<Scalar> vt;

  MatrixX<Scalar> reconstruct() const { return u * sigma.asDiagonal() * vt; }
};

struct SvdOptions {
  int max_sweeps = 80;
};

template <typename DerivedA, typename DerivedB>
MatrixX<typename DerivedA::Scalar> matmul(const Eigen::MatrixBase<DerivedA>& a,
                                          const Eigen::MatrixBase<DerivedB>& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: cannot multiply " + shape_of(a) + " by " + shape_of(b));
  }
  MatrixX<typename DerivedA::Scalar> out = a * b;
  if (!out.allFinite()) {
    throw NumericalError("matmul: non-finite entries in " + shape_of(out) + " product");
  }
  return out;
}

template <typename Derived>
typename Derived::RealScalar frobenius_norm(const Eigen::MatrixBase<Derived>& m) {
  return m.norm();
}

namespace detail {

// Orthonormal completion: replaces columns flagged in `deficient` by unit
// vectors orthogonal to every other column, taken from the standard basis
// in index order.
template <typename Scalar>
void complete_orthonormal_columns(MatrixX<Scalar>& q, const std::vector<bool>& deficient) {
  const Index n = q.rows();
  std::vector<Index> accepted;
  for (Index j = 0; j < q.cols(); ++j) {
    if (!deficient[static_cast<std::size_t>(j)]) {
      accepted.push_back(j);
    }
  }
  Index candidate = 0;
  for (Index j = 0; j < q.cols(); ++j) {
    if (!deficient[static_cast<std::size_t>(j)]) {
      continue;
    }
    while (candidate < n) {
      VectorX<Scalar> v = VectorX<Scalar>::Unit(n, candidate++);
      for (int pass = 0; pass < 2; ++pass) {
        for (const Index k : accepted) {
          v -= q.col(k).dot(v) * q.col(k);
        }
      }
      const Scalar len = v.norm();
      if (len > Scalar(0.5)) {
        q.col(j) = v / len;
        accepted.push_back(j);
        break;
      }
    }
    if (accepted.back() != j) {
      throw ConvergenceError("svd: failed to complete orthonormal basis");
    }
  }
}

// One-sided Jacobi (Hestenes) on a tall matrix: rotates columns of w until
// mutually orthogonal, accumulating the rotations in v.
template <typename Scalar>
void one_sided_jacobi(MatrixX<Scalar>& w, MatrixX<Scalar>& v, int max_sweeps) {
  const Index n = w.cols();
  const Scalar tol = std::numeric_limits<Scalar>::epsilon() * static_cast<Scalar>(w.rows());
  v = MatrixX<Scalar>::Identity(n, n);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (Index p = 0; p + 1 < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const Scalar alpha = w.col(p).squaredNorm();
        const Scalar beta = w.col(q).squaredNorm();
        const Scalar gamma = w.col(p).dot(w.col(q));
        if (gamma == Scalar(0) || std::abs(gamma) <= tol * std::sqrt(alpha * beta)) {
          continue;
        }
        rotated = true;
        const Scalar zeta = (beta - alpha) / (Scalar(2) * gamma);
        const Scalar t = (zeta >= Scalar(0) ? Scalar(1) : Scalar(-1)) /
                         (std::abs(zeta) + std::sqrt(Scalar(1) + zeta * zeta));
        const Scalar c = Scalar(1) / std::sqrt(Scalar(1) + t * t);
        const Scalar s = c * t;
        for (Index i = 0; i < w.rows(); ++i) {
          const Scalar wp = w(i, p);
          const Scalar wq = w(i, q);
          w(i, p) = c * wp - s * wq;
          w(i, q) = s * wp + c * wq;
        }
        for (Index i = 0; i < n; ++i) {
          const Scalar vp = v(i, p);
          const Scalar vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) {
      return;
    }
  }
  std::ostringstream os;
  os << "svd: one-sided Jacobi did not converge within " << max_sweeps << " sweeps on a "
     << w.rows() << "x" << w.cols() << " matrix";
  throw ConvergenceError(os.str());
}

// Tall case (rows >= cols). Returns u (rows x cols), sigma, v (cols x cols).
template <typename Scalar>
void tall_svd(const MatrixX<Scalar>& m, MatrixX<Scalar>& u, VectorX<Scalar>& sigma,
              MatrixX<Scalar>& v, int max_sweeps) {
  MatrixX<Scalar> w = m;
  MatrixX<Scalar> rot;
  one_sided_jacobi(w, rot, max_sweeps);

  const Index n = w.cols();
  VectorX<Scalar> norms(n);
  for (Index j = 0; j < n; ++j) {
    norms(j) = w.col(j).norm();
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return norms(a) > norms(b); });

  u.resize(m.rows(), n);
  sigma.resize(n);
  v.resize(n, n);
  const Scalar largest = n > 0 ? norms(order.front()) : Scalar(0);
  const Scalar cutoff = std::numeric_limits<Scalar>::epsilon() *
                        static_cast<Scalar>(std::max(m.rows(), m.cols())) * largest;
  std::vector<bool> deficient(static_cast<std::size_t>(n), false);
  for (Index j = 0; j < n; ++j) {
    const Index src = order[static_cast<std::size_t>(j)];
    sigma(j) = norms(src);
    v.col(j) = rot.col(src);
    if (norms(src) <= cutoff || norms(src) == Scalar(0)) {
      deficient[static_cast<std::size_t>(j)] = true;
      u.col(j).setZero();
    } else {
      u.col(j) = w.col(src) / norms(src);
    }
  }
  complete_orthonormal_columns(u, deficient);
}

}  // namespace detail

/// Deterministic thin SVD. Singular values descend; within each column of u
/// the entry of largest magnitude (lowest index on ties) is nonnegative.
/// Throws NumericalError on non-finite input and ConvergenceError when the
/// Jacobi sweeps hit options.max_sweeps.
template <typename Derived>
SvdResult<typename Derived::Scalar> svd(const Eigen::MatrixBase<Derived>& m,
                                        SvdOptions options = {}) {
  using Scalar = typename Derived::Scalar;
  if (!m.allFinite()) {
    throw NumericalError("svd: input " + shape_of(m) + " contains non-finite entries");
  }
  SvdResult<Scalar> out;
  if (m.rows() >= m.cols()) {
    MatrixX<Scalar> v;
    detail::tall_svd<Scalar>(m, out.u, out.singular_values, v, options.max_sweeps);
    out.vt = v.transpose();
  } else {
    MatrixX<Scalar> ut;
    MatrixX<Scalar> v;
    detail::tall_svd<Scalar>(m.transpose(), ut, out.singular_values, v, options.max_sweeps);
    out.u = v;
    out.vt = ut.transpose();
  }
  for (Index j = 0; j < out.u.cols(); ++j) {
    Index arg = 0;
    Scalar best = Scalar(-1);
    for (Index i = 0; i < out.u.rows(); ++i) {
      if (std::abs(out.u(i, j)) > best) {
        best = std::abs(out.u(i, j));
        arg = i;
      }
    }
    if (out.u(arg, j) < Scalar(0)) {
      out.u.col(j) = -out.u.col(j);
      out.vt.row(j) = -out.vt.row(j);
    }
  }
  return out;
}

template <typename Scalar>
Truncation<Scalar> truncate(const SvdResult<Scalar>& full, Index rank) {
  if (rank < 1 || rank > full.size()) {
    std::ostringstream os;
    os << "truncate: rank " << rank << " outside [1, " << full.size() << "]";
    throw DimensionError(os.str());
  }
  return {full.u.leftCols(rank), full.singular_values.head(rank), full.vt.topRows(rank)};
}

/// Number of singular values above tol * max(sigma_max, 1).
template <typename Scalar>
Index numerical_rank(const SvdResult<Scalar>& s, Scalar tol = Scalar(1e-12)) {
  if (s.size() == 0) {
    return 0;
  }
  const Scalar scale = std::max(s.singular_values(0), Scalar(1));
  Index r = 0;
  while (r < s.size() && s.singular_values(r) > tol * scale) {
    ++r;
  }
  return r;
}

template <typename Scalar>
MatrixX<Scalar> weighted_sum(std::span<const MatrixX<Scalar>> matrices,
                             std::span<const Scalar> weights) {
  if (matrices.empty()) {
    throw DimensionError("weighted_sum: no matrices");
  }
  if (matrices.size() != weights.size()) {
    std::ostringstream os;
    os << "weighted_sum: " << matrices.size() << " matrices but " << weights.size()
       << " weights";
    throw DimensionError(os.str());
  }
  MatrixX<Scalar> out = MatrixX<Scalar>::Zero(matrices[0].rows(), matrices[0].cols());
  for (std::size_t i = 0; i < matrices.size(); ++i) {
    if (matrices[i].rows() != out.rows() || matrices[i].cols() != out.cols()) {
      throw DimensionError("weighted_sum: shape " + shape_of(matrices[i]) + " differs from " +
                           shape_of(out));
    }
    if (!(weights[i] >= Scalar(0))) {
      throw DimensionError("weighted_sum: weights must be nonnegative");
    }
    out += weights[i] * matrices[i];
  }
  return out;
}

/// Entries drawn in row-major order so the layout is independent of storage order.
template <typename Scalar = double>
MatrixX<Scalar> random_gaussian(SeededRng& rng, Index rows, Index cols, Scalar stddev) {
  if (!(stddev > Scalar(0))) {
    throw DimensionError("random_gaussian: std must be positive");
  }
  MatrixX<Scalar> out(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      out(i, j) = stddev * static_cast<Scalar>(rng.normal());
    }
  }
  return out;
}

}  // namespace linalg
}  // namespace hlora

#endif  // HLORA_LINALG_HPP
