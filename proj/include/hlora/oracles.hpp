#ifndef HLORA_ORACLES_HPP
#define HLORA_ORACLES_HPP

// Reference computations for verification. Plain loops only: nothing here
// calls the Eigen products, SVD, loss or aggregation code it is used to check.

#include <span>
#include <vector>

#include "hlora/data.hpp"
#include "hlora/federation.hpp"
#include "hlora/model.hpp"

namespace hlora {
namespace oracles {

Matrix naive_matmul(const Matrix& a, const Matrix& b);
double naive_frobenius(const Matrix& m);
double naive_frobenius_distance(const Matrix& a, const Matrix& b);

/// Mean cross-entropy with an explicit max-shifted log-sum-exp per row.
double lse_cross_entropy(const Matrix& logits, std::span<const int> labels);

Matrix naive_forward(const std::vector<Matrix>& weights,
                     const std::vector<model::Activation>& activations, const Matrix& features);

/// sum_k (n_k / n) B_k A_k for one layer of a round's uploads.
Matrix dense_average(const std::vector<federation::ClientUpload>& uploads, std::size_t layer);

/// Accuracy by looping over samples one at a time (ties to the lowest class).
double per_sample_accuracy(const model::DenseModel& m, const data::Dataset& test);

/// sqrt of the sum of squared singular values from index `rank` on.
double tail_energy(const Vector& singular_values, Index rank);

struct GradientCheck {
  double max_relative_error = 0.0;
  std::size_t entries = 0;
};

/// Central differences of the mean loss in every adapter entry, compared
/// with `analytic`. Relative error is |a - f| / max(|a|, |f|, floor).
GradientCheck finite_difference_check(const model::ToyModel& m, const model::Batch& batch,
                                      const std::vector<model::LayerGradient>& analytic, double h,
                                      double floor);

}  // namespace oracles
}  // namespace hlora

#endif  // HLORA_ORACLES_HPP
