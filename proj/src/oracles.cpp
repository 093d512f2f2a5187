#include "hlora/oracles.hpp"

#include <algorithm>
#include <cmath>

namespace hlora {
namespace oracles {

Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("naive_matmul: inner dimensions differ");
  }
  Matrix out(a.rows(), b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (Index k = 0; k < a.cols(); ++k) {
        acc += a(i, k) * b(k, j);
      }
      out(i, j) = acc;
    }
  }
  return out;
}

double naive_frobenius(const Matrix& m) {
  double acc = 0.0;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      acc += m(i, j) * m(i, j);
    }
  }
  return std::sqrt(acc);
}

double naive_frobenius_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("naive_frobenius_distance: shapes differ");
  }
  double acc = 0.0;
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      const double d = a(i, j) - b(i, j);
      acc += d * d;
    }
  }
  return std::sqrt(acc);
}

double lse_cross_entropy(const Matrix& logits, std::span<const int> labels) {
  double total = 0.0;
  for (Index i = 0; i < logits.rows(); ++i) {
    double top = logits(i, 0);
    for (Index c = 1; c < logits.cols(); ++c) {
      top = std::max(top, logits(i, c));
    }
    double sum = 0.0;
    for (Index c = 0; c < logits.cols(); ++c) {
      sum += std::exp(logits(i, c) - top);
    }
    total += top + std::log(sum) - logits(i, labels[static_cast<std::size_t>(i)]);
  }
  return total / static_cast<double>(logits.rows());
}

Matrix naive_forward(const std::vector<Matrix>& weights,
                     const std::vector<model::Activation>& activations, const Matrix& features) {
  Matrix h = features;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    Matrix z = naive_matmul(h, weights[l].transpose());
    if (activations[l] == model::Activation::rectifier) {
      for (Index i = 0; i < z.rows(); ++i) {
        for (Index j = 0; j < z.cols(); ++j) {
          z(i, j) = z(i, j) > 0.0 ? z(i, j) : 0.0;
        }
      }
    }
    h = std::move(z);
  }
  return h;
}

Matrix dense_average(const std::vector<federation::ClientUpload>& uploads, std::size_t layer) {
  double n = 0.0;
  for (const auto& u : uploads) {
    n += static_cast<double>(u.samples);
  }
  const auto& first = uploads.front().adapters[layer];
  Matrix out = Matrix::Zero(first.b.rows(), first.a.cols());
  for (const auto& u : uploads) {
    const Matrix product = naive_matmul(u.adapters[layer].b, u.adapters[layer].a);
    const double weight = static_cast<double>(u.samples) / n;
    for (Index i = 0; i < out.rows(); ++i) {
      for (Index j = 0; j < out.cols(); ++j) {
        out(i, j) += weight * product(i, j);
      }
    }
  }
  return out;
}

double per_sample_accuracy(const model::DenseModel& m, const data::Dataset& test) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const Matrix row = test.features.row(static_cast<Index>(i));
    const Matrix logits = naive_forward(m.weights, m.activations, row);
    Index best = 0;
    for (Index c = 1; c < logits.cols(); ++c) {
      if (logits(0, c) > logits(0, best)) {
        best = c;
      }
    }
    correct += best == test.labels[i] ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

double tail_energy(const Vector& singular_values, Index rank) {
  double acc = 0.0;
  for (Index i = rank; i < singular_values.size(); ++i) {
    acc += singular_values(i) * singular_values(i);
  }
  return std::sqrt(acc);
}

namespace {

double oracle_loss(const model::ToyModel& m, const model::Batch& batch) {
  std::vector<Matrix> weights;
  std::vector<model::Activation> acts;
  for (const auto& layer : m.layers) {
    Matrix w = naive_matmul(layer.adapter.b, layer.adapter.a);
    for (Index i = 0; i < w.rows(); ++i) {
      for (Index j = 0; j < w.cols(); ++j) {
        w(i, j) += layer.w0(i, j);
      }
    }
    weights.push_back(std::move(w));
    acts.push_back(layer.activation);
  }
  return lse_cross_entropy(naive_forward(weights, acts, batch.features), batch.labels);
}

}  // namespace

GradientCheck finite_difference_check(const model::ToyModel& m, const model::Batch& batch,
                                      const std::vector<model::LayerGradient>& analytic, double h,
                                      double floor) {
  GradientCheck out;
  model::ToyModel probe = m;
  auto check_entry = [&](double& param, double exact) {
    const double saved = param;
    param = saved + h;
    const double up = oracle_loss(probe, batch);
    param = saved - h;
    const double down = oracle_loss(probe, batch);
    param = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(exact), std::abs(numeric), floor});
    out.max_relative_error = std::max(out.max_relative_error, std::abs(exact - numeric) / denom);
    ++out.entries;
  };
  for (std::size_t l = 0; l < probe.layers.size(); ++l) {
    auto& adapter = probe.layers[l].adapter;
    for (Index i = 0; i < adapter.b.rows(); ++i) {
      for (Index j = 0; j < adapter.b.cols(); ++j) {
        check_entry(adapter.b(i, j), analytic[l].d_b(i, j));
      }
    }
    for (Index i = 0; i < adapter.a.rows(); ++i) {
      for (Index j = 0; j < adapter.a.cols(); ++j) {
        check_entry(adapter.a(i, j), analytic[l].d_a(i, j));
      }
    }
  }
  return out;
}

}  // namespace oracles
}  // namespace hlora
