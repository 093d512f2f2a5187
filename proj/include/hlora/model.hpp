#ifndef HLORA_MODEL_HPP
#define HLORA_MODEL_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "hlora/linalg.hpp"
#include "hlora/lora.hpp"

namespace hlora {
namespace model {

enum class Activation { identity, rectifier };

/// One adapted layer: output = act(input * (w0 + b a)^T). w0 is (out x in).
struct Layer {
  Matrix w0;
  lora::Adapter adapter;
  Activation activation = Activation::identity;

  Index input_dim() const { return w0.cols(); }
  Index output_dim() const { return w0.rows(); }
  Matrix effective_weight() const { return w0 + lora::merge(adapter); }
};

/// Frozen base weights plus one LoRA adapter per layer. Biases are absent so
/// every trainable parameter lives in an adapter.
struct ToyModel {
  std::vector<Layer> layers;

  Index input_dim() const { return layers.front().input_dim(); }
  Index num_classes() const { return layers.back().output_dim(); }
  /// Throws DimensionError on broken layer chaining or a non-identity head.
  void validate() const;
};

/// Fixed dense weights for evaluation (base plus an aggregated update).
struct DenseModel {
  std::vector<Matrix> weights;
  std::vector<Activation> activations;

  Index num_classes() const { return weights.back().rows(); }
};

DenseModel to_dense(const ToyModel& m);

struct Batch {
  Matrix features;  // batch_size x input_dim
  std::vector<int> labels;
};

struct LayerGradient {
  Matrix d_b;
  Matrix d_a;
};

struct TrainSettings {
  double learning_rate = 0.05;
  int local_epochs = 2;
  int batch_size = 16;

  void validate() const;
};

/// Labelled samples a client trains on. Rows of `features` pair with `labels`.
struct SampleView {
  const Matrix& features;
  std::span<const int> labels;
  std::span<const std::size_t> indices;
};

struct TrainResult {
  ToyModel model;
  /// Loss over the whole shard after each epoch.
  std::vector<double> epoch_losses;
};

Matrix forward(const ToyModel& m, const Matrix& features);
Matrix forward(const DenseModel& m, const Matrix& features);

/// Mean softmax cross-entropy.
double loss(const Matrix& logits, std::span<const int> labels);

std::vector<LayerGradient> backward(const ToyModel& m, const Batch& batch);

TrainResult local_train(const ToyModel& m, const SampleView& shard, const TrainSettings& settings,
                        SeededRng& rng);

Batch gather(const SampleView& view, std::span<const std::size_t> positions);

/// Two-layer rectifier MLP (input -> hidden -> classes) or a single linear
/// layer when hidden_dim == 0. Base weights ~ N(0, 1/fan_in); adapters at
/// `ranks[l]` with the standard zero-b start.
ToyModel make_model(SeededRng& rng, Index input_dim, Index hidden_dim, Index num_classes,
                    std::span<const Index> ranks, double init_std = 0.02);

}  // namespace model
}  // namespace hlora

#endif  // HLORA_MODEL_HPP
