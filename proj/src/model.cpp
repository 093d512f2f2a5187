#include "hlora/model.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace hlora {
namespace model {

namespace {

Matrix apply(Activation act, Matrix z) {
  if (act == Activation::rectifier) {
    z = z.cwiseMax(0.0);
  }
  return z;
}

void check_features(Index expected, const Matrix& features) {
  if (features.cols() != expected) {
    std::ostringstream os;
    os << "forward: features have " << features.cols() << " columns, model expects " << expected;
    throw DimensionError(os.str());
  }
}

double log_sum_exp(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  const double top = row.maxCoeff();
  return top + std::log((row.array() - top).exp().sum());
}

}  // namespace

void ToyModel::validate() const {
  if (layers.empty()) {
    throw DimensionError("ToyModel: no layers");
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& layer = layers[i];
    layer.adapter.validate();
    if (layer.adapter.rows() != layer.w0.rows() || layer.adapter.cols() != layer.w0.cols()) {
      std::ostringstream os;
      os << "ToyModel: layer " << i << " adapter does not match w0 " << linalg::shape_of(layer.w0);
      throw DimensionError(os.str());
    }
    if (i + 1 < layers.size() && layer.output_dim() != layers[i + 1].input_dim()) {
      std::ostringstream os;
      os << "ToyModel: layer " << i << " outputs " << layer.output_dim() << " but layer " << i + 1
         << " expects " << layers[i + 1].input_dim();
      throw DimensionError(os.str());
    }
  }
  if (layers.back().activation != Activation::identity) {
    throw DimensionError("ToyModel: final layer must produce raw logits");
  }
}

void TrainSettings::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be a finite nonnegative number");
  }
  if (local_epochs < 1) {
    throw ConfigError("local_epochs must be positive");
  }
  if (batch_size < 1) {
    throw ConfigError("batch_size must be positive");
  }
}

DenseModel to_dense(const ToyModel& m) {
  DenseModel out;
  for (const auto& layer : m.layers) {
    out.weights.push_back(layer.effective_weight());
    out.activations.push_back(layer.activation);
  }
  return out;
}

Matrix forward(const ToyModel& m, const Matrix& features) {
  check_features(m.input_dim(), features);
  Matrix h = features;
  for (const auto& layer : m.layers) {
    h = apply(layer.activation, h * layer.effective_weight().transpose());
  }
  return h;
}

Matrix forward(const DenseModel& m, const Matrix& features) {
  check_features(m.weights.front().cols(), features);
  Matrix h = features;
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    h = apply(m.activations[l], h * m.weights[l].transpose());
  }
  return h;
}

double loss(const Matrix& logits, std::span<const int> labels) {
  if (static_cast<std::size_t>(logits.rows()) != labels.size()) {
    throw DimensionError("loss: logits rows and label count differ");
  }
  if (labels.empty()) {
    return 0.0;
  }
  double total = 0.0;
  for (Index i = 0; i < logits.rows(); ++i) {
    total += log_sum_exp(logits.row(i)) - logits(i, labels[static_cast<std::size_t>(i)]);
  }
  return total / static_cast<double>(labels.size());
}

std::vector<LayerGradient> backward(const ToyModel& m, const Batch& batch) {
  check_features(m.input_dim(), batch.features);
  const auto n = static_cast<double>(batch.labels.size());
  const std::size_t depth = m.layers.size();

  std::vector<Matrix> weights(depth);
  std::vector<Matrix> inputs(depth);
  std::vector<Matrix> pre(depth);
  Matrix h = batch.features;
  for (std::size_t l = 0; l < depth; ++l) {
    weights[l] = m.layers[l].effective_weight();
    inputs[l] = h;
    pre[l] = h * weights[l].transpose();
    h = apply(m.layers[l].activation, pre[l]);
  }

  // Softmax minus one-hot, averaged over the batch.
  Matrix dz = h;
  for (Index i = 0; i < dz.rows(); ++i) {
    const double lse = log_sum_exp(h.row(i));
    dz.row(i) = (h.row(i).array() - lse).exp().matrix();
    dz(i, batch.labels[static_cast<std::size_t>(i)]) -= 1.0;
  }
  dz /= n;

  std::vector<LayerGradient> grads(depth);
  for (std::size_t l = depth; l-- > 0;) {
    const auto& adapter = m.layers[l].adapter;
    const Matrix g = dz.transpose() * inputs[l];
    grads[l].d_b = g * adapter.a.transpose();
    grads[l].d_a = adapter.b.transpose() * g;
    if (l > 0) {
      Matrix dh = dz * weights[l];
      if (m.layers[l - 1].activation == Activation::rectifier) {
        dh = dh.cwiseProduct((pre[l - 1].array() > 0.0).cast<double>().matrix());
      }
      dz = std::move(dh);
    }
  }
  return grads;
}

Batch gather(const SampleView& view, std::span<const std::size_t> positions) {
  Batch batch;
  batch.features.resize(static_cast<Index>(positions.size()), view.features.cols());
  batch.labels.resize(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const std::size_t idx = view.indices[positions[i]];
    batch.features.row(static_cast<Index>(i)) = view.features.row(static_cast<Index>(idx));
    batch.labels[i] = view.labels[idx];
  }
  return batch;
}

TrainResult local_train(const ToyModel& m, const SampleView& shard, const TrainSettings& settings,
                        SeededRng& rng) {
  settings.validate();
  if (shard.indices.empty()) {
    throw DimensionError("local_train: empty shard");
  }
  TrainResult out{m, {}};
  std::vector<std::size_t> order(shard.indices.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const Batch whole = gather(shard, order);
  const auto batch_size = static_cast<std::size_t>(settings.batch_size);

  for (int epoch = 0; epoch < settings.local_epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t stop = std::min(order.size(), start + batch_size);
      const Batch batch = gather(shard, std::span<const std::size_t>(order).subspan(start, stop - start));
      const auto grads = backward(out.model, batch);
      for (std::size_t l = 0; l < grads.size(); ++l) {
        auto& adapter = out.model.layers[l].adapter;
        adapter.b -= settings.learning_rate * grads[l].d_b;
        adapter.a -= settings.learning_rate * grads[l].d_a;
      }
    }
    out.epoch_losses.push_back(loss(forward(out.model, whole.features), whole.labels));
  }
  if (!std::isfinite(out.epoch_losses.back())) {
    throw NumericalError("local_train: loss diverged; lower learning_rate");
  }
  return out;
}

ToyModel make_model(SeededRng& rng, Index input_dim, Index hidden_dim, Index num_classes,
                    std::span<const Index> ranks, double init_std) {
  std::vector<std::pair<Index, Index>> shapes;
  if (hidden_dim > 0) {
    shapes = {{hidden_dim, input_dim}, {num_classes, hidden_dim}};
  } else {
    shapes = {{num_classes, input_dim}};
  }
  if (ranks.size() != shapes.size()) {
    throw DimensionError("make_model: need one rank per layer");
  }
  ToyModel m;
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    const auto [out_dim, in_dim] = shapes[l];
    Layer layer;
    layer.w0 = linalg::random_gaussian(rng, out_dim, in_dim, 1.0 / std::sqrt(static_cast<double>(in_dim)));
    layer.adapter = lora::init_adapter(rng, out_dim, in_dim, ranks[l], init_std);
    layer.activation = l + 1 < shapes.size() ? Activation::rectifier : Activation::identity;
    m.layers.push_back(std::move(layer));
  }
  return m;
}

}  // namespace model
}  // namespace hlora
