#include "hlora/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace hlora {
namespace data {

namespace {

int argmax_row(const Matrix& logits, Index row) {
  Index best = 0;
  for (Index c = 1; c < logits.cols(); ++c) {
    if (logits(row, c) > logits(row, best)) {
      best = c;
    }
  }
  return static_cast<int>(best);
}

std::vector<int> class_counts(const Dataset& d) {
  std::vector<int> counts(static_cast<std::size_t>(d.num_classes), 0);
  for (const int y : d.labels) {
    ++counts[static_cast<std::size_t>(y)];
  }
  return counts;
}

}  // namespace

void Dataset::validate() const {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw DimensionError("Dataset: feature rows and label count differ");
  }
  if (num_classes < 1) {
    throw DimensionError("Dataset: num_classes must be positive");
  }
  std::vector<bool> seen(static_cast<std::size_t>(num_classes), false);
  for (const int y : labels) {
    if (y < 0 || y >= num_classes) {
      throw DimensionError("Dataset: label " + std::to_string(y) + " outside [0, " +
                           std::to_string(num_classes) + ")");
    }
    seen[static_cast<std::size_t>(y)] = true;
  }
  for (int c = 0; c < num_classes; ++c) {
    if (!seen[static_cast<std::size_t>(c)]) {
      throw DimensionError("Dataset: class " + std::to_string(c) + " has no samples");
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.num_classes = num_classes;
  out.features.resize(static_cast<Index>(indices.size()), features.cols());
  out.labels.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out.features.row(static_cast<Index>(i)) = features.row(static_cast<Index>(indices[i]));
    out.labels.push_back(labels[indices[i]]);
  }
  return out;
}

std::vector<std::size_t> Partition::sizes() const {
  std::vector<std::size_t> out;
  out.reserve(shards.size());
  for (const auto& s : shards) {
    out.push_back(s.size());
  }
  return out;
}

std::size_t Partition::total() const {
  std::size_t n = 0;
  for (const auto& s : shards) {
    n += s.size();
  }
  return n;
}

Dataset draw_samples(const model::ToyModel& planted, SeededRng& rng, std::size_t count,
                     double label_noise) {
  if (!(label_noise >= 0.0 && label_noise < 0.5)) {
    throw ConfigError("label_noise must lie in [0, 0.5)");
  }
  Dataset out;
  out.num_classes = static_cast<int>(planted.num_classes());
  out.features = linalg::random_gaussian(rng, static_cast<Index>(count), planted.input_dim(), 1.0);
  const Matrix logits = model::forward(planted, out.features);
  out.labels.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    int y = argmax_row(logits, static_cast<Index>(i));
    if (label_noise > 0.0 && rng.uniform() < label_noise && out.num_classes > 1) {
      // Uniform over the other classes.
      const auto other = static_cast<int>(rng.uniform_int(0, out.num_classes - 2));
      y = other >= y ? other + 1 : other;
    }
    out.labels[i] = y;
  }
  return out;
}

Synthetic generate_synthetic(SeededRng& rng, const SyntheticSpec& spec) {
  if (spec.num_classes < 2) {
    throw ConfigError("num_classes must be at least 2");
  }
  std::vector<std::pair<Index, Index>> shapes;
  if (spec.hidden_dim > 0) {
    shapes = {{spec.hidden_dim, spec.input_dim}, {spec.num_classes, spec.hidden_dim}};
  } else {
    shapes = {{spec.num_classes, spec.input_dim}};
  }
  for (const auto& [d, k] : shapes) {
    if (spec.true_rank < 1 || spec.true_rank > std::min(d, k)) {
      std::ostringstream os;
      os << "true_rank " << spec.true_rank << " infeasible for a " << d << "x" << k << " layer";
      throw ConfigError(os.str());
    }
  }

  Synthetic out;
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    const auto [d, k] = shapes[l];
    model::Layer layer;
    layer.w0 = linalg::random_gaussian(rng, d, k, 1.0 / std::sqrt(static_cast<double>(k)));
    lora::Adapter delta{linalg::random_gaussian(rng, d, spec.true_rank, 1.0),
                        linalg::random_gaussian(rng, spec.true_rank, k, 1.0)};
    if (l > 0) {
      // Rectified hidden units have mean |w_j| / sqrt(2 pi) under N(0, I)
      // inputs. Removing that direction from the head keeps classes balanced.
      const Matrix& w1 = out.planted.layers.front().effective_weight();
      const Vector mean = w1.rowwise().norm().normalized();
      const Matrix projector = Matrix::Identity(k, k) - mean * mean.transpose();
      layer.w0 = layer.w0 * projector;
      delta.a = delta.a * projector;
    }
    const double scale =
        spec.delta_scale * layer.w0.norm() / std::max(lora::merge(delta).norm(), 1e-300);
    delta.b *= std::sqrt(scale);
    delta.a *= std::sqrt(scale);
    if (l > 0) {
      // Equal logit spread per class on a pilot sample. Row scaling keeps
      // the delta at rank true_rank.
      SeededRng pilot_rng(rng.next_u64(), stream_id("pilot"));
      const Matrix x = linalg::random_gaussian(pilot_rng, 2048, spec.input_dim, 1.0);
      const Matrix h = (x * out.planted.layers.front().effective_weight().transpose()).cwiseMax(0.0);
      const Matrix z = h * (layer.w0 + lora::merge(delta)).transpose();
      const Matrix centred = z.rowwise() - z.colwise().mean();
      const Vector spread = (centred.colwise().squaredNorm() / static_cast<double>(z.rows()))
                                .cwiseSqrt()
                                .transpose();
      const Vector gain = (spread.mean() / spread.array().max(1e-300)).matrix();
      layer.w0 = gain.asDiagonal() * layer.w0;
      delta.b = gain.asDiagonal() * delta.b;
    }
    layer.adapter = std::move(delta);
    layer.activation =
        l + 1 < shapes.size() ? model::Activation::rectifier : model::Activation::identity;
    out.planted.layers.push_back(std::move(layer));
  }
  out.dataset = draw_samples(out.planted, rng, spec.samples, spec.label_noise);
  out.dataset.validate();
  return out;
}

Partition dirichlet_partition(const Dataset& dataset, std::size_t clients, double alpha,
                              std::size_t min_samples, SeededRng& rng, int max_retries) {
  if (clients < 1) {
    throw ConfigError("clients must be at least 1");
  }
  if (!(alpha > 0.0)) {
    throw ConfigError("alpha must be positive");
  }
  min_samples = std::max<std::size_t>(min_samples, 1);
  if (dataset.size() < clients * min_samples) {
    std::ostringstream os;
    os << "dirichlet_partition: " << dataset.size() << " samples cannot give " << clients
       << " clients " << min_samples << " samples each";
    throw ConfigError(os.str());
  }

  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(dataset.num_classes));
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    by_class[static_cast<std::size_t>(dataset.labels[i])].push_back(i);
  }

  auto draw = [&] {
    Partition p;
    p.shards.resize(clients);
    for (auto& members : by_class) {
      std::vector<std::size_t> pool = members;
      rng.shuffle(std::span<std::size_t>(pool));
      const auto share = rng.dirichlet(alpha, clients);
      double cumulative = 0.0;
      std::size_t begin = 0;
      for (std::size_t k = 0; k < clients; ++k) {
        cumulative += share[k];
        std::size_t end = k + 1 == clients
                              ? pool.size()
                              : static_cast<std::size_t>(std::floor(cumulative * static_cast<double>(pool.size())));
        end = std::clamp(end, begin, pool.size());
        p.shards[k].insert(p.shards[k].end(), pool.begin() + static_cast<std::ptrdiff_t>(begin),
                           pool.begin() + static_cast<std::ptrdiff_t>(end));
        begin = end;
      }
    }
    return p;
  };
  auto deficit = [&](const Partition& p) {
    std::size_t missing = 0;
    for (const auto& s : p.shards) {
      missing += s.size() < min_samples ? min_samples - s.size() : 0;
    }
    return missing;
  };

  Partition best = draw();
  for (int attempt = 0; attempt < max_retries && deficit(best) > 0; ++attempt) {
    Partition next = draw();
    if (deficit(next) < deficit(best)) {
      best = std::move(next);
    }
  }

  // Small alpha with many clients rarely satisfies min_samples on a whole
  // redraw; top up each short shard with random samples of the largest one.
  for (std::size_t k = 0; k < clients; ++k) {
    auto& shard = best.shards[k];
    while (shard.size() < min_samples) {
      std::size_t donor = 0;
      for (std::size_t j = 1; j < clients; ++j) {
        if (best.shards[j].size() > best.shards[donor].size()) {
          donor = j;
        }
      }
      auto& source = best.shards[donor];
      if (donor == k || source.size() <= min_samples) {
        throw ConfigError("dirichlet_partition: cannot satisfy min_samples after " +
                          std::to_string(max_retries) + " retries");
      }
      const auto pick = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(source.size()) - 1));
      shard.push_back(source[pick]);
      source.erase(source.begin() + static_cast<std::ptrdiff_t>(pick));
    }
  }
  for (auto& shard : best.shards) {
    std::sort(shard.begin(), shard.end());
  }
  return best;
}

Partition iid_partition(const Dataset& dataset, std::size_t clients, SeededRng& rng) {
  if (clients < 1 || clients > dataset.size()) {
    throw ConfigError("iid_partition: clients (" + std::to_string(clients) +
                      ") must lie in [1, samples=" + std::to_string(dataset.size()) + "]");
  }
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));
  Partition p;
  p.shards.resize(clients);
  const std::size_t base = dataset.size() / clients;
  const std::size_t extra = dataset.size() % clients;
  std::size_t begin = 0;
  for (std::size_t k = 0; k < clients; ++k) {
    const std::size_t len = base + (k < extra ? 1 : 0);
    p.shards[k].assign(order.begin() + static_cast<std::ptrdiff_t>(begin),
                       order.begin() + static_cast<std::ptrdiff_t>(begin + len));
    std::sort(p.shards[k].begin(), p.shards[k].end());
    begin += len;
  }
  return p;
}

std::uint64_t shard_hash(std::span<const std::size_t> shard) {
  std::uint64_t h = splitmix64(shard.size());
  for (const auto idx : shard) {
    h = splitmix64(h ^ idx);
  }
  return h;
}

std::uint64_t partition_hash(const Partition& p) {
  std::uint64_t h = splitmix64(p.shards.size());
  for (const auto& s : p.shards) {
    h = splitmix64(h ^ shard_hash(s));
  }
  return h;
}

double label_skew(const Dataset& dataset, const Partition& p) {
  const auto global = class_counts(dataset);
  const auto n = static_cast<double>(dataset.size());
  double total = 0.0;
  for (const auto& shard : p.shards) {
    std::vector<double> local(global.size(), 0.0);
    for (const auto idx : shard) {
      local[static_cast<std::size_t>(dataset.labels[idx])] += 1.0;
    }
    double l1 = 0.0;
    for (std::size_t c = 0; c < global.size(); ++c) {
      const double q = shard.empty() ? 0.0 : local[c] / static_cast<double>(shard.size());
      l1 += std::abs(q - global[c] / n);
    }
    total += l1;
  }
  return total / static_cast<double>(p.shards.size());
}

Dataset read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open dataset " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw ConfigError(path.string() + ": empty file");
  }
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      header.push_back(cell);
    }
  }
  if (header.size() < 2 || header[0] != "label") {
    throw ConfigError(path.string() + ": header must be label,f0,f1,...");
  }
  for (std::size_t j = 1; j < header.size(); ++j) {
    if (header[j] != "f" + std::to_string(j - 1)) {
      throw ConfigError(path.string() + ": unexpected header column '" + header[j] + "'");
    }
  }
  const std::size_t dims = header.size() - 1;

  std::vector<double> values;
  std::vector<int> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    std::size_t col = 0;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p <= end) {
      const char* comma = std::find(p, end, ',');
      if (col == 0) {
        int y = 0;
        const auto r = std::from_chars(p, comma, y);
        if (r.ec != std::errc() || r.ptr != comma || y < 0) {
          throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": bad label");
        }
        labels.push_back(y);
      } else {
        double v = 0.0;
        const auto r = std::from_chars(p, comma, v);
        if (r.ec != std::errc() || r.ptr != comma || !std::isfinite(v)) {
          throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": bad value in f" +
                            std::to_string(col - 1));
        }
        values.push_back(v);
      }
      ++col;
      p = comma + 1;
    }
    if (col != dims + 1) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(dims + 1) + " fields, got " + std::to_string(col));
    }
  }
  Dataset out;
  out.labels = std::move(labels);
  out.features.resize(static_cast<Index>(out.labels.size()), static_cast<Index>(dims));
  for (std::size_t i = 0; i < out.labels.size(); ++i) {
    for (std::size_t j = 0; j < dims; ++j) {
      out.features(static_cast<Index>(i), static_cast<Index>(j)) = values[i * dims + j];
    }
  }
  out.num_classes = out.labels.empty() ? 0 : *std::max_element(out.labels.begin(), out.labels.end()) + 1;
  out.validate();
  return out;
}

void write_csv(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write dataset " + path.string());
  }
  out << "label";
  for (Index j = 0; j < dataset.features.cols(); ++j) {
    out << ",f" << j;
  }
  out << '\n';
  char buf[32];
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    out << dataset.labels[i];
    for (Index j = 0; j < dataset.features.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", dataset.features(static_cast<Index>(i), j));
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace data
}  // namespace hlora
