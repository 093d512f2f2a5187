#include "hlora/selftest.hpp"

#include <Eigen/SVD>

#include <chrono>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "hlora/config.hpp"
#include "hlora/federation.hpp"
#include "hlora/metrics.hpp"
#include "hlora/oracles.hpp"

namespace hlora {
namespace selftest {

namespace {

class Checker {
 public:
  void expect(bool condition, const std::string& message) {
    ++checks_;
    if (!condition && failure_.empty()) {
      failure_ = message;
    }
  }
  void note(const std::string& text) { notes_ = text; }
  bool ok() const { return failure_.empty(); }
  std::string detail() const {
    if (!ok()) {
      return failure_;
    }
    std::ostringstream os;
    os << checks_ << " checks";
    if (!notes_.empty()) {
      os << ", " << notes_;
    }
    return os.str();
  }

 private:
  std::size_t checks_ = 0;
  std::string failure_;
  std::string notes_;
};

template <typename Body>
SuiteResult timed(const std::string& name, Body&& body) {
  const auto started = std::chrono::steady_clock::now();
  SuiteResult r{name, false, "", 0.0};
  try {
    Checker c;
    body(c);
    r.passed = c.ok();
    r.detail = c.detail();
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return r;
}

std::string sci(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(2) << v;
  return os.str();
}

// Smallest federation that still has two layers, heterogeneous ranks and
// Dirichlet shards.
federation::ExperimentSettings small_settings(std::uint64_t seed) {
  federation::ExperimentSettings s;
  s.seed = seed;
  s.clients = 20;
  s.sampled_per_round = 10;
  s.rounds = 10;
  s.synthetic.samples = 1200;
  s.synthetic.input_dim = 16;
  s.synthetic.hidden_dim = 16;
  s.synthetic.num_classes = 8;
  s.synthetic.true_rank = 3;
  s.test_samples = 400;
  s.alpha = 0.3;
  s.train.local_epochs = 1;
  return s;
}

Matrix best_scaled(const Matrix& target, const Matrix& candidate) {
  const double denom = candidate.squaredNorm();
  return denom > 0.0 ? Matrix((target.cwiseProduct(candidate).sum() / denom) * candidate)
                     : candidate;
}

}  // namespace

SuiteResult svd_round_trip() {
  return timed("svd_round_trip", [](Checker& c) {
    SeededRng rng(11, stream_id("selftest-svd"));
    const Index shapes[][2] = {{1, 1}, {1, 7}, {7, 1}, {5, 5}, {20, 30}, {30, 20},
                               {64, 64}, {64, 3}, {3, 64}, {17, 40}, {40, 17}, {64, 63}};
    for (const auto& shape : shapes) {
      const Matrix m = linalg::random_gaussian(rng, shape[0], shape[1], 1.0);
      const auto f = linalg::svd(m);
      const double rel = oracles::naive_frobenius_distance(
                             oracles::naive_matmul(f.u * f.singular_values.asDiagonal(), f.vt), m) /
                         std::max(oracles::naive_frobenius(m), 1e-12);
      c.expect(rel <= 1e-9, "reconstruction error " + sci(rel) + " on " + linalg::shape_of(m));
      const Index p = f.size();
      const double ortho_u =
          (f.u.transpose() * f.u - Matrix::Identity(p, p)).cwiseAbs().maxCoeff();
      const double ortho_v =
          (f.vt * f.vt.transpose() - Matrix::Identity(p, p)).cwiseAbs().maxCoeff();
      c.expect(ortho_u <= 1e-10 && ortho_v <= 1e-10, "factors not orthonormal on " +
                                                         linalg::shape_of(m));
      const Eigen::JacobiSVD<Matrix> reference(m);
      const double sv_gap =
          (reference.singularValues() - f.singular_values).cwiseAbs().maxCoeff();
      c.expect(sv_gap <= 1e-10 * std::max(1.0, reference.singularValues()(0)),
               "singular values differ from the reference by " + sci(sv_gap));
    }
    // Rank-deficient and zero inputs still give orthonormal u.
    Matrix low = linalg::random_gaussian(rng, 12, 2, 1.0) * linalg::random_gaussian(rng, 2, 9, 1.0);
    for (const Matrix& m : {low, Matrix(Matrix::Zero(6, 4))}) {
      const auto f = linalg::svd(m);
      const double ortho =
          (f.u.transpose() * f.u - Matrix::Identity(f.size(), f.size())).cwiseAbs().maxCoeff();
      c.expect(ortho <= 1e-10, "deficient input lost orthonormality");
      c.expect((f.reconstruct() - m).norm() <= 1e-9 * std::max(m.norm(), 1e-12),
               "deficient input reconstruction");
    }
  });
}

SuiteResult svd_determinism() {
  return timed("svd_determinism", [](Checker& c) {
    SeededRng rng(12, stream_id("selftest-det"));
    for (int t = 0; t < 10; ++t) {
      const Matrix m = linalg::random_gaussian(rng, 15 + t, 25 - t, 1.0);
      const auto a = linalg::svd(m);
      const auto b = linalg::svd(m);
      const bool same = a.u == b.u && a.singular_values == b.singular_values && a.vt == b.vt;
      c.expect(same, "svd differs between two calls");
    }
  });
}

SuiteResult weighted_sum_linearity() {
  return timed("weighted_sum_linearity", [](Checker& c) {
    SeededRng rng(13, stream_id("selftest-lin"));
    std::vector<Matrix> ms;
    std::vector<double> ws;
    for (int i = 0; i < 6; ++i) {
      ms.push_back(linalg::random_gaussian(rng, 7, 5, 1.0));
      ws.push_back(rng.uniform());
    }
    for (const double k : {0.0, 0.5, 3.0, 17.25}) {
      std::vector<double> scaled = ws;
      for (auto& w : scaled) {
        w *= k;
      }
      const Matrix lhs = linalg::weighted_sum<double>(ms, scaled);
      const Matrix rhs = k * linalg::weighted_sum<double>(ms, ws);
      c.expect((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12,
               "weighted_sum not linear at c=" + std::to_string(k));
    }
  });
}

SuiteResult eckart_young() {
  return timed("eckart_young", [](Checker& c) {
    double worst_margin = std::numeric_limits<double>::infinity();
    double worst_tail = 0.0;
    for (int t = 0; t < 100; ++t) {
      SeededRng rng(static_cast<std::uint64_t>(t), stream_id("selftest-ey"));
      const Matrix m = linalg::random_gaussian(rng, 20, 30, 1.0);
      const auto f = linalg::svd(m);
      for (const Index r : {1, 2, 4, 8}) {
        const auto adapter = lora::decompose(f, r);
        const double err =
            oracles::naive_frobenius_distance(m, oracles::naive_matmul(adapter.b, adapter.a));
        const double tail = oracles::tail_energy(f.singular_values, r);
        worst_tail = std::max(worst_tail, std::abs(err - tail));
        c.expect(std::abs(err - tail) <= 1e-9, "tail-energy identity off by " +
                                                    sci(std::abs(err - tail)));
        for (int k = 0; k < 50; ++k) {
          Matrix competitor;
          switch (k % 3) {
            case 0:
              // Random factors, optimally scaled.
              competitor = best_scaled(m, linalg::random_gaussian(rng, 20, r, 1.0) *
                                              linalg::random_gaussian(rng, r, 30, 1.0));
              break;
            case 1: {
              // Projection onto a random r-dimensional column space.
              const Eigen::HouseholderQR<Matrix> qr(linalg::random_gaussian(rng, 20, r, 1.0));
              const Matrix q = qr.householderQ() * Matrix::Identity(20, r);
              competitor = q * (q.transpose() * m);
              break;
            }
            default:
              // Small perturbation of the optimum.
              competitor = (adapter.b + linalg::random_gaussian(rng, 20, r, 1e-3)) *
                           (adapter.a + linalg::random_gaussian(rng, r, 30, 1e-3));
              break;
          }
          const double other = oracles::naive_frobenius_distance(m, competitor);
          worst_margin = std::min(worst_margin, other - err);
          c.expect(err <= other + 1e-9, "competitor beat the truncation at rank " +
                                            std::to_string(r));
        }
      }
    }
    c.note("closest competitor margin " + sci(worst_margin) + ", tail identity " +
           sci(worst_tail));
  });
}

SuiteResult lora_round_trip() {
  return timed("lora_round_trip", [](Checker& c) {
    SeededRng rng(14, stream_id("selftest-lora"));
    for (int t = 0; t < 20; ++t) {
      const Index d = 6 + t % 5;
      const Index k = 9 - t % 4;
      const Index rho = 1 + t % 4;
      const Matrix w = linalg::random_gaussian(rng, d, rho, 1.0) *
                       linalg::random_gaussian(rng, rho, k, 1.0);
      const Matrix before = w;
      for (Index r = rho; r <= std::min(d, k); ++r) {
        const auto adapter = lora::decompose(w, r);
        const Matrix merged = lora::merge(adapter);
        const double rel = oracles::naive_frobenius_distance(merged, w) / oracles::naive_frobenius(w);
        c.expect(rel <= 1e-9, "round trip error " + sci(rel) + " at rank " + std::to_string(r));
      }
      c.expect(w == before, "decompose altered its input");
    }
    // The merge example from the documentation.
    const lora::Adapter example{(Matrix(2, 1) << 1, 2).finished(), (Matrix(1, 2) << 3, 4).finished()};
    const Matrix expected = (Matrix(2, 2) << 3, 4, 6, 8).finished();
    c.expect(lora::merge(example) == expected, "merge example");
  });
}

SuiteResult lora_optimality() {
  return timed("lora_optimality", [](Checker& c) {
    SeededRng rng(15, stream_id("selftest-opt"));
    for (int t = 0; t < 10; ++t) {
      const Matrix w = linalg::random_gaussian(rng, 12, 16, 1.0);
      for (const Index r : {1, 3, 6}) {
        const double best = lora::approximation_error(w, lora::decompose(w, r));
        for (int k = 0; k < 50; ++k) {
          const lora::Adapter other{linalg::random_gaussian(rng, 12, r, 1.0),
                                    linalg::random_gaussian(rng, r, 16, 0.3)};
          c.expect(best <= lora::approximation_error(w, other) + 1e-9,
                   "random adapter beat decompose at rank " + std::to_string(r));
        }
      }
    }
  });
}

SuiteResult gradient_check() {
  return timed("gradient_check", [](Checker& c) {
    double worst = 0.0;
    std::size_t entries = 0;
    for (int point = 0; point < 10; ++point) {
      SeededRng rng(static_cast<std::uint64_t>(point), stream_id("selftest-grad"));
      const Index ranks[] = {3, 2};
      model::ToyModel m = model::make_model(rng, 6, 5, 4, ranks);
      for (auto& layer : m.layers) {
        layer.adapter.b = linalg::random_gaussian(rng, layer.adapter.b.rows(), layer.adapter.b.cols(), 0.5);
        layer.adapter.a = linalg::random_gaussian(rng, layer.adapter.a.rows(), layer.adapter.a.cols(), 0.5);
      }
      model::Batch batch;
      batch.features = linalg::random_gaussian(rng, 8, 6, 1.0);
      for (int i = 0; i < 8; ++i) {
        batch.labels.push_back(static_cast<int>(rng.uniform_int(0, 3)));
      }
      const auto analytic = model::backward(m, batch);
      const auto check = oracles::finite_difference_check(m, batch, analytic, 1e-5, 1e-8);
      worst = std::max(worst, check.max_relative_error);
      entries += check.entries;
      c.expect(check.max_relative_error <= 1e-6,
               "relative error " + sci(check.max_relative_error) + " at point " +
                   std::to_string(point));
    }
    c.note(std::to_string(entries) + " entries, max relative error " + sci(worst));
  });
}

SuiteResult frozen_base() {
  return timed("frozen_base", [](Checker& c) {
    SeededRng rng(16, stream_id("selftest-frozen"));
    const Index ranks[] = {2, 2};
    const model::ToyModel m = model::make_model(rng, 8, 6, 3, ranks);
    std::vector<std::vector<unsigned char>> before;
    for (const auto& layer : m.layers) {
      const auto* bytes = reinterpret_cast<const unsigned char*>(layer.w0.data());
      before.emplace_back(bytes, bytes + layer.w0.size() * sizeof(double));
    }
    const model::ToyModel copy = m;
    Matrix features = linalg::random_gaussian(rng, 40, 8, 1.0);
    std::vector<int> labels;
    std::vector<std::size_t> idx;
    for (int i = 0; i < 40; ++i) {
      labels.push_back(i % 3);
      idx.push_back(static_cast<std::size_t>(i));
    }
    const model::SampleView view{features, labels, idx};
    SeededRng train_rng(16, stream_id("selftest-frozen-train"));
    const auto trained = model::local_train(m, view, {0.2, 3, 8}, train_rng);
    (void)model::forward(m, features);
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
      const auto& w0 = trained.model.layers[l].w0;
      c.expect(std::memcmp(before[l].data(), w0.data(), before[l].size()) == 0,
               "w0 bytes changed by training in layer " + std::to_string(l));
      c.expect(m.layers[l].adapter.b == copy.layers[l].adapter.b &&
                   m.layers[l].adapter.a == copy.layers[l].adapter.a,
               "training mutated its input model");
    }
  });
}

SuiteResult update_rank() {
  return timed("update_rank", [](Checker& c) {
    for (int t = 0; t < 5; ++t) {
      SeededRng rng(static_cast<std::uint64_t>(t), stream_id("selftest-rank"));
      const Index ranks[] = {1 + t % 3, 1 + (t + 1) % 3};
      const model::ToyModel m = model::make_model(rng, 10, 8, 4, ranks);
      const Matrix features = linalg::random_gaussian(rng, 64, 10, 1.0);
      std::vector<int> labels;
      std::vector<std::size_t> idx;
      for (int i = 0; i < 64; ++i) {
        labels.push_back(static_cast<int>(rng.uniform_int(0, 3)));
        idx.push_back(static_cast<std::size_t>(i));
      }
      SeededRng train_rng(static_cast<std::uint64_t>(t), stream_id("selftest-rank-train"));
      const auto trained =
          model::local_train(m, {features, labels, idx}, {0.3, 4, 8}, train_rng);
      for (const auto& layer : trained.model.layers) {
        const Index rank = linalg::numerical_rank(linalg::svd(lora::merge(layer.adapter)), 1e-10);
        c.expect(rank <= layer.adapter.rank(), "update rank exceeds adapter rank");
      }
    }
  });
}

SuiteResult partition_properties() {
  return timed("partition_properties", [](Checker& c) {
    data::Dataset ds;
    ds.num_classes = 8;
    const std::size_t n = 4000;
    ds.features = Matrix::Zero(static_cast<Index>(n), 1);
    SeededRng label_rng(17, stream_id("selftest-labels"));
    for (std::size_t i = 0; i < n; ++i) {
      ds.labels.push_back(static_cast<int>(label_rng.uniform_int(0, 7)));
    }
    const double alphas[] = {0.1, 0.3, 1.0, 1000.0};
    for (const std::size_t k : {std::size_t{2}, std::size_t{10}, std::size_t{100}}) {
      double previous = std::numeric_limits<double>::infinity();
      for (const double alpha : alphas) {
        double skew = 0.0;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
          SeededRng rng(seed, stream_id("partition"));
          const auto p = data::dirichlet_partition(ds, k, alpha, 16, rng);
          std::vector<int> seen(n, 0);
          for (const auto& shard : p.shards) {
            c.expect(shard.size() >= 16, "shard below min_samples");
            for (const auto idx : shard) {
              ++seen[idx];
            }
          }
          c.expect(std::all_of(seen.begin(), seen.end(), [](int v) { return v == 1; }),
                   "partition not a disjoint cover");
          SeededRng again(seed, stream_id("partition"));
          c.expect(data::partition_hash(data::dirichlet_partition(ds, k, alpha, 16, again)) ==
                       data::partition_hash(p),
                   "partition not deterministic");
          skew += data::label_skew(ds, p) / 10.0;
        }
        c.expect(skew <= previous + 1e-12, "skew increased with alpha at K=" + std::to_string(k));
        previous = skew;
      }
    }
  });
}

SuiteResult bias_witness() {
  return timed("bias_witness", [](Checker& c) {
    const lora::Adapter one{(Matrix(2, 1) << 1, 0).finished(), (Matrix(1, 2) << 1, 0).finished()};
    const lora::Adapter two{(Matrix(2, 1) << 0, 1).finished(), (Matrix(1, 2) << 0, 1).finished()};
    const std::vector<lora::Adapter> clients{one, two};
    const federation::AggregationWeights w{{0.5, 0.5}};
    const Matrix naive = lora::merge(federation::aggregate_naive(clients, w));
    const Matrix hlora = federation::aggregate_hlora(clients, w);
    const double gap = federation::bias_gap(clients, w);
    c.expect((naive - Matrix::Constant(2, 2, 0.25)).norm() <= 1e-12, "naive product");
    c.expect((hlora - (Matrix(2, 2) << 0.5, 0, 0, 0.5).finished()).norm() <= 1e-12,
             "reconstructed update");
    c.expect(std::abs(gap - 0.5) <= 1e-12, "bias gap " + sci(gap));
    const std::vector<lora::Adapter> same{one, one};
    c.expect(federation::bias_gap(same, w) == 0.0, "identical clients have a nonzero gap");
    c.note("gap " + sci(gap));
  });
}

SuiteResult fedavg_equivalence() {
  return timed("fedavg_equivalence", [](Checker& c) {
    auto s = small_settings(3);
    s.strategy = federation::Strategy::hlora_heterogeneous;
    const auto prepared = federation::prepare_experiment(s);
    const auto fed = prepared.federation(s);
    auto state = prepared.state;
    double worst = 0.0;
    for (int r = 0; r < s.rounds; ++r) {
      auto outcome = federation::run_round(state, s.strategy, fed);
      for (std::size_t l = 0; l < state.layers(); ++l) {
        const Matrix expected = oracles::dense_average(outcome.uploads, l);
        const double gap =
            oracles::naive_frobenius_distance(outcome.state.global_update[l], expected);
        worst = std::max(worst, gap);
        c.expect(gap <= 1e-12, "round " + std::to_string(r + 1) + " layer " + std::to_string(l) +
                                   " differs from the dense average by " + sci(gap));
      }
      state = std::move(outcome.state);
    }
    c.note("max deviation " + sci(worst));
  });
}

SuiteResult lossless_rank_equivalence() {
  return timed("lossless_rank_equivalence", [](Checker& c) {
    // Single linear layer with three classes. Softmax gradients sum to zero
    // over classes, so an update whose columns are orthogonal to the ones
    // vector keeps rank <= 2 under training and aggregation.
    federation::ExperimentSettings s;
    s.seed = 5;
    s.clients = 10;
    s.sampled_per_round = 5;
    s.rounds = 10;
    s.rank = 2;
    s.rank_min = 2;
    s.rank_max = 3;
    s.synthetic.samples = 600;
    s.synthetic.input_dim = 10;
    s.synthetic.hidden_dim = 0;
    s.synthetic.num_classes = 3;
    s.synthetic.true_rank = 2;
    s.test_samples = 300;
    s.train.local_epochs = 2;

    const Matrix centre = Matrix::Identity(3, 3) - Matrix::Constant(3, 3, 1.0 / 3.0);
    SeededRng rng(5, stream_id("selftest-warm"));
    const Matrix warm = centre * linalg::random_gaussian(rng, 3, 10, 0.5);

    auto hetero = s;
    hetero.strategy = federation::Strategy::hlora_heterogeneous;
    auto homog = s;
    homog.strategy = federation::Strategy::hlora_homogeneous;
    const auto ph = federation::prepare_experiment(hetero);
    const auto pm = federation::prepare_experiment(homog);
    const auto fh = ph.federation(hetero);
    const auto fm = pm.federation(homog);
    auto sh = federation::warm_start(ph.state, {warm});
    auto sm = federation::warm_start(pm.state, {warm});
    double worst = 0.0;
    Index min_rank = 3;
    for (const auto& cl : ph.clients) {
      min_rank = std::min(min_rank, cl.ranks[0]);
    }
    bool mixed = false;
    for (const auto& cl : ph.clients) {
      mixed = mixed || cl.ranks[0] != min_rank;
    }
    c.expect(mixed, "rank draw produced a single rank; the check would be vacuous");
    for (int r = 0; r < s.rounds; ++r) {
      const Index rho = linalg::numerical_rank(linalg::svd(sh.global_update[0]), 1e-9);
      c.expect(rho <= min_rank, "update rank " + std::to_string(rho) + " exceeds the smallest client rank");
      auto oh = federation::run_round(sh, hetero.strategy, fh);
      auto om = federation::run_round(sm, homog.strategy, fm);
      const double gap = (oh.state.global_update[0] - om.state.global_update[0]).norm();
      worst = std::max(worst, gap);
      c.expect(gap <= 1e-9, "round " + std::to_string(r + 1) + " differs by " + sci(gap));
      c.expect(oh.report.test_accuracy == om.report.test_accuracy,
               "round " + std::to_string(r + 1) + " accuracy differs");
      sh = std::move(oh.state);
      sm = std::move(om.state);
    }
    c.note("max deviation " + sci(worst));
  });
}

SuiteResult degenerate_single_client() {
  return timed("degenerate_single_client", [](Checker& c) {
    auto s = small_settings(9);
    s.clients = 1;
    s.sampled_per_round = 1;
    s.rounds = 5;
    s.synthetic.samples = 300;
    s.rank = 4;
    s.rank_min = 4;
    s.rank_max = 4;
    const federation::Strategy all[] = {federation::Strategy::naive,
                                        federation::Strategy::hlora_homogeneous,
                                        federation::Strategy::hlora_heterogeneous};
    std::vector<std::vector<std::vector<Matrix>>> updates(3);
    for (std::size_t i = 0; i < 3; ++i) {
      auto run = s;
      run.strategy = all[i];
      const auto p = federation::prepare_experiment(run);
      const auto fed = p.federation(run);
      auto state = p.state;
      for (int r = 0; r < s.rounds; ++r) {
        auto outcome = federation::run_round(state, run.strategy, fed);
        c.expect(outcome.report.bias_gap.has_value() && *outcome.report.bias_gap <= 1e-12,
                 "single client has a nonzero bias gap");
        updates[i].push_back(outcome.state.global_update);
        state = std::move(outcome.state);
      }
    }
    // After one round every strategy holds the lone client's product.
    for (std::size_t i = 1; i < 3; ++i) {
      for (std::size_t l = 0; l < updates[0][0].size(); ++l) {
        c.expect((updates[i][0][l] - updates[0][0][l]).norm() <= 1e-9,
                 std::string(federation::to_string(all[i])) + " differs from naive after round 1");
      }
    }
    // Heterogeneous at a single shared rank is the homogeneous run.
    for (int r = 0; r < s.rounds; ++r) {
      for (std::size_t l = 0; l < updates[1][0].size(); ++l) {
        c.expect((updates[2][static_cast<std::size_t>(r)][l] -
                  updates[1][static_cast<std::size_t>(r)][l])
                         .norm() <= 1e-9,
                 "heterogeneous differs from homogeneous at round " + std::to_string(r + 1));
      }
    }
  });
}

SuiteResult replacement_semantics() {
  return timed("replacement_semantics", [](Checker& c) {
    auto s = small_settings(21);
    s.strategy = federation::Strategy::hlora_homogeneous;
    const auto p = federation::prepare_experiment(s);
    const auto fed = p.federation(s);
    SeededRng rng(21, stream_id("selftest-replace"));
    std::vector<Matrix> previous;
    for (const auto& b : p.state.base) {
      previous.push_back(linalg::random_gaussian(rng, b.rows(), b.cols(), 0.05));
    }
    const auto state = federation::warm_start(p.state, previous);
    const auto outcome = federation::run_round(state, s.strategy, fed);
    for (std::size_t l = 0; l < state.layers(); ++l) {
      std::vector<lora::Adapter> layer;
      for (const auto& u : outcome.uploads) {
        layer.push_back(u.adapters[l]);
      }
      const Matrix fresh = federation::aggregate_hlora(layer, outcome.weights);
      c.expect(outcome.state.global_update[l] == fresh,
               "layer " + std::to_string(l) + " update depends on more than this round's uploads");
    }
  });
}

SuiteResult serialization_round_trip() {
  return timed("serialization_round_trip", [](Checker& c) {
    SeededRng rng(22, stream_id("selftest-csv"));
    metrics::History h;
    for (int i = 0; i < 25; ++i) {
      metrics::RoundReport r;
      r.round = i + 1;
      r.strategy = i % 2 ? "naive" : "hlora_heterogeneous";
      r.seed = rng.next_u64();
      r.mean_train_loss = rng.normal() * 1e3;
      r.test_accuracy = rng.uniform();
      if (i % 3) {
        r.bias_gap = std::ldexp(rng.uniform(), -40 + i);
      }
      r.wall_ms = i * 7;
      h.push_back(r);
    }
    h.front().mean_train_loss = 0.1;
    h.back().test_accuracy = 1.0 / 3.0;
    c.expect(metrics::parse_results(metrics::format_results(h)) == h, "CSV round trip");
    c.expect(metrics::parse_results(metrics::format_results({})).empty(), "empty CSV round trip");

    cli::ExperimentConfig config = cli::parse_config_text("seed = 4\nalpha = 0.7\n");
    const auto again = cli::parse_config_text(cli::render_config(config));
    c.expect(cli::render_config(again) == cli::render_config(config), "config round trip");
  });
}

SuiteResult end_to_end_determinism() {
  return timed("end_to_end_determinism", [](Checker& c) {
    auto s = small_settings(31);
    s.rounds = 4;
    const auto first = metrics::format_results(federation::run_experiment(s).history);
    const auto second = metrics::format_results(federation::run_experiment(s).history);
    c.expect(first == second, "two identical runs wrote different CSV bytes");
    s.threads = 3;
    const auto threaded = metrics::format_results(federation::run_experiment(s).history);
    c.expect(first == threaded, "threaded run differs from the sequential run");
  });
}

const std::vector<Suite>& all_suites() {
  static const std::vector<Suite> suites = {
      {"svd_round_trip", svd_round_trip},
      {"svd_determinism", svd_determinism},
      {"weighted_sum_linearity", weighted_sum_linearity},
      {"eckart_young", eckart_young},
      {"lora_round_trip", lora_round_trip},
      {"lora_optimality", lora_optimality},
      {"gradient_check", gradient_check},
      {"frozen_base", frozen_base},
      {"update_rank", update_rank},
      {"partition_properties", partition_properties},
      {"bias_witness", bias_witness},
      {"fedavg_equivalence", fedavg_equivalence},
      {"lossless_rank_equivalence", lossless_rank_equivalence},
      {"degenerate_single_client", degenerate_single_client},
      {"replacement_semantics", replacement_semantics},
      {"serialization_round_trip", serialization_round_trip},
      {"end_to_end_determinism", end_to_end_determinism},
  };
  return suites;
}

std::vector<SuiteResult> run_all(std::ostream& out) {
  std::vector<SuiteResult> results;
  // Suites probe ranks near min(d, k) on purpose.
  std::ostream* previous = lora::set_warning_stream(nullptr);
  for (const auto& suite : all_suites()) {
    auto r = suite.run();
    out << (r.passed ? "PASS " : "FAIL ") << std::left << std::setw(28) << r.name << std::right
        << std::fixed << std::setprecision(2) << std::setw(7) << r.seconds << "s  " << r.detail
        << '\n';
    results.push_back(std::move(r));
  }
  std::size_t passed = 0;
  for (const auto& r : results) {
    passed += r.passed ? 1 : 0;
  }
  lora::set_warning_stream(previous);
  out << passed << "/" << results.size() << " suites passed\n";
  return results;
}

}  // namespace selftest
}  // namespace hlora
