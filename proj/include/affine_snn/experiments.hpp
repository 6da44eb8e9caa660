#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "affine_snn/affine.hpp"
#include "affine_snn/bounds.hpp"
#include "affine_snn/constructors.hpp"
#include "affine_snn/error.hpp"
#include "affine_snn/idx.hpp"
#include "affine_snn/results.hpp"
#include "affine_snn/rng.hpp"
#include "affine_snn/serialize.hpp"
#include "affine_snn/spike.hpp"
#include "affine_snn/training.hpp"

namespace affine_snn {

// Typed access to a JSON config object; unknown keys are rejected by finish().
class ConfigReader {
 public:
  ConfigReader(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError(name_ + " config must be a JSON object");
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    used_.insert(key);
    if (!j_.contains(key)) return fallback;
    return convert<T>(key);
  }

  template <typename T>
  T require(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) throw ConfigError(name_ + " config is missing '" + key + "'");
    return convert<T>(key);
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  void finish() const {
    for (const auto& item : j_.items())
      if (!used_.count(item.key())) throw ConfigError(name_ + " config has unknown key '" + item.key() + "'");
  }

 private:
  template <typename T>
  T convert(const std::string& key) const {
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(name_ + " config key '" + key + "' has the wrong type");
    }
  }

  const json& j_;
  std::string name_;
  std::set<std::string> used_;
};

// Allowance for the final rounding of a computed output of magnitude `scale`.
inline double rounding_allowance(double scale) {
  return 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(scale));
}

// ---------------------------------------------------------------- min / max

struct MinMaxConfig {
  std::vector<double> eps_grid{1e-4, 1e-3, 1e-2, 1e-1};
  std::size_t d0_min = 784;
  std::size_t d0_max = 1;
  std::size_t samples = 1000;
  std::uint64_t seed = 0;

  static MinMaxConfig from_json(const json& j) {
    ConfigReader r(j, "minmax");
    MinMaxConfig c;
    c.seed = r.require<std::uint64_t>("seed");
    c.eps_grid = r.get("eps_grid", c.eps_grid);
    c.d0_min = r.get("d0_min", c.d0_min);
    c.d0_max = r.get("d0_max", c.d0_max);
    c.samples = r.get("samples", c.samples);
    r.finish();
    if (c.eps_grid.empty()) throw ConfigError("eps_grid must be nonempty");
    for (double e : c.eps_grid)
      if (!(e > 0.0)) throw ConfigError("eps_grid entries must be positive");
    if (c.d0_min == 0 || c.d0_max == 0 || c.samples == 0) throw ConfigError("dimensions and samples must be positive");
    return c;
  }
};

struct MinMaxRecord {
  std::string op;  // "min" or "max"
  double eps = 0.0;
  double max_error = 0.0;
  double min_offset = 0.0;  // smallest signed (output - target) for min, (target - output) for max
  bool within_bound = false;
};

// Emulated min over d0_min inputs and max over d0_max inputs, evaluated on
// U(-0.5, 0.5) samples. Throws AssertFailed if an error exceeds eps.
inline std::vector<MinMaxRecord> run_minmax(const MinMaxConfig& cfg) {
  std::vector<MinMaxRecord> out;
  for (std::size_t k = 0; k < cfg.eps_grid.size(); ++k) {
    const double eps = cfg.eps_grid[k];
    for (const std::string op : {"min", "max"}) {
      const bool is_min = op == "min";
      const std::size_t d0 = is_min ? cfg.d0_min : cfg.d0_max;
      const AffineSnn net = is_min ? build_min_net(d0, eps) : build_max_net(d0, eps);
      Rng rng = Rng(cfg.seed).fork(2 * k + (is_min ? 0 : 1));
      MinMaxRecord rec{op, eps, 0.0, std::numeric_limits<double>::infinity(), true};
      std::vector<double> x(d0);
      for (std::size_t s = 0; s < cfg.samples; ++s) {
        for (double& v : x) v = rng.uniform(-0.5, 0.5);
        const double target = is_min ? *std::min_element(x.begin(), x.end()) : *std::max_element(x.begin(), x.end());
        const double y = realize(net, x)[0];
        const double offset = is_min ? y - target : target - y;
        rec.max_error = std::max(rec.max_error, std::abs(y - target));
        rec.min_offset = std::min(rec.min_offset, offset);
        if (std::abs(y - target) > eps + rounding_allowance(target)) rec.within_bound = false;
      }
      out.push_back(rec);
    }
  }
  return out;
}

inline std::vector<ResultRow> minmax_rows(const MinMaxConfig& cfg, const std::vector<MinMaxRecord>& recs) {
  std::vector<ResultRow> rows;
  const std::string seed = std::to_string(cfg.seed);
  for (const auto& r : recs) {
    const std::string param = "eps=" + format_double(r.eps);
    rows.push_back({r.op, seed, param, "max_error", r.max_error});
    rows.push_back({r.op, seed, param, "bound", r.eps});
  }
  return rows;
}

inline void check_minmax(const std::vector<MinMaxRecord>& recs) {
  for (const auto& r : recs)
    if (!r.within_bound)
      throw AssertFailed(r.op + " network error " + format_double(r.max_error) + " exceeds eps = " +
                         format_double(r.eps));
}

// ---------------------------------------------------------- teacher-student

// Fully connected ReLU network with one hidden layer, or an affine map when
// hidden == 0. Used as the teacher and as the baseline students.
struct DenseNet {
  std::size_t d0 = 0;
  std::size_t hidden = 0;
  std::size_t d1 = 1;
  Matrix w1;
  std::vector<double> b1;
  Matrix w2;
  std::vector<double> b2;

  static DenseNet init(std::size_t d0, std::size_t hidden, std::size_t d1, Rng& rng) {
    DenseNet n;
    n.d0 = d0;
    n.hidden = hidden;
    n.d1 = d1;
    const std::size_t mid = hidden ? hidden : d0;
    if (hidden) {
      const double s = 1.0 / std::sqrt(static_cast<double>(d0));
      n.w1 = Matrix(hidden, d0);
      n.b1.assign(hidden, 0.0);
      fill_uniform(n.w1.values(), rng, -s, s);
      fill_uniform(n.b1, rng, -s, s);
    }
    const double s = 1.0 / std::sqrt(static_cast<double>(mid));
    n.w2 = Matrix(d1, mid);
    n.b2.assign(d1, 0.0);
    fill_uniform(n.w2.values(), rng, -s, s);
    fill_uniform(n.b2, rng, -s, s);
    return n;
  }

  std::vector<std::span<double>> blocks() {
    if (hidden) return {w1.values(), b1, w2.values(), b2};
    return {w2.values(), b2};
  }

  // Returns the output; `h` receives the hidden activations (or x).
  std::vector<double> apply(std::span<const double> x, std::vector<double>& h) const {
    if (hidden) {
      h.assign(hidden, 0.0);
      for (std::size_t j = 0; j < hidden; ++j) {
        double s = b1[j];
        const auto row = w1.row(j);
        for (std::size_t i = 0; i < d0; ++i) s += row[i] * x[i];
        h[j] = std::max(s, 0.0);
      }
    } else {
      h.assign(x.begin(), x.end());
    }
    std::vector<double> y(d1);
    for (std::size_t k = 0; k < d1; ++k) {
      double s = b2[k];
      const auto row = w2.row(k);
      for (std::size_t j = 0; j < h.size(); ++j) s += row[j] * h[j];
      y[k] = s;
    }
    return y;
  }

  std::vector<double> apply(std::span<const double> x) const {
    std::vector<double> h;
    return apply(x, h);
  }
};

inline double dense_mse(const DenseNet& net, const Dataset& data) {
  double s = 0.0;
  std::vector<double> up(data.target_dim);
  for (std::size_t i = 0; i < data.size(); ++i) s += sample_loss(LossKind::mse, net.apply(data.input(i)), data, i, up);
  return s / static_cast<double>(data.size());
}

struct Curve {
  std::vector<double> train_loss;
  std::vector<double> test_mse;  // index = epoch, 0 = before training
  std::size_t skipped = 0;
};

// Same minibatch schedule, loss, L2 and optimizer as train().
inline Curve train_dense(DenseNet& net, const Dataset& train_set, const Dataset& test_set, const TrainConfig& cfg) {
  Curve c;
  c.train_loss.push_back(dense_mse(net, train_set));
  c.test_mse.push_back(dense_mse(net, test_set));
  Rng shuffle_rng = Rng(cfg.seed).fork(1);
  Optimizer opt(cfg);
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  DenseNet grad = net;
  std::vector<double> h, up(net.d1), dh;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      const std::size_t e = std::min(order.size(), b + cfg.batch_size);
      for (auto blk : grad.blocks()) std::fill(blk.begin(), blk.end(), 0.0);
      for (std::size_t k = b; k < e; ++k) {
        const std::size_t i = order[k];
        const auto x = train_set.input(i);
        const auto y = net.apply(x, h);
        loss_sum += sample_loss(LossKind::mse, y, train_set, i, up);
        dh.assign(h.size(), 0.0);
        for (std::size_t r = 0; r < net.d1; ++r) {
          grad.b2[r] += up[r];
          for (std::size_t j = 0; j < h.size(); ++j) {
            grad.w2(r, j) += up[r] * h[j];
            dh[j] += up[r] * net.w2(r, j);
          }
        }
        if (net.hidden)
          for (std::size_t j = 0; j < net.hidden; ++j) {
            if (h[j] <= 0.0) continue;
            grad.b1[j] += dh[j];
            for (std::size_t q = 0; q < net.d0; ++q) grad.w1(j, q) += dh[j] * x[q];
          }
      }
      const double inv = 1.0 / static_cast<double>(e - b);
      auto g = grad.blocks();
      auto p = net.blocks();
      std::vector<std::span<const double>> gc;
      for (std::size_t k = 0; k < g.size(); ++k) {
        for (std::size_t j = 0; j < g[k].size(); ++j) g[k][j] = g[k][j] * inv + cfg.l2 * p[k][j];
        gc.push_back(g[k]);
      }
      opt.step(p, gc);
    }
    c.train_loss.push_back(loss_sum / static_cast<double>(order.size()));
    c.test_mse.push_back(dense_mse(net, test_set));
  }
  return c;
}

struct TeacherConfig {
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::size_t epochs = 20;
  std::size_t n_train = 10000;
  std::size_t n_test = 1000;
  std::size_t d0 = 40;
  std::size_t teacher_hidden = 20;
  std::size_t student_hidden = 20;
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  double l2 = 1e-5;
  double weight_floor = 1e-3;
  double input_lo = -1.0;
  double input_hi = 1.0;
  std::vector<std::string> models{"linear", "relu", "snn_positive", "snn_real"};
  std::size_t threads = 0;

  static TeacherConfig from_json(const json& j) {
    ConfigReader r(j, "teacher");
    TeacherConfig c;
    c.seeds = r.require<std::vector<std::uint64_t>>("seeds");
    c.epochs = r.get("epochs", c.epochs);
    c.n_train = r.get("n_train", c.n_train);
    c.n_test = r.get("n_test", c.n_test);
    c.d0 = r.get("d0", c.d0);
    c.teacher_hidden = r.get("teacher_hidden", c.teacher_hidden);
    c.student_hidden = r.get("student_hidden", c.student_hidden);
    c.batch_size = r.get("batch_size", c.batch_size);
    c.learning_rate = r.get("learning_rate", c.learning_rate);
    c.l2 = r.get("l2", c.l2);
    c.weight_floor = r.get("weight_floor", c.weight_floor);
    c.input_lo = r.get("input_lo", c.input_lo);
    c.input_hi = r.get("input_hi", c.input_hi);
    c.models = r.get("models", c.models);
    c.threads = r.get("threads", c.threads);
    r.finish();
    if (c.seeds.empty()) throw ConfigError("seeds must be nonempty");
    if (c.n_train == 0 || c.n_test == 0 || c.d0 == 0 || c.teacher_hidden == 0 || c.student_hidden == 0)
      throw ConfigError("sizes must be positive");
    if (!(c.input_lo < c.input_hi)) throw ConfigError("input_lo must be below input_hi");
    for (const auto& m : c.models)
      if (m != "linear" && m != "relu" && m != "snn_positive" && m != "snn_real")
        throw ConfigError("unknown model '" + m + "'");
    return c;
  }

  TrainConfig train_config(std::uint64_t seed) const {
    TrainConfig t;
    t.loss = LossKind::mse;
    t.learning_rate = learning_rate;
    t.l2 = l2;
    t.weight_floor = weight_floor;
    t.batch_size = batch_size;
    t.epochs = epochs;
    t.seed = seed;
    t.threads = threads;
    t.validate();
    return t;
  }
};

inline Dataset teacher_dataset(const DenseNet& teacher, std::size_t n, double lo, double hi, Rng& rng) {
  Dataset d;
  d.input_dim = teacher.d0;
  d.target_dim = teacher.d1;
  d.inputs.resize(n * d.input_dim);
  fill_uniform(d.inputs, rng, lo, hi);
  d.targets.reserve(n * d.target_dim);
  for (std::size_t i = 0; i < n; ++i) {
    const auto y = teacher.apply(d.input(i));
    d.targets.insert(d.targets.end(), y.begin(), y.end());
  }
  return d;
}

struct TeacherResult {
  // model -> one curve per seed, in seed order
  std::map<std::string, std::vector<Curve>> curves;
};

inline TeacherResult run_teacher(const TeacherConfig& cfg) {
  TeacherResult res;
  for (std::uint64_t seed : cfg.seeds) {
    Rng root(seed);
    Rng teacher_rng = root.fork(10), data_rng = root.fork(11);
    const DenseNet teacher = DenseNet::init(cfg.d0, cfg.teacher_hidden, 1, teacher_rng);
    const Dataset train_set = teacher_dataset(teacher, cfg.n_train, cfg.input_lo, cfg.input_hi, data_rng);
    const Dataset test_set = teacher_dataset(teacher, cfg.n_test, cfg.input_lo, cfg.input_hi, data_rng);
    const TrainConfig tc = cfg.train_config(seed);
    for (const std::string& model : cfg.models) {
      Rng init_rng = root.fork(20);
      Curve curve;
      if (model == "linear" || model == "relu") {
        DenseNet student = DenseNet::init(cfg.d0, model == "relu" ? cfg.student_hidden : 0, 1, init_rng);
        curve = train_dense(student, train_set, test_set, tc);
      } else {
        const WeightMode mode = model == "snn_positive" ? WeightMode::positive : WeightMode::general;
        AffineSnn net = init_affine_snn(single_layer_graph(cfg.d0, cfg.student_hidden), cfg.d0, 1, mode,
                                        cfg.weight_floor, init_rng);
        const History h = train(net, train_set, test_set, tc);
        for (const auto& e : h.epochs) {
          curve.train_loss.push_back(e.train_loss);
          curve.test_mse.push_back(e.test_loss);
        }
        curve.skipped = h.skipped_total;
      }
      res.curves[model].push_back(std::move(curve));
    }
  }
  return res;
}

// Median over seeds of a model's test mse, per epoch.
inline std::vector<double> median_curve(const std::vector<Curve>& curves) {
  std::vector<double> out;
  if (curves.empty()) return out;
  for (std::size_t e = 0; e < curves.front().test_mse.size(); ++e) {
    std::vector<double> v;
    for (const auto& c : curves) v.push_back(c.test_mse[e]);
    out.push_back(median(v));
  }
  return out;
}

inline std::vector<ResultRow> teacher_rows(const TeacherConfig& cfg, const TeacherResult& res) {
  std::vector<ResultRow> rows;
  for (const std::string& model : cfg.models) {
    const auto& curves = res.curves.at(model);
    for (std::size_t s = 0; s < curves.size(); ++s) {
      const std::string seed = std::to_string(cfg.seeds[s]);
      for (std::size_t e = 0; e < curves[s].test_mse.size(); ++e) {
        const std::string param = "model=" + model + ";epoch=" + std::to_string(e);
        rows.push_back({"teacher", seed, param, "train_loss", curves[s].train_loss[e]});
        rows.push_back({"teacher", seed, param, "test_mse", curves[s].test_mse[e]});
      }
      rows.push_back({"teacher", seed, "model=" + model, "skipped_samples", static_cast<double>(curves[s].skipped)});
    }
    for (std::size_t e = 0; e < curves.front().test_mse.size(); ++e) {
      std::vector<double> v;
      for (const auto& c : curves) v.push_back(c.test_mse[e]);
      const std::string param = "model=" + model + ";epoch=" + std::to_string(e);
      rows.push_back({"teacher", "all", param, "test_mse_q1", quantile(v, 0.25)});
      rows.push_back({"teacher", "all", param, "test_mse_median", quantile(v, 0.5)});
      rows.push_back({"teacher", "all", param, "test_mse_q3", quantile(v, 0.75)});
    }
  }
  return rows;
}

// ------------------------------------------------------------------- MNIST

struct MnistConfig {
  std::string data_dir;
  std::size_t train_subset = 6000;
  std::size_t test_subset = 1000;
  bool full = false;
  std::size_t epochs = 10;
  std::size_t hidden = 200;
  std::size_t encoder_dim = 784;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  double l2 = 1e-5;
  double weight_floor = 1e-3;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::vector<std::string> variants{"positive", "real"};
  std::size_t threads = 0;

  static MnistConfig from_json(const json& j) {
    ConfigReader r(j, "mnist");
    MnistConfig c;
    c.seeds = r.require<std::vector<std::uint64_t>>("seeds");
    c.data_dir = r.require<std::string>("data_dir");
    c.train_subset = r.get("train_subset", c.train_subset);
    c.test_subset = r.get("test_subset", c.test_subset);
    c.full = r.get("full", c.full);
    c.epochs = r.get("epochs", c.epochs);
    c.hidden = r.get("hidden", c.hidden);
    c.encoder_dim = r.get("encoder_dim", c.encoder_dim);
    c.batch_size = r.get("batch_size", c.batch_size);
    c.learning_rate = r.get("learning_rate", c.learning_rate);
    c.l2 = r.get("l2", c.l2);
    c.weight_floor = r.get("weight_floor", c.weight_floor);
    c.variants = r.get("variants", c.variants);
    c.threads = r.get("threads", c.threads);
    r.finish();
    c.validate();
    return c;
  }

  void validate() const {
    if (seeds.empty()) throw ConfigError("seeds must be nonempty");
    if (!full && (train_subset == 0 || test_subset == 0)) throw ConfigError("subset sizes must be positive");
    if (hidden == 0 || encoder_dim == 0) throw ConfigError("layer sizes must be positive");
    for (const auto& v : variants)
      if (v != "positive" && v != "real") throw ConfigError("unknown variant '" + v + "'");
  }
};

struct MnistData {
  Dataset train;
  Dataset test;
};

inline MnistData load_mnist(const MnistConfig& cfg) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.data_dir);
  auto load = [&](const char* images, const char* labels, std::size_t limit) {
    return dataset_from_idx(load_idx((dir / images).string()), load_idx((dir / labels).string()), limit);
  };
  MnistData d;
  d.train = load("train-images-idx3-ubyte", "train-labels-idx1-ubyte", cfg.full ? 0 : cfg.train_subset);
  d.test = load("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte", cfg.full ? 0 : cfg.test_subset);
  return d;
}

struct MnistRun {
  std::string variant;
  std::uint64_t seed = 0;
  History history;
};

inline std::vector<MnistRun> run_mnist(const MnistConfig& cfg, const MnistData& data) {
  std::vector<MnistRun> runs;
  for (const std::string& variant : cfg.variants) {
    for (std::uint64_t seed : cfg.seeds) {
      TrainConfig tc;
      tc.loss = LossKind::cross_entropy;
      tc.learning_rate = cfg.learning_rate;
      tc.l2 = cfg.l2;
      tc.weight_floor = cfg.weight_floor;
      tc.batch_size = cfg.batch_size;
      tc.epochs = cfg.epochs;
      tc.seed = seed;
      tc.threads = cfg.threads;
      Rng init_rng = Rng(seed).fork(20);
      const WeightMode mode = variant == "positive" ? WeightMode::positive : WeightMode::general;
      AffineSnn net = init_affine_snn(single_layer_graph(cfg.encoder_dim, cfg.hidden), data.train.input_dim, 10,
                                      mode, cfg.weight_floor, init_rng);
      runs.push_back({variant, seed, train(net, data.train, data.test, tc)});
    }
  }
  return runs;
}

inline std::vector<ResultRow> mnist_rows(const std::vector<MnistRun>& runs) {
  std::vector<ResultRow> rows;
  for (const auto& run : runs) {
    const std::string seed = std::to_string(run.seed);
    for (const auto& e : run.history.epochs) {
      const std::string param = "variant=" + run.variant + ";epoch=" + std::to_string(e.epoch);
      rows.push_back({"mnist", seed, param, "train_loss", e.train_loss});
      rows.push_back({"mnist", seed, param, "test_loss", e.test_loss});
      rows.push_back({"mnist", seed, param, "test_error", e.test_error});
      rows.push_back({"mnist", seed, param, "skipped_samples", static_cast<double>(e.skipped)});
    }
  }
  return rows;
}

// Median over seeds of the test error per epoch for one variant.
inline std::vector<double> mnist_median_error(const std::vector<MnistRun>& runs, const std::string& variant) {
  std::vector<const History*> hs;
  for (const auto& r : runs)
    if (r.variant == variant) hs.push_back(&r.history);
  std::vector<double> out;
  if (hs.empty()) return out;
  for (std::size_t e = 0; e < hs.front()->epochs.size(); ++e) {
    std::vector<double> v;
    for (const History* h : hs) v.push_back(h->epochs[e].test_error);
    out.push_back(median(v));
  }
  return out;
}

// ----------------------------------------------------------- discontinuity

inline SpikingNetwork three_input_neuron(std::vector<double> delays) {
  auto g = std::make_shared<const NetworkGraph>(NetworkGraph::build({{0, 3}, {1, 3}, {2, 3}}, 4));
  return SpikingNetwork(std::move(g), {1.0, -1.0, 1.0}, std::move(delays), WeightMode::general);
}

struct DiscontinuityRecord {
  std::string example;  // "b1" or "b2"
  double param = 0.0;   // eps for b1, s for b2
  double below = 0.0;   // b1: inputs (0, 1 - eps, 2); b2: parameter -s
  double above = 0.0;   // b1: inputs (0, 1 + eps, 2); b2: parameter +s
  double jump = 0.0;
};

// Spike times of the weight (1, -1, 1) neuron on both sides of its
// discontinuities: in the input times (b1) and in a delay (b2).
inline std::vector<DiscontinuityRecord> run_discontinuity(std::span<const double> eps_grid, double t = 0.0) {
  std::vector<DiscontinuityRecord> out;
  const SpikingNetwork b1 = three_input_neuron({0.0, 0.0, 0.0});
  for (double eps : eps_grid) {
    const double above = realize(b1, std::vector<double>{0.0, 1.0 + eps, 2.0})[0];
    const double below = realize(b1, std::vector<double>{0.0, 1.0 - eps, 2.0})[0];
    out.push_back({"b1", eps, below, above, std::abs(below - above)});
  }
  for (double s : eps_grid) {
    const double above = realize(three_input_neuron({0.0, 1.0 + s, 2.0}), std::vector<double>{t, t, t})[0];
    const double below = realize(three_input_neuron({0.0, 1.0 - s, 2.0}), std::vector<double>{t, t, t})[0];
    out.push_back({"b2", s, below, above, std::abs(below - above)});
  }
  const double at_zero = realize(three_input_neuron({0.0, 1.0, 2.0}), std::vector<double>{t, t, t})[0];
  out.push_back({"b2", 0.0, at_zero, at_zero, 0.0});
  return out;
}

inline void check_discontinuity(const std::vector<DiscontinuityRecord>& recs, double t = 0.0) {
  for (const auto& r : recs) {
    if (r.example == "b1") {
      if (std::abs(r.above - 1.0) > 1e-12 || std::abs(r.below - (2.0 + r.param)) > 1e-12)
        throw AssertFailed("first example deviates from the closed form at eps = " + format_double(r.param));
    } else if (r.param > 0.0) {
      if (std::abs(r.above - (t + 1.0)) > 1e-12 || std::abs(r.below - (t + 2.0 + r.param)) > 1e-12)
        throw AssertFailed("second example deviates from the closed form at s = " + format_double(r.param));
      if (r.jump < 1.0) throw AssertFailed("second example jump below 1 at s = " + format_double(r.param));
    } else if (std::abs(r.above - (t + 1.0)) > 1e-12) {
      throw AssertFailed("second example at s = 0 differs from t + 1");
    }
  }
}

inline std::vector<ResultRow> discontinuity_rows(const std::vector<DiscontinuityRecord>& recs) {
  std::vector<ResultRow> rows;
  for (const auto& r : recs) {
    const std::string param = (r.example == "b1" ? "eps=" : "s=") + format_double(r.param);
    rows.push_back({r.example, "0", param, "below", r.below});
    rows.push_back({r.example, "0", param, "above", r.above});
    rows.push_back({r.example, "0", param, "jump", r.jump});
  }
  return rows;
}

// --------------------------------------------------------------------- FEM

struct FemConfig {
  std::string mesh_path;  // empty: regular grid
  std::size_t dim = 1;
  std::size_t n = 2;
  std::string function = "hat";  // hat | sum | product | sine, ignored when values are given
  std::vector<double> values;
  std::vector<double> eps_grid{1e-3, 1e-2};
  std::size_t grid_n = 101;

  static FemConfig from_json(const json& j) {
    ConfigReader r(j, "fem");
    FemConfig c;
    c.mesh_path = r.get("mesh_path", c.mesh_path);
    c.dim = r.get("dim", c.dim);
    c.n = r.get("n", c.n);
    c.function = r.get("function", c.function);
    c.values = r.get("values", c.values);
    c.eps_grid = r.get("eps_grid", c.eps_grid);
    c.grid_n = r.get("grid_n", c.grid_n);
    r.finish();
    if (c.eps_grid.empty()) throw ConfigError("eps_grid must be nonempty");
    for (double e : c.eps_grid)
      if (!(e > 0.0)) throw ConfigError("eps_grid entries must be positive");
    if (c.grid_n < 2) throw ConfigError("grid_n must be at least 2");
    return c;
  }
};

inline double nodal_function(const std::string& name, std::span<const double> p) {
  if (name == "sum") {
    double s = 0.0;
    for (double v : p) s += v;
    return s;
  }
  if (name == "product") {
    double s = 1.0;
    for (double v : p) s *= v;
    return s;
  }
  if (name == "sine") {
    double s = 1.0;
    for (double v : p) s *= std::sin(3.141592653589793 * v);
    return s;
  }
  if (name == "hat") {
    double s = 1.0;
    for (double v : p) s *= std::max(0.0, 1.0 - 2.0 * std::abs(v - 0.5));
    return s;
  }
  throw ConfigError("unknown nodal function '" + name + "'");
}

struct FemRecord {
  double eps = 0.0;
  double max_error = 0.0;
  double bound = 0.0;
  std::size_t size = 0;
  bool within_bound = false;
};

struct FemProblem {
  std::shared_ptr<const Triangulation> mesh;
  FemFunction f;
};

inline FemProblem fem_problem(const FemConfig& cfg) {
  FemProblem p;
  std::vector<double> file_values;
  if (!cfg.mesh_path.empty())
    p.mesh = std::make_shared<const Triangulation>(triangulation_from_json(read_json_file(cfg.mesh_path), &file_values));
  else
    p.mesh = std::make_shared<const Triangulation>(regular_grid_triangulation(cfg.dim, cfg.n));
  p.f.mesh = p.mesh;
  if (!cfg.values.empty())
    p.f.values = cfg.values;
  else if (!file_values.empty())
    p.f.values = file_values;
  else
    for (const auto& v : p.mesh->vertices) p.f.values.push_back(nodal_function(cfg.function, v));
  if (p.f.values.size() != p.mesh->vertices.size()) throw ConfigError("need one nodal value per mesh vertex");
  return p;
}

// Evaluation points: a regular grid over the bounding box of the mesh.
inline std::vector<std::vector<double>> fem_grid(const Triangulation& tri, std::size_t grid_n) {
  std::vector<double> lo(tri.dim, INFINITY), hi(tri.dim, -INFINITY);
  for (const auto& v : tri.vertices)
    for (std::size_t i = 0; i < tri.dim; ++i) {
      lo[i] = std::min(lo[i], v[i]);
      hi[i] = std::max(hi[i], v[i]);
    }
  std::vector<std::vector<double>> pts;
  std::vector<std::size_t> idx(tri.dim, 0);
  while (true) {
    std::vector<double> p(tri.dim);
    for (std::size_t i = 0; i < tri.dim; ++i)
      p[i] = lo[i] + (hi[i] - lo[i]) * static_cast<double>(idx[i]) / static_cast<double>(grid_n - 1);
    pts.push_back(std::move(p));
    std::size_t k = 0;
    while (k < tri.dim && ++idx[k] == grid_n) idx[k++] = 0;
    if (k == tri.dim) break;
  }
  return pts;
}

// Compares the emulating network with the piecewise-linear interpolant on a
// grid; grid points outside the mesh are skipped.
inline std::vector<FemRecord> run_fem(const FemConfig& cfg, const FemProblem& p) {
  std::vector<FemRecord> out;
  double abs_sum = 0.0;
  for (double v : p.f.values) abs_sum += std::abs(v);
  const auto pts = fem_grid(*p.mesh, cfg.grid_n);
  for (double eps : cfg.eps_grid) {
    const AffineSnn net = build_fem_net(p.f, eps);
    FemRecord rec{eps, 0.0, abs_sum * eps, size(net), true};
    for (const auto& x : pts) {
      double exact = 0.0;
      try {
        exact = eval_fem(p.f, x);
      } catch (const InvalidParameters&) {
        continue;
      }
      const double err = std::abs(realize(net, x)[0] - exact);
      rec.max_error = std::max(rec.max_error, err);
      if (err > rec.bound + rounding_allowance(abs_sum * 4.0)) rec.within_bound = false;
    }
    out.push_back(rec);
  }
  return out;
}

inline std::vector<ResultRow> fem_rows(const std::vector<FemRecord>& recs) {
  std::vector<ResultRow> rows;
  for (const auto& r : recs) {
    const std::string param = "eps=" + format_double(r.eps);
    rows.push_back({"fem", "0", param, "max_error", r.max_error});
    rows.push_back({"fem", "0", param, "bound", r.bound});
    rows.push_back({"fem", "0", param, "size", static_cast<double>(r.size)});
  }
  return rows;
}

inline void check_fem(const std::vector<FemRecord>& recs) {
  for (const auto& r : recs)
    if (!r.within_bound)
      throw AssertFailed("finite element emulation error " + format_double(r.max_error) + " exceeds " +
                         format_double(r.bound));
}

// ------------------------------------------------------------------ bounds

inline json bounds_report_json(const BoundsReport& r) {
  return {{"box",
           {{"d0", r.box.d0},
            {"d1", r.box.d1},
            {"d_in", r.box.d_in},
            {"d_out", r.box.d_out},
            {"edges", r.box.edges},
            {"depth", r.box.depth},
            {"b", r.box.b},
            {"B", r.box.big_b},
            {"parameter_count", r.box.parameter_count()}}},
          {"input_lipschitz", r.input_lipschitz},
          {"param_lipschitz_factor", r.param_lipschitz_factor},
          {"zero_output_bound", r.zero_output_bound},
          {"L_star", r.l_star},
          {"eps", r.eps},
          {"log_covering", r.log_covering},
          {"m", r.m},
          {"delta", r.delta},
          {"generalization_gap", r.gap.gap},
          {"sample_requirement", r.gap.required_samples_term},
          {"sample_feasible", r.gap.feasible}};
}

inline json rate_json(const RateRecord& r) {
  return {{"family", r.family},
          {"error_bound", r.error_bound},
          {"error_exponent", r.error_exponent},
          {"error_factor", r.error_factor},
          {"weight_floor", r.weight_floor},
          {"weight_cap", r.weight_cap},
          {"size_bound", r.size_bound},
          {"kappa_B", r.kappa_b},
          {"kappa_M", r.kappa_m},
          {"learning_exponent", r.learning_exponent},
          {"learning_bound", r.learning_bound}};
}

// Box of a concrete model: b = min(1, smallest weight), B = max(1, largest
// parameter magnitude).
inline ParamBox box_of_model(const AffineSnn& net) {
  double big_b = 1.0;
  for (auto blk : parameter_blocks(net)) big_b = std::max(big_b, max_abs(blk));
  const double b = std::min(1.0, net.core().min_weight());
  return ParamBox::from_graph(net.graph(), net.input_dim(), net.output_dim(), b, big_b);
}

// Config: either "model_path" or an explicit "box"; plus m, delta, eps and
// optional "sobolev" {d0, s, N} / "barron" {d0, K, M} rate queries.
inline json run_bounds(const json& j) {
  ConfigReader r(j, "bounds");
  const double m = r.require<double>("m");
  const double delta = r.require<double>("delta");
  const double eps = r.require<double>("eps");
  const std::string model_path = r.get<std::string>("model_path", "");
  const json box_json = r.get<json>("box", json());
  const json sob = r.get<json>("sobolev", json());
  const json bar = r.get<json>("barron", json());
  r.finish();

  json out;
  if (!model_path.empty()) {
    const AffineSnn net = model_from_json(read_json_file(model_path));
    if (!net.core().positive()) throw ConfigError("bounds apply to positive-weight models only");
    out = bounds_report_json(bounds_report(box_of_model(net), m, delta, eps, &net));
  } else {
    if (box_json.is_null()) throw ConfigError("bounds config needs model_path or box");
    ConfigReader b(box_json, "bounds.box");
    ParamBox box;
    box.d0 = b.require<std::size_t>("d0");
    box.d1 = b.require<std::size_t>("d1");
    box.d_in = b.require<std::size_t>("d_in");
    box.d_out = b.require<std::size_t>("d_out");
    box.edges = b.require<std::size_t>("edges");
    box.depth = b.require<std::size_t>("depth");
    box.b = b.require<double>("b");
    box.big_b = b.require<double>("B");
    b.finish();
    out = bounds_report_json(bounds_report(box, m, delta, eps));
  }
  if (!sob.is_null()) {
    ConfigReader s(sob, "bounds.sobolev");
    const auto d0 = s.require<std::size_t>("d0");
    const auto sm = s.require<int>("s");
    const auto n = s.require<double>("N");
    s.finish();
    out["sobolev"] = rate_json(sobolev_rate(d0, sm, n));
  }
  if (!bar.is_null()) {
    ConfigReader s(bar, "bounds.barron");
    const auto d0 = s.require<std::size_t>("d0");
    const auto k = s.require<double>("K");
    const auto mt = s.require<double>("M");
    s.finish();
    out["barron"] = rate_json(barron_rate(d0, k, mt));
  }
  return out;
}

}  // namespace affine_snn
