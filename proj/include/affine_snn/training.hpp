#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "affine_snn/affine.hpp"
#include "affine_snn/error.hpp"
#include "affine_snn/gradient.hpp"
#include "affine_snn/graph.hpp"
#include "affine_snn/idx.hpp"
#include "affine_snn/parallel.hpp"
#include "affine_snn/rng.hpp"
#include "affine_snn/spike.hpp"

namespace affine_snn {

enum class LossKind { mse, cross_entropy };
enum class OptimizerKind { sgd, adam };

struct TrainConfig {
  LossKind loss = LossKind::mse;
  OptimizerKind optimizer = OptimizerKind::adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double l2 = 1e-5;
  double weight_floor = 1e-3;
  bool delay_training = false;
  std::size_t batch_size = 32;
  std::size_t epochs = 10;
  std::uint64_t seed = 0;
  std::size_t threads = 0;  // 0: default_thread_count()

  void validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (!(l2 >= 0.0)) throw ConfigError("l2 must be nonnegative");
    if (!(weight_floor > 0.0)) throw ConfigError("weight_floor must be positive");
    if (batch_size == 0) throw ConfigError("batch_size must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("Adam betas must lie in [0, 1)");
    if (!(adam_eps > 0.0)) throw ConfigError("adam_eps must be positive");
  }
};

// Row-major samples. Regression sets fill `targets`; classification sets fill
// `labels` and set target_dim to the class count.
struct Dataset {
  std::size_t input_dim = 0;
  std::size_t target_dim = 0;
  std::vector<double> inputs;
  std::vector<double> targets;
  std::vector<int> labels;

  std::size_t size() const { return input_dim == 0 ? 0 : inputs.size() / input_dim; }
  bool classification() const { return !labels.empty(); }
  std::span<const double> input(std::size_t i) const { return {inputs.data() + i * input_dim, input_dim}; }
  std::span<const double> target(std::size_t i) const { return {targets.data() + i * target_dim, target_dim}; }
};

// Loss of one prediction; writes dLoss/dprediction into `upstream`.
inline double sample_loss(LossKind kind, std::span<const double> pred, const Dataset& data, std::size_t i,
                          std::span<double> upstream) {
  if (kind == LossKind::mse) {
    const auto y = data.target(i);
    if (y.size() != pred.size()) throw DimensionMismatch("prediction and target lengths differ");
    const double n = static_cast<double>(pred.size());
    double loss = 0.0;
    for (std::size_t k = 0; k < pred.size(); ++k) {
      const double r = pred[k] - y[k];
      loss += r * r / n;
      upstream[k] = 2.0 * r / n;
    }
    return loss;
  }
  const int label = data.labels[i];
  if (label < 0 || static_cast<std::size_t>(label) >= pred.size()) throw DimensionMismatch("label out of range");
  const double top = *std::max_element(pred.begin(), pred.end());
  double z = 0.0;
  for (double p : pred) z += std::exp(p - top);
  for (std::size_t k = 0; k < pred.size(); ++k) upstream[k] = std::exp(pred[k] - top) / z;
  upstream[static_cast<std::size_t>(label)] -= 1.0;
  return std::log(z) + top - pred[static_cast<std::size_t>(label)];
}

inline std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

// Penalty (l2/2) * |theta|^2 over the trainable blocks.
inline double l2_penalty(const AffineSnn& net, const TrainConfig& cfg) {
  double s = 0.0;
  const auto blocks = parameter_blocks(net);
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    if (k == delay_block && !cfg.delay_training) continue;
    for (double v : blocks[k]) s += v * v;
  }
  return 0.5 * cfg.l2 * s;
}

struct BatchResult {
  double loss = 0.0;  // mean data loss over used samples
  double penalty = 0.0;
  ParamGradients grads;
  std::size_t used = 0;
  std::size_t skipped = 0;  // samples whose forward pass raised NoSpike
};

namespace detail {

inline constexpr std::size_t chunk_size = 8;

inline std::size_t resolve_threads(const TrainConfig& cfg) {
  return cfg.threads ? cfg.threads : default_thread_count();
}

}  // namespace detail

// Mean loss and gradient over the samples `indices`, plus the L2 term. Work is
// split into fixed chunks reduced in order, so results are bit-identical for
// any thread count. In general mode samples without output spikes are
// skipped and counted.
inline BatchResult loss_and_grad(const AffineSnn& net, const Dataset& data, std::span<const std::size_t> indices,
                                 const TrainConfig& cfg) {
  if (indices.empty()) throw InvalidParameters("batch must be nonempty");
  const std::size_t chunks = (indices.size() + detail::chunk_size - 1) / detail::chunk_size;
  struct Partial {
    ParamGradients grads;
    double loss = 0.0;
    std::size_t used = 0, skipped = 0;
  };
  std::vector<Partial> parts(chunks);
  parallel_tasks(chunks, detail::resolve_threads(cfg), [&](std::size_t c) {
    Partial& p = parts[c];
    p.grads = ParamGradients::zeros_like(net);
    std::vector<double> upstream(net.output_dim());
    const std::size_t end = std::min(indices.size(), (c + 1) * detail::chunk_size);
    for (std::size_t k = c * detail::chunk_size; k < end; ++k) {
      const std::size_t i = indices[k];
      GradientTape tape;
      try {
        tape = record(net, data.input(i));
      } catch (const NoSpike&) {
        ++p.skipped;
        continue;
      }
      p.loss += sample_loss(cfg.loss, tape.output, data, i, upstream);
      backward_accumulate(net, tape, upstream, p.grads);
      ++p.used;
    }
  });

  BatchResult out;
  out.grads = std::move(parts[0].grads);
  out.loss = parts[0].loss;
  out.used = parts[0].used;
  out.skipped = parts[0].skipped;
  for (std::size_t c = 1; c < chunks; ++c) {
    out.grads += parts[c].grads;
    out.loss += parts[c].loss;
    out.used += parts[c].used;
    out.skipped += parts[c].skipped;
  }
  if (out.used > 0) {
    out.loss /= static_cast<double>(out.used);
    out.grads *= 1.0 / static_cast<double>(out.used);
  }
  auto g = out.grads.blocks();
  const auto theta = parameter_blocks(net);
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (k == delay_block && !cfg.delay_training) {
      std::fill(g[k].begin(), g[k].end(), 0.0);
      continue;
    }
    if (cfg.l2 > 0.0)
      for (std::size_t j = 0; j < g[k].size(); ++j) g[k][j] += cfg.l2 * theta[k][j];
  }
  out.penalty = l2_penalty(net, cfg);
  return out;
}

// Plain SGD or Adam over a fixed list of parameter blocks.
class Optimizer {
 public:
  explicit Optimizer(const TrainConfig& cfg) : cfg_(cfg) {}

  void step(const std::vector<std::span<double>>& params, const std::vector<std::span<const double>>& grads) {
    if (params.size() != grads.size()) throw DimensionMismatch("optimizer blocks do not match gradients");
    if (cfg_.optimizer == OptimizerKind::sgd) {
      for (std::size_t k = 0; k < params.size(); ++k)
        for (std::size_t j = 0; j < params[k].size(); ++j) params[k][j] -= cfg_.learning_rate * grads[k][j];
      return;
    }
    if (m_.empty()) {
      for (const auto& p : params) {
        m_.emplace_back(p.size(), 0.0);
        v_.emplace_back(p.size(), 0.0);
      }
    }
    ++steps_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(steps_));
    for (std::size_t k = 0; k < params.size(); ++k) {
      if (params[k].size() != m_[k].size()) throw DimensionMismatch("optimizer block size changed");
      for (std::size_t j = 0; j < params[k].size(); ++j) {
        const double gj = grads[k][j];
        m_[k][j] = cfg_.beta1 * m_[k][j] + (1.0 - cfg_.beta1) * gj;
        v_[k][j] = cfg_.beta2 * v_[k][j] + (1.0 - cfg_.beta2) * gj * gj;
        params[k][j] -= cfg_.learning_rate * (m_[k][j] / c1) / (std::sqrt(v_[k][j] / c2) + cfg_.adam_eps);
      }
    }
  }

  std::size_t steps() const { return steps_; }

 private:
  TrainConfig cfg_;
  std::vector<std::vector<double>> m_, v_;
  std::size_t steps_ = 0;
};

// Keeps the core admissible after an update: weights >= floor in positive
// mode, delays >= 0 always.
inline void project(AffineSnn& net, const TrainConfig& cfg) {
  SpikingNetwork& core = net.mutable_core();
  if (core.positive())
    for (double& w : core.mutable_weights()) w = std::max(w, cfg.weight_floor);
  for (double& d : core.mutable_delays()) d = std::max(d, 0.0);
}

// d_in input nodes fully connected to `hidden` spiking neurons.
inline std::shared_ptr<const NetworkGraph> single_layer_graph(std::size_t d_in, std::size_t hidden) {
  if (d_in == 0 || hidden == 0) throw InvalidParameters("layer sizes must be positive");
  std::vector<Edge> edges;
  edges.reserve(d_in * hidden);
  for (std::size_t h = 0; h < hidden; ++h)
    for (std::size_t i = 0; i < d_in; ++i) edges.push_back({i, d_in + h});
  return std::make_shared<const NetworkGraph>(NetworkGraph::build(std::move(edges), d_in + hidden));
}

inline void fill_uniform(std::span<double> v, Rng& rng, double lo, double hi) {
  for (double& x : v) x = rng.uniform(lo, hi);
}

// Encoder and decoder entries ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)); synaptic
// weights ~ U(floor, 1 + floor); delays 0.
inline AffineSnn init_affine_snn(std::shared_ptr<const NetworkGraph> graph, std::size_t d0, std::size_t d1,
                                 WeightMode mode, double weight_floor, Rng& rng) {
  const std::size_t d_in = graph->inputs().size();
  const std::size_t d_out = graph->outputs().size();
  const double s_in = 1.0 / std::sqrt(static_cast<double>(d0));
  const double s_out = 1.0 / std::sqrt(static_cast<double>(d_out));
  AffineMap enc(Matrix(d_in, d0), std::vector<double>(d_in));
  fill_uniform(enc.weights.values(), rng, -s_in, s_in);
  fill_uniform(enc.bias, rng, -s_in, s_in);
  std::vector<double> weights(graph->edge_count());
  fill_uniform(weights, rng, weight_floor, 1.0 + weight_floor);
  std::vector<double> delays(graph->edge_count(), 0.0);
  AffineMap dec(Matrix(d1, d_out), std::vector<double>(d1));
  fill_uniform(dec.weights.values(), rng, -s_out, s_out);
  fill_uniform(dec.bias, rng, -s_out, s_out);
  return AffineSnn(std::move(enc), SpikingNetwork(std::move(graph), std::move(weights), std::move(delays), mode),
                   std::move(dec));
}

struct Evaluation {
  double loss = 0.0;   // mean over samples that produced outputs
  double error = std::numeric_limits<double>::quiet_NaN();  // classification only; skipped samples count as wrong
  std::size_t skipped = 0;
};

inline Evaluation evaluate(const AffineSnn& net, const Dataset& data, const TrainConfig& cfg) {
  const std::size_t n = data.size();
  if (n == 0) return {};
  const std::size_t chunks = (n + detail::chunk_size - 1) / detail::chunk_size;
  struct Partial {
    double loss = 0.0;
    std::size_t wrong = 0, skipped = 0;
  };
  std::vector<Partial> parts(chunks);
  parallel_tasks(chunks, detail::resolve_threads(cfg), [&](std::size_t c) {
    Partial& p = parts[c];
    std::vector<double> upstream(net.output_dim());
    const std::size_t end = std::min(n, (c + 1) * detail::chunk_size);
    for (std::size_t i = c * detail::chunk_size; i < end; ++i) {
      std::vector<double> pred;
      try {
        pred = realize(net, data.input(i));
      } catch (const NoSpike&) {
        ++p.skipped;
        continue;
      }
      p.loss += sample_loss(cfg.loss, pred, data, i, upstream);
      if (data.classification() && argmax(pred) != static_cast<std::size_t>(data.labels[i])) ++p.wrong;
    }
  });
  Evaluation out;
  std::size_t wrong = 0;
  for (const Partial& p : parts) {
    out.loss += p.loss;
    wrong += p.wrong;
    out.skipped += p.skipped;
  }
  const std::size_t used = n - out.skipped;
  out.loss = used ? out.loss / static_cast<double>(used) : std::numeric_limits<double>::quiet_NaN();
  if (data.classification()) out.error = static_cast<double>(wrong + out.skipped) / static_cast<double>(n);
  return out;
}

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // epoch 0: full evaluation; later: mean of batch data losses
  double test_loss = 0.0;
  double test_error = std::numeric_limits<double>::quiet_NaN();
  double wall_ms = 0.0;
  std::size_t skipped = 0;  // training samples skipped during the epoch
};

struct History {
  std::vector<EpochRecord> epochs;
  std::size_t skipped_total = 0;
};

// Minibatch training with per-epoch reshuffling. After every step the
// parameters are projected back onto the admissible set.
inline History train(AffineSnn& net, const Dataset& train_set, const Dataset& test_set, const TrainConfig& cfg) {
  cfg.validate();
  if (train_set.size() == 0) throw ConfigError("training set is empty");
  using clock = std::chrono::steady_clock;
  History history;
  Rng rng(cfg.seed);
  Rng shuffle_rng = rng.fork(1);

  auto start = clock::now();
  {
    const Evaluation tr = evaluate(net, train_set, cfg);
    const Evaluation te = evaluate(net, test_set, cfg);
    history.epochs.push_back(
        {0, tr.loss, te.loss, te.error, std::chrono::duration<double, std::milli>(clock::now() - start).count(), 0});
  }

  Optimizer opt(cfg);
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    start = clock::now();
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t used = 0, skipped = 0;
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      const std::size_t e = std::min(order.size(), b + cfg.batch_size);
      BatchResult r = loss_and_grad(net, train_set, std::span(order).subspan(b, e - b), cfg);
      skipped += r.skipped;
      if (r.used == 0) continue;
      loss_sum += r.loss * static_cast<double>(r.used);
      used += r.used;
      const auto& grads = r.grads;
      opt.step(parameter_blocks(net), grads.blocks());
      project(net, cfg);
    }
    const Evaluation te = evaluate(net, test_set, cfg);
    history.skipped_total += skipped;
    history.epochs.push_back({epoch, used ? loss_sum / static_cast<double>(used) : std::numeric_limits<double>::quiet_NaN(),
                              te.loss, te.error,
                              std::chrono::duration<double, std::milli>(clock::now() - start).count(), skipped});
  }
  return history;
}

inline void write_history_csv(std::ostream& out, const History& h) {
  out << "epoch,train_loss,test_loss,test_error,wall_ms\n";
  for (const EpochRecord& r : h.epochs)
    out << r.epoch << ',' << r.train_loss << ',' << r.test_loss << ',' << r.test_error << ',' << r.wall_ms << '\n';
}

// MNIST-style images (pixels scaled to [0, 1]) with labels; the first `limit`
// samples are kept when limit > 0.
inline Dataset dataset_from_idx(const IdxArray& images, const IdxArray& labels, std::size_t limit = 0) {
  if (images.dims.size() < 2 || labels.dims.size() != 1) throw FormatError("expected image and label IDX arrays");
  if (images.count() != labels.count()) throw FormatError("image and label counts differ");
  std::size_t n = images.count();
  if (limit > 0) n = std::min(n, limit);
  Dataset d;
  d.input_dim = images.item_size();
  d.target_dim = 10;
  d.inputs.resize(n * d.input_dim);
  for (std::size_t i = 0; i < d.inputs.size(); ++i) d.inputs[i] = images.data[i] / 255.0;
  d.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    d.labels[i] = labels.data[i];
    if (d.labels[i] > 9) throw FormatError("label outside 0..9");
  }
  return d;
}

}  // namespace affine_snn
