#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "affine_snn/affine.hpp"
#include "affine_snn/error.hpp"
#include "affine_snn/matrix.hpp"
#include "affine_snn/spike.hpp"

namespace affine_snn {

// Everything needed to differentiate one evaluation of an affine SNN.
struct GradientTape {
  std::vector<double> x;        // network input
  std::vector<double> encoded;  // encoder output = input spike times
  ForwardTrace trace;
  std::vector<double> output;   // decoder output
};

inline GradientTape record(const AffineSnn& net, std::span<const double> x) {
  GradientTape tape;
  tape.x.assign(x.begin(), x.end());
  tape.encoded = net.encoder().apply(x);
  tape.trace = forward(net.core(), tape.encoded);
  tape.output = net.decoder().apply(tape.trace.outputs);
  return tape;
}

// Gradient with the same shapes as the network parameters.
struct ParamGradients {
  std::vector<double> d_weights;
  std::vector<double> d_delays;
  Matrix d_w_in;
  std::vector<double> d_b_in;
  Matrix d_w_out;
  std::vector<double> d_b_out;

  static ParamGradients zeros_like(const AffineSnn& net) {
    ParamGradients g;
    const std::size_t m = net.graph().edge_count();
    g.d_weights.assign(m, 0.0);
    g.d_delays.assign(m, 0.0);
    g.d_w_in = Matrix(net.encoder().weights.rows(), net.encoder().weights.cols());
    g.d_b_in.assign(net.encoder().bias.size(), 0.0);
    g.d_w_out = Matrix(net.decoder().weights.rows(), net.decoder().weights.cols());
    g.d_b_out.assign(net.decoder().bias.size(), 0.0);
    return g;
  }

  // Flat views in a fixed order: w_in, b_in, weights, delays, w_out, b_out.
  std::vector<std::span<double>> blocks() {
    return {d_w_in.values(), d_b_in, d_weights, d_delays, d_w_out.values(), d_b_out};
  }
  std::vector<std::span<const double>> blocks() const {
    return {d_w_in.values(), d_b_in, d_weights, d_delays, d_w_out.values(), d_b_out};
  }

  void set_zero() {
    for (auto b : blocks()) std::fill(b.begin(), b.end(), 0.0);
  }

  ParamGradients& operator+=(const ParamGradients& other) {
    auto mine = blocks();
    const auto theirs = other.blocks();
    for (std::size_t k = 0; k < mine.size(); ++k) {
      if (mine[k].size() != theirs[k].size()) throw DimensionMismatch("gradient shapes differ");
      for (std::size_t i = 0; i < mine[k].size(); ++i) mine[k][i] += theirs[k][i];
    }
    return *this;
  }

  ParamGradients& operator*=(double s) {
    for (auto b : blocks())
      for (double& v : b) v *= s;
    return *this;
  }
};

// Parameter views of a network in the same order as ParamGradients::blocks().
inline std::vector<std::span<double>> parameter_blocks(AffineSnn& net) {
  return {net.mutable_encoder().weights.values(), net.mutable_encoder().bias, net.mutable_core().mutable_weights(),
          net.mutable_core().mutable_delays(),    net.mutable_decoder().weights.values(),
          net.mutable_decoder().bias};
}

inline std::vector<std::span<const double>> parameter_blocks(const AffineSnn& net) {
  return {net.encoder().weights.values(), net.encoder().bias, net.core().weights(),
          net.core().delays(),            net.decoder().weights.values(), net.decoder().bias};
}

// Index of the delay block in blocks() / parameter_blocks().
inline constexpr std::size_t delay_block = 3;

// Local partials of a neuron with respect to one causal edge e = (u, v):
//   dt_v/dt_u = dt_v/dd_e = w_e / W_v,   dt_v/dw_e = (t_u + d_e - t_v) / W_v.
struct LocalPartials {
  double d_time = 0.0;
  double d_weight = 0.0;
  double d_delay = 0.0;
};

inline LocalPartials local_partials(const SpikingNetwork& net, const ForwardTrace& trace, std::size_t e) {
  const Edge& edge = net.graph().edge(e);
  const double big_w = trace.causal_weight_sums[edge.to];
  const double arrival = trace.spike_times[edge.from] + net.delays()[e];
  const double w = net.weights()[e];
  return {w / big_w, (arrival - trace.spike_times[edge.to]) / big_w, w / big_w};
}

namespace detail {

// Propagates adjoints of the core's output spike times back to its input
// spike times. `adj` has one slot per node and is consumed.
inline void backward_core(const SpikingNetwork& net, const ForwardTrace& trace, std::vector<double>& adj,
                          std::span<double> d_weights, std::span<double> d_delays) {
  const NetworkGraph& g = net.graph();
  const auto weights = net.weights();
  const auto delays = net.delays();
  const auto topo = g.topo_order();
  for (std::size_t k = topo.size(); k-- > 0;) {
    const NodeId v = topo[k];
    if (g.is_input(v)) continue;
    const double a = adj[v];
    if (a == 0.0) continue;
    const double inv_w = 1.0 / trace.causal_weight_sums[v];
    const double t_v = trace.spike_times[v];
    for (std::size_t e : trace.causal_edges[v]) {
      const NodeId u = g.edge(e).from;
      const double share = a * weights[e] * inv_w;
      adj[u] += share;
      d_weights[e] += a * (trace.spike_times[u] + delays[e] - t_v) * inv_w;
      d_delays[e] += share;
    }
  }
}

}  // namespace detail

// Adds d(upstream . output)/d(params) into `grads` and returns d/dx. Zero
// entries of x are skipped when forming the encoder weight gradient.
inline std::vector<double> backward_accumulate(const AffineSnn& net, const GradientTape& tape,
                                               std::span<const double> upstream, ParamGradients& grads) {
  const AffineMap& dec = net.decoder();
  const AffineMap& enc = net.encoder();
  const NetworkGraph& g = net.graph();
  if (upstream.size() != dec.output_dim()) throw DimensionMismatch("upstream gradient has wrong length");

  const auto& t_out = tape.trace.outputs;
  std::vector<double> adj(g.node_count(), 0.0);
  for (std::size_t r = 0; r < dec.output_dim(); ++r) {
    const double up = upstream[r];
    grads.d_b_out[r] += up;
    if (up == 0.0) continue;
    auto grow = grads.d_w_out.row(r);
    const auto wrow = dec.weights.row(r);
    for (std::size_t c = 0; c < t_out.size(); ++c) {
      grow[c] += up * t_out[c];
      adj[g.outputs()[c]] += up * wrow[c];
    }
  }

  detail::backward_core(net.core(), tape.trace, adj, grads.d_weights, grads.d_delays);

  std::vector<double> d_x(enc.input_dim(), 0.0);
  for (std::size_t i = 0; i < g.inputs().size(); ++i) {
    const double gz = adj[g.inputs()[i]];
    grads.d_b_in[i] += gz;
    if (gz == 0.0) continue;
    auto grow = grads.d_w_in.row(i);
    const auto wrow = enc.weights.row(i);
    for (std::size_t c = 0; c < tape.x.size(); ++c) {
      const double xc = tape.x[c];
      d_x[c] += wrow[c] * gz;
      if (xc != 0.0) grow[c] += gz * xc;
    }
  }
  return d_x;
}

struct BackwardResult {
  ParamGradients grads;
  std::vector<double> d_input;
};

inline BackwardResult backward(const AffineSnn& net, const GradientTape& tape, std::span<const double> upstream) {
  BackwardResult out{ParamGradients::zeros_like(net), {}};
  out.d_input = backward_accumulate(net, tape, upstream, out.grads);
  return out;
}

}  // namespace affine_snn
