#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "affine_snn/error.hpp"
#include "affine_snn/graph.hpp"
#include "affine_snn/matrix.hpp"
#include "affine_snn/spike.hpp"

namespace affine_snn {

// Spiking network wrapped by an affine encoder (R^d0 -> R^d_in, one row per
// input node) and decoder (R^d_out -> R^d1, one column per output node).
class AffineSnn {
 public:
  AffineSnn() = default;
  AffineSnn(AffineMap encoder, SpikingNetwork core, AffineMap decoder)
      : encoder_(std::move(encoder)), core_(std::move(core)), decoder_(std::move(decoder)) {
    if (encoder_.output_dim() != core_.input_count())
      throw DimensionMismatch("encoder rows must equal the number of input nodes");
    if (decoder_.input_dim() != core_.output_count())
      throw DimensionMismatch("decoder columns must equal the number of output nodes");
  }

  const AffineMap& encoder() const { return encoder_; }
  const SpikingNetwork& core() const { return core_; }
  const AffineMap& decoder() const { return decoder_; }
  AffineMap& mutable_encoder() { return encoder_; }
  SpikingNetwork& mutable_core() { return core_; }
  AffineMap& mutable_decoder() { return decoder_; }

  std::size_t input_dim() const { return encoder_.input_dim(); }
  std::size_t output_dim() const { return decoder_.output_dim(); }
  const NetworkGraph& graph() const { return core_.graph(); }

 private:
  AffineMap encoder_;
  SpikingNetwork core_;
  AffineMap decoder_;
};

inline std::vector<double> realize(const AffineSnn& net, std::span<const double> x) {
  const std::vector<double> z = net.encoder().apply(x);
  const std::vector<double> t = realize(net.core(), z);
  return net.decoder().apply(t);
}

inline std::vector<double> realize_clipped(const AffineSnn& net, std::span<const double> x, double lo, double hi) {
  return clip(realize(net, x), lo, hi);
}

namespace detail {
inline std::size_t count_nonzero(std::span<const double> v) {
  std::size_t n = 0;
  for (double x : v) n += x != 0.0;
  return n;
}
}  // namespace detail

// Number of nonzero scalars among weights, delays, encoder and decoder.
inline std::size_t size(const AffineSnn& net) {
  return detail::count_nonzero(net.core().weights()) + detail::count_nonzero(net.core().delays()) +
         detail::count_nonzero(net.encoder().weights.values()) + detail::count_nonzero(net.encoder().bias) +
         detail::count_nonzero(net.decoder().weights.values()) + detail::count_nonzero(net.decoder().bias);
}

// Parallel sum: disjoint union of the graphs (b's nodes shifted past a's),
// encoders stacked, decoders side by side, decoder biases added.
inline AffineSnn add(const AffineSnn& a, const AffineSnn& b) {
  if (a.input_dim() != b.input_dim() || a.output_dim() != b.output_dim())
    throw DimensionMismatch("added networks must share input and output dimensions");
  const NetworkGraph& ga = a.graph();
  const NetworkGraph& gb = b.graph();
  const std::size_t offset = ga.node_count();

  std::vector<Edge> edges(ga.edges().begin(), ga.edges().end());
  for (const Edge& e : gb.edges()) edges.push_back({e.from + offset, e.to + offset});
  std::vector<NodeId> inputs(ga.inputs().begin(), ga.inputs().end());
  for (NodeId v : gb.inputs()) inputs.push_back(v + offset);
  std::vector<NodeId> outputs(ga.outputs().begin(), ga.outputs().end());
  for (NodeId v : gb.outputs()) outputs.push_back(v + offset);
  auto graph = std::make_shared<const NetworkGraph>(
      NetworkGraph::build(std::move(edges), offset + gb.node_count(), std::move(inputs), std::move(outputs)));

  auto concat = [](std::span<const double> x, std::span<const double> y) {
    std::vector<double> out(x.begin(), x.end());
    out.insert(out.end(), y.begin(), y.end());
    return out;
  };
  const WeightMode mode =
      a.core().positive() && b.core().positive() ? WeightMode::positive : WeightMode::general;
  SpikingNetwork core(graph, concat(a.core().weights(), b.core().weights()),
                      concat(a.core().delays(), b.core().delays()), mode);

  const std::size_t d0 = a.input_dim();
  Matrix w_in(a.encoder().output_dim() + b.encoder().output_dim(), d0);
  for (std::size_t r = 0; r < a.encoder().output_dim(); ++r)
    for (std::size_t c = 0; c < d0; ++c) w_in(r, c) = a.encoder().weights(r, c);
  for (std::size_t r = 0; r < b.encoder().output_dim(); ++r)
    for (std::size_t c = 0; c < d0; ++c) w_in(a.encoder().output_dim() + r, c) = b.encoder().weights(r, c);
  AffineMap encoder(std::move(w_in), concat(a.encoder().bias, b.encoder().bias));

  const std::size_t d1 = a.output_dim();
  const std::size_t na = a.decoder().input_dim();
  Matrix w_out(d1, na + b.decoder().input_dim());
  std::vector<double> b_out(d1);
  for (std::size_t r = 0; r < d1; ++r) {
    for (std::size_t c = 0; c < na; ++c) w_out(r, c) = a.decoder().weights(r, c);
    for (std::size_t c = 0; c < b.decoder().input_dim(); ++c) w_out(r, na + c) = b.decoder().weights(r, c);
    b_out[r] = a.decoder().bias[r] + b.decoder().bias[r];
  }
  return AffineSnn(std::move(encoder), std::move(core), AffineMap(std::move(w_out), std::move(b_out)));
}

}  // namespace affine_snn
