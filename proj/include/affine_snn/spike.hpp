#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "affine_snn/error.hpp"
#include "affine_snn/graph.hpp"

namespace affine_snn {

// Positive mode requires every synaptic weight > 0. General mode admits real
// weights; neurons may then fail to spike, which is reported as NoSpike.
enum class WeightMode { positive, general };

// A presynaptic spike as seen by the receiving neuron: arrival = t_u + d_(u,v).
struct Arrival {
  double time = 0.0;
  double weight = 0.0;
};

struct SpikeSolution {
  double time = 0.0;
  // Number of arrivals (in ascending (time, index) order) with time <= spike time.
  std::size_t causal_count = 0;
};

namespace detail {

// Solves min{t : sum_i w_i * max(t - a_i, 0) = 1}.
//
// Arrivals are consumed in ascending (time, index) order from a min-heap, so
// only the causal prefix and one look-ahead element are ever extracted. On
// return `order[0..causal_count)` lists the causal arrival indices in that
// order. Returns false (general mode only) when the potential never reaches 1.
//
// On each interval [a_k, a_{k+1}] the potential is affine with slope W_k (sum
// of the first k weights). The first interval with W_k > 0 and
// P(a_{k+1}) >= 1 contains the crossing, t = (1 + S_k) / W_k where S_k is the
// weighted sum of arrival times. Arrivals that coincide with t join the causal
// set (closed convention); in general mode only while the weight sum stays
// positive, since otherwise the formula degenerates.
inline bool solve_spike(std::span<const Arrival> arrivals, WeightMode mode, std::vector<std::size_t>& order,
                        SpikeSolution& out) {
  const std::size_t n = arrivals.size();
  order.resize(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  // std heap algorithms keep the "largest" at the front; invert for a min-heap.
  auto later = [&](std::size_t a, std::size_t b) {
    if (arrivals[a].time != arrivals[b].time) return arrivals[a].time > arrivals[b].time;
    return a > b;
  };
  std::make_heap(order.begin(), order.end(), later);
  auto heap_end = order.end();

  // Times are accumulated relative to the first arrival t0 for accuracy.
  double t0 = 0.0;
  double weight_sum = 0.0;
  double weighted_offset_sum = 0.0;
  std::size_t k = 0;
  while (heap_end != order.begin()) {
    std::pop_heap(order.begin(), heap_end, later);
    --heap_end;
    const Arrival& a = arrivals[*heap_end];
    if (k == 0) t0 = a.time;
    weight_sum += a.weight;
    weighted_offset_sum += a.weight * (a.time - t0);
    ++k;
    if (!(weight_sum > 0.0)) continue;

    const bool last = heap_end == order.begin();
    const double next_time = last ? 0.0 : arrivals[order.front()].time;
    if (!last && weight_sum * (next_time - t0) - weighted_offset_sum < 1.0) continue;

    double t = t0 + (1.0 + weighted_offset_sum) / weight_sum;
    t = std::max(t, a.time);
    if (!last) t = std::min(t, next_time);

    // Absorb ties with t into the causal set.
    while (heap_end != order.begin() && arrivals[order.front()].time <= t) {
      const Arrival& tie = arrivals[order.front()];
      if (mode == WeightMode::general && !(weight_sum + tie.weight > 0.0)) break;
      std::pop_heap(order.begin(), heap_end, later);
      --heap_end;
      weight_sum += tie.weight;
      ++k;
    }
    // Popped elements sit at the back in reverse extraction order.
    std::reverse(heap_end, order.end());
    std::rotate(order.begin(), heap_end, order.end());
    out.time = t;
    out.causal_count = k;
    return true;
  }
  return false;
}

}  // namespace detail

// Closed-form spike time of a single neuron. Throws NoSpike(0) in general mode
// when the potential never reaches the threshold; in positive mode the input
// must be nonempty with positive weights.
inline SpikeSolution neuron_spike_time(std::span<const Arrival> arrivals, WeightMode mode = WeightMode::positive) {
  if (arrivals.empty()) throw InvalidParameters("neuron has no incoming arrivals");
  if (mode == WeightMode::positive)
    for (const Arrival& a : arrivals)
      if (!(a.weight > 0.0)) throw InvalidParameters("positive mode requires strictly positive weights");
  std::vector<std::size_t> order;
  SpikeSolution sol;
  if (!detail::solve_spike(arrivals, mode, order, sol)) throw NoSpike(0);
  return sol;
}

// Synaptic weights and delays bound to a network graph; indexed by edge.
class SpikingNetwork {
 public:
  SpikingNetwork() = default;
  SpikingNetwork(std::shared_ptr<const NetworkGraph> graph, std::vector<double> weights, std::vector<double> delays,
                 WeightMode mode = WeightMode::positive)
      : graph_(std::move(graph)), weights_(std::move(weights)), delays_(std::move(delays)), mode_(mode) {
    validate();
  }

  const NetworkGraph& graph() const { return *graph_; }
  const std::shared_ptr<const NetworkGraph>& graph_ptr() const { return graph_; }
  std::span<const double> weights() const { return weights_; }
  std::span<const double> delays() const { return delays_; }
  std::span<double> mutable_weights() { return weights_; }
  std::span<double> mutable_delays() { return delays_; }
  WeightMode mode() const { return mode_; }
  bool positive() const { return mode_ == WeightMode::positive; }

  std::size_t input_count() const { return graph_->inputs().size(); }
  std::size_t output_count() const { return graph_->outputs().size(); }

  void validate() const {
    if (!graph_) throw InvalidParameters("spiking network has no graph");
    const std::size_t m = graph_->edge_count();
    if (weights_.size() != m || delays_.size() != m)
      throw DimensionMismatch("weights and delays must have one entry per edge");
    for (std::size_t e = 0; e < m; ++e) {
      if (!std::isfinite(weights_[e]) || !std::isfinite(delays_[e]))
        throw InvalidParameters("synaptic parameters must be finite");
      if (delays_[e] < 0.0) throw InvalidParameters("synaptic delays must be nonnegative");
      if (mode_ == WeightMode::positive && !(weights_[e] > 0.0))
        throw InvalidParameters("positive network requires strictly positive weights");
    }
    if (mode_ == WeightMode::general) {
      for (NodeId v = 0; v < graph_->node_count(); ++v) {
        if (graph_->is_input(v)) continue;
        const auto in = graph_->incoming(v);
        if (std::none_of(in.begin(), in.end(), [&](std::size_t e) { return weights_[e] > 0.0; }))
          throw InvalidParameters("neuron " + std::to_string(v) + " has no excitatory synapse");
      }
    }
  }

  double min_weight() const { return weights_.empty() ? 0.0 : *std::min_element(weights_.begin(), weights_.end()); }
  double max_delay() const { return delays_.empty() ? 0.0 : *std::max_element(delays_.begin(), delays_.end()); }

 private:
  std::shared_ptr<const NetworkGraph> graph_;
  std::vector<double> weights_;
  std::vector<double> delays_;
  WeightMode mode_ = WeightMode::positive;
};

// Everything a forward pass determines, kept for differentiation.
struct ForwardTrace {
  std::vector<double> spike_times;                  // per node
  std::vector<std::vector<std::size_t>> causal_edges;  // per node, edge indices in arrival order
  std::vector<double> causal_weight_sums;           // per node; 0 for inputs
  std::vector<double> outputs;                      // spike times of the output nodes, enumeration order
};

// Event-driven evaluation over the topological order.
inline ForwardTrace forward(const SpikingNetwork& net, std::span<const double> input_times) {
  const NetworkGraph& g = net.graph();
  if (input_times.size() != g.inputs().size())
    throw DimensionMismatch("expected " + std::to_string(g.inputs().size()) + " input spike times, got " +
                            std::to_string(input_times.size()));
  for (double t : input_times)
    if (!std::isfinite(t)) throw InvalidParameters("input spike times must be finite");

  ForwardTrace trace;
  trace.spike_times.assign(g.node_count(), 0.0);
  trace.causal_edges.assign(g.node_count(), {});
  trace.causal_weight_sums.assign(g.node_count(), 0.0);
  for (std::size_t i = 0; i < g.inputs().size(); ++i) trace.spike_times[g.inputs()[i]] = input_times[i];

  const auto weights = net.weights();
  const auto delays = net.delays();
  std::vector<Arrival> arrivals;
  std::vector<std::size_t> order;
  for (NodeId v : g.topo_order()) {
    if (g.is_input(v)) continue;
    const auto in = g.incoming(v);
    arrivals.clear();
    for (std::size_t e : in) arrivals.push_back({trace.spike_times[g.edge(e).from] + delays[e], weights[e]});
    SpikeSolution sol;
    if (!detail::solve_spike(arrivals, net.mode(), order, sol)) throw NoSpike(v);
    trace.spike_times[v] = sol.time;
    auto& causal = trace.causal_edges[v];
    causal.resize(sol.causal_count);
    double w_sum = 0.0;
    for (std::size_t i = 0; i < sol.causal_count; ++i) {
      causal[i] = in[order[i]];
      w_sum += weights[causal[i]];
    }
    trace.causal_weight_sums[v] = w_sum;
  }
  trace.outputs.reserve(g.outputs().size());
  for (NodeId v : g.outputs()) trace.outputs.push_back(trace.spike_times[v]);
  return trace;
}

// Realization of a spiking network: input spike times -> output spike times.
inline std::vector<double> realize(const SpikingNetwork& net, std::span<const double> input_times) {
  return forward(net, input_times).outputs;
}

inline std::vector<double> clip(std::span<const double> values, double lo, double hi) {
  if (!(lo <= hi)) throw InvalidParameters("clip interval must satisfy lo <= hi");
  std::vector<double> out(values.begin(), values.end());
  for (double& v : out) v = std::clamp(v, lo, hi);
  return out;
}

}  // namespace affine_snn
