#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <functional>
#include <optional>
#include <queue>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "affine_snn/error.hpp"

namespace affine_snn {

using NodeId = std::size_t;

struct Edge {
  NodeId from = 0;
  NodeId to = 0;
  auto operator<=>(const Edge&) const = default;
};

// Immutable directed acyclic network graph.
//
// Input nodes are exactly the nodes without incoming edges and output nodes
// exactly those without outgoing edges. Their enumeration (the order in which
// they map to realization vector coordinates) is ascending NodeId unless an
// explicit permutation is supplied at construction. Edge indices are the
// positions in the edge list passed to build().
class NetworkGraph {
 public:
  static NetworkGraph build(std::vector<Edge> edges, std::size_t node_count,
                            std::optional<std::vector<NodeId>> input_order = std::nullopt,
                            std::optional<std::vector<NodeId>> output_order = std::nullopt) {
    NetworkGraph g;
    g.node_count_ = node_count;
    g.edges_ = std::move(edges);
    if (node_count == 0) throw InvalidGraph("network graph needs at least one node");

    g.incoming_.assign(node_count, {});
    g.outgoing_.assign(node_count, {});
    std::set<Edge> seen;
    for (std::size_t e = 0; e < g.edges_.size(); ++e) {
      const Edge& edge = g.edges_[e];
      if (edge.from >= node_count || edge.to >= node_count)
        throw InvalidGraph("edge (" + std::to_string(edge.from) + ", " + std::to_string(edge.to) +
                           ") references a node outside 0.." + std::to_string(node_count - 1));
      if (edge.from == edge.to) throw CycleDetected();
      if (!seen.insert(edge).second) throw DuplicateEdge(edge.from, edge.to);
      g.incoming_[edge.to].push_back(e);
      g.outgoing_[edge.from].push_back(e);
    }
    for (NodeId v = 0; v < node_count; ++v)
      if (g.incoming_[v].empty() && g.outgoing_[v].empty()) throw IsolatedNode(v);

    // Kahn elimination, smallest ready NodeId first.
    std::vector<std::size_t> indegree(node_count);
    std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
    for (NodeId v = 0; v < node_count; ++v) {
      indegree[v] = g.incoming_[v].size();
      if (indegree[v] == 0) ready.push(v);
    }
    g.topo_order_.reserve(node_count);
    while (!ready.empty()) {
      const NodeId u = ready.top();
      ready.pop();
      g.topo_order_.push_back(u);
      for (std::size_t e : g.outgoing_[u])
        if (--indegree[g.edges_[e].to] == 0) ready.push(g.edges_[e].to);
    }
    if (g.topo_order_.size() != node_count) throw CycleDetected();

    g.levels_.assign(node_count, 0);
    for (NodeId v : g.topo_order_)
      for (std::size_t e : g.incoming_[v]) g.levels_[v] = std::max(g.levels_[v], g.levels_[g.edges_[e].from] + 1);
    g.depth_ = *std::max_element(g.levels_.begin(), g.levels_.end());

    std::vector<NodeId> inputs, outputs;
    for (NodeId v = 0; v < node_count; ++v) {
      if (g.incoming_[v].empty()) inputs.push_back(v);
      if (g.outgoing_[v].empty()) outputs.push_back(v);
    }
    g.inputs_ = resolve_order(std::move(inputs), std::move(input_order), "input");
    g.outputs_ = resolve_order(std::move(outputs), std::move(output_order), "output");

    g.input_slot_.assign(node_count, npos);
    for (std::size_t i = 0; i < g.inputs_.size(); ++i) g.input_slot_[g.inputs_[i]] = i;
    return g;
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  std::size_t node_count() const noexcept { return node_count_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  std::span<const Edge> edges() const noexcept { return edges_; }
  const Edge& edge(std::size_t e) const { return edges_[e]; }

  std::span<const NodeId> inputs() const noexcept { return inputs_; }
  std::span<const NodeId> outputs() const noexcept { return outputs_; }
  std::span<const NodeId> topo_order() const noexcept { return topo_order_; }

  // Edge indices, ascending.
  std::span<const std::size_t> incoming(NodeId v) const { return incoming_[v]; }
  std::span<const std::size_t> outgoing(NodeId v) const { return outgoing_[v]; }

  bool is_input(NodeId v) const { return incoming_[v].empty(); }
  // Position of v in inputs(), or npos.
  std::size_t input_slot(NodeId v) const { return input_slot_[v]; }

  // Longest directed path length from any input to v.
  std::size_t level(NodeId v) const { return levels_[v]; }
  std::span<const std::size_t> levels() const noexcept { return levels_; }
  std::size_t depth() const noexcept { return depth_; }

 private:
  NetworkGraph() = default;

  static std::vector<NodeId> resolve_order(std::vector<NodeId> derived, std::optional<std::vector<NodeId>> given,
                                           const char* what) {
    if (!given) return derived;
    std::vector<NodeId> sorted = *given;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != derived)
      throw InvalidGraph(std::string("declared ") + what + " nodes do not match the graph's " + what + " nodes");
    return std::move(*given);
  }

  std::size_t node_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> incoming_;
  std::vector<std::vector<std::size_t>> outgoing_;
  std::vector<NodeId> topo_order_;
  std::vector<NodeId> inputs_;
  std::vector<NodeId> outputs_;
  std::vector<std::size_t> input_slot_;
  std::vector<std::size_t> levels_;
  std::size_t depth_ = 0;
};

inline NetworkGraph build_graph(std::vector<Edge> edges, std::size_t node_count) {
  return NetworkGraph::build(std::move(edges), node_count);
}

// Split of the edge set into depth-1 subgraphs by longest-path node level.
// layers[i] holds the incoming edges of every level-(i+1) node, in edge-list
// order; node_levels[v] is the longest-path distance from the inputs.
struct Layering {
  std::vector<std::vector<Edge>> layers;
  std::vector<std::size_t> node_levels;
};

inline Layering layering(const NetworkGraph& g) {
  Layering out;
  out.node_levels.assign(g.levels().begin(), g.levels().end());
  out.layers.assign(g.depth(), {});
  for (const Edge& e : g.edges()) out.layers[g.level(e.to) - 1].push_back(e);
  return out;
}

}  // namespace affine_snn
