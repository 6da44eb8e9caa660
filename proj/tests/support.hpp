#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "affine_snn/affine.hpp"
#include "affine_snn/graph.hpp"
#include "affine_snn/matrix.hpp"
#include "affine_snn/rng.hpp"
#include "affine_snn/spike.hpp"

namespace test_support {

using namespace affine_snn;

// Random DAG on n nodes: each pair i < j gets an edge with probability p, then
// isolated nodes are attached to a neighbour so the graph is valid.
inline std::vector<Edge> random_dag_edges(std::size_t n, double p, Rng& rng) {
  std::vector<Edge> edges;
  std::vector<bool> touched(n, false);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.uniform() < p) {
        edges.push_back({i, j});
        touched[i] = touched[j] = true;
      }
  for (std::size_t v = 0; v < n; ++v) {
    if (touched[v]) continue;
    const std::size_t other = v + 1 < n ? v + 1 : v - 1;
    edges.push_back(v < other ? Edge{v, other} : Edge{other, v});
    touched[v] = touched[other] = true;
  }
  // Relabel so that node ids are not already a topological order.
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  rng.shuffle(perm);
  for (Edge& e : edges) e = {perm[e.from], perm[e.to]};
  return edges;
}

inline std::shared_ptr<const NetworkGraph> random_graph(std::size_t n, double p, Rng& rng) {
  return std::make_shared<const NetworkGraph>(NetworkGraph::build(random_dag_edges(n, p, rng), n));
}

inline Matrix random_matrix(std::size_t r, std::size_t c, double scale, Rng& rng) {
  Matrix m(r, c);
  for (double& v : m.values()) v = rng.uniform(-scale, scale);
  return m;
}

inline std::vector<double> random_vector(std::size_t n, double lo, double hi, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

inline SpikingNetwork random_core(std::shared_ptr<const NetworkGraph> g, double w_lo, double w_hi, double d_hi,
                                  Rng& rng) {
  const std::size_t m = g->edge_count();
  return SpikingNetwork(g, random_vector(m, w_lo, w_hi, rng), random_vector(m, 0.0, d_hi, rng));
}

// Random positive affine SNN with at most max_nodes nodes.
inline AffineSnn random_affine(std::size_t max_nodes, std::size_t d0, std::size_t d1, Rng& rng, double w_lo = 0.2,
                               double w_hi = 2.0, double d_hi = 1.0) {
  const std::size_t n = 2 + rng.index(max_nodes - 1);
  auto g = random_graph(n, 0.4, rng);
  SpikingNetwork core = random_core(g, w_lo, w_hi, d_hi, rng);
  AffineMap enc(random_matrix(g->inputs().size(), d0, 1.0, rng), random_vector(g->inputs().size(), -1.0, 1.0, rng));
  AffineMap dec(random_matrix(d1, g->outputs().size(), 1.0, rng), random_vector(d1, -1.0, 1.0, rng));
  return AffineSnn(std::move(enc), std::move(core), std::move(dec));
}

}  // namespace test_support
