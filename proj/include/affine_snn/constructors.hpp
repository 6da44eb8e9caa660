#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "affine_snn/affine.hpp"
#include "affine_snn/error.hpp"
#include "affine_snn/graph.hpp"
#include "affine_snn/matrix.hpp"
#include "affine_snn/spike.hpp"

namespace affine_snn {

// x -> c * max(a.x + b, 0) + d
struct RidgeTerm {
  std::vector<double> a;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  double operator()(std::span<const double> x) const {
    if (x.size() != a.size()) throw DimensionMismatch("ridge term applied to vector of wrong length");
    double s = b;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * x[i];
    return c * std::max(s, 0.0) + d;
  }
};

inline double eval_ridge_sum(std::span<const RidgeTerm> terms, std::span<const double> x) {
  double s = 0.0;
  for (const RidgeTerm& t : terms) s += t(x);
  return s;
}

struct Triangulation {
  std::size_t dim = 0;
  std::vector<std::vector<double>> vertices;
  std::vector<std::vector<std::size_t>> simplices;  // dim + 1 vertex indices each
  double h_min = 0.0;
  double h_max = 0.0;

  // Simplices containing vertex `eta`.
  std::vector<std::size_t> patch(std::size_t eta) const {
    std::vector<std::size_t> out;
    for (std::size_t s = 0; s < simplices.size(); ++s)
      if (std::find(simplices[s].begin(), simplices[s].end(), eta) != simplices[s].end()) out.push_back(s);
    return out;
  }
};

struct FemFunction {
  std::shared_ptr<const Triangulation> mesh;
  std::vector<double> values;  // one per vertex
};

namespace detail {

inline double distance(std::span<const double> p, std::span<const double> q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - q[i]) * (p[i] - q[i]);
  return std::sqrt(s);
}

// Solves A x = rhs (n x n, row-major, overwritten) by Gaussian elimination with
// partial pivoting. Returns false when a pivot is below 1e-12 times the norm of
// its original row.
inline bool solve_linear(std::vector<double> a, std::vector<double> rhs, std::size_t n, std::vector<double>& x) {
  std::vector<double> row_norm(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) row_norm[r] = std::max(row_norm[r], std::abs(a[r * n + c]));
  }
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t best = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[best * n + col])) best = r;
    if (best != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[best * n + c]);
      std::swap(rhs[col], rhs[best]);
      std::swap(perm[col], perm[best]);
    }
    const double pivot = a[col * n + col];
    if (!(std::abs(pivot) >= 1e-12 * row_norm[perm[col]]) || pivot == 0.0) return false;
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / pivot;
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      rhs[r] -= f * rhs[col];
    }
  }
  x.assign(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double s = rhs[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i * n + c] * x[c];
    x[i] = s / a[i * n + i];
  }
  return true;
}

inline std::shared_ptr<const NetworkGraph> fan_in_graph(std::size_t inputs) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < inputs; ++i) edges.push_back({i, inputs});
  return std::make_shared<const NetworkGraph>(NetworkGraph::build(std::move(edges), inputs + 1));
}

inline void require_positive_eps(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidParameters("epsilon must be positive and finite");
}

}  // namespace detail

// One neuron fed by d0 inputs, weights 1/eps; output lies in (min x, min x + eps].
inline AffineSnn build_min_net(std::size_t d0, double eps) {
  if (d0 < 1) throw InvalidParameters("min network needs at least one input");
  detail::require_positive_eps(eps);
  SpikingNetwork core(detail::fan_in_graph(d0), std::vector<double>(d0, 1.0 / eps), std::vector<double>(d0, 0.0));
  return AffineSnn(AffineMap::identity(d0), std::move(core), AffineMap::identity(1));
}

// max x = -min(-x).
inline AffineSnn build_max_net(std::size_t d0, double eps) {
  if (d0 < 1) throw InvalidParameters("max network needs at least one input");
  detail::require_positive_eps(eps);
  Matrix neg_in(d0, d0);
  for (std::size_t i = 0; i < d0; ++i) neg_in(i, i) = -1.0;
  SpikingNetwork core(detail::fan_in_graph(d0), std::vector<double>(d0, 1.0 / eps), std::vector<double>(d0, 0.0));
  return AffineSnn(AffineMap(std::move(neg_in), std::vector<double>(d0, 0.0)), std::move(core),
                   AffineMap(Matrix(1, 1, -1.0), {0.0}));
}

// Emulates c * max(a.x + b, 0) + d to within |c| * eps. The neuron computes
// roughly min(-(a.x + b), 0) = -max(a.x + b, 0) and the decoder flips it back.
inline AffineSnn build_ridge_net(const RidgeTerm& term, double eps) {
  detail::require_positive_eps(eps);
  const std::size_t d0 = term.a.size();
  if (d0 == 0) throw InvalidParameters("ridge term needs a nonempty direction");
  Matrix w_in(2, d0);
  for (std::size_t i = 0; i < d0; ++i) w_in(0, i) = -term.a[i];
  SpikingNetwork core(detail::fan_in_graph(2), {1.0 / eps, 1.0 / eps}, {0.0, 0.0});
  return AffineSnn(AffineMap(std::move(w_in), {-term.b, 0.0}), std::move(core),
                   AffineMap(Matrix(1, 1, -term.c), {term.d}));
}

inline AffineSnn build_ridge_sum(std::span<const RidgeTerm> terms, double eps) {
  if (terms.empty()) throw InvalidParameters("ridge sum needs at least one term");
  AffineSnn net = build_ridge_net(terms[0], eps);
  for (std::size_t i = 1; i < terms.size(); ++i) net = add(net, build_ridge_net(terms[i], eps));
  return net;
}

// Emulates a given ridge sum, e.g. one with Barron-type coefficients. With
// eps = target / sum|c_i| the emulation error stays below `target`.
inline AffineSnn build_barron_sum_net(std::span<const RidgeTerm> terms, double eps) {
  return build_ridge_sum(terms, eps);
}

inline double barron_eps_for_target(std::span<const RidgeTerm> terms, double target) {
  double c_sum = 0.0;
  for (const RidgeTerm& t : terms) c_sum += std::abs(t.c);
  if (!(target > 0.0)) throw InvalidParameters("target error must be positive");
  return c_sum > 0.0 ? target / c_sum : target;
}

inline void compute_mesh_sizes(Triangulation& tri) {
  tri.h_min = INFINITY;
  tri.h_max = 0.0;
  for (const auto& s : tri.simplices)
    for (std::size_t i = 0; i < s.size(); ++i)
      for (std::size_t j = i + 1; j < s.size(); ++j) {
        const double d = detail::distance(tri.vertices[s[i]], tri.vertices[s[j]]);
        tri.h_min = std::min(tri.h_min, d);
        tri.h_max = std::max(tri.h_max, d);
      }
}

// Checks shapes and index ranges, then fills h_min and h_max.
inline void validate_triangulation(Triangulation& tri) {
  if (tri.dim < 1) throw InvalidParameters("triangulation dimension must be positive");
  if (tri.vertices.empty() || tri.simplices.empty()) throw InvalidParameters("triangulation is empty");
  for (const auto& v : tri.vertices)
    if (v.size() != tri.dim) throw DimensionMismatch("vertex has wrong dimension");
  for (const auto& s : tri.simplices) {
    if (s.size() != tri.dim + 1) throw DimensionMismatch("simplex must list dim + 1 vertices");
    for (std::size_t i : s)
      if (i >= tri.vertices.size()) throw InvalidParameters("simplex references a missing vertex");
  }
  compute_mesh_sizes(tri);
}

// Uniform mesh of [0,1]^dim, dim in {1, 2}. In 2D every square is cut along
// the diagonal from its lower-left to its upper-right corner.
inline Triangulation regular_grid_triangulation(std::size_t dim, std::size_t n) {
  if (n < 1) throw InvalidParameters("grid needs at least one cell per axis");
  Triangulation tri;
  tri.dim = dim;
  const double h = 1.0 / static_cast<double>(n);
  if (dim == 1) {
    for (std::size_t i = 0; i <= n; ++i) tri.vertices.push_back({static_cast<double>(i) * h});
    for (std::size_t i = 0; i < n; ++i) tri.simplices.push_back({i, i + 1});
  } else if (dim == 2) {
    auto id = [n](std::size_t i, std::size_t j) { return j * (n + 1) + i; };
    for (std::size_t j = 0; j <= n; ++j)
      for (std::size_t i = 0; i <= n; ++i)
        tri.vertices.push_back({static_cast<double>(i) * h, static_cast<double>(j) * h});
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) {
        tri.simplices.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
        tri.simplices.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
      }
  } else {
    throw InvalidParameters("regular grids are available in dimensions 1 and 2 only");
  }
  compute_mesh_sizes(tri);
  return tri;
}

// Affine piece g(x) = a.x + b of the hat at `eta` on simplex `s`: 1 at eta and
// 0 at the other vertices.
inline RidgeTerm hat_piece(const Triangulation& tri, std::size_t s, std::size_t eta) {
  const std::size_t n = tri.dim + 1;
  const auto& simplex = tri.simplices[s];
  std::vector<double> a(n * n), rhs(n), sol;
  for (std::size_t r = 0; r < n; ++r) {
    const auto& p = tri.vertices[simplex[r]];
    for (std::size_t c = 0; c < tri.dim; ++c) a[r * n + c] = p[c];
    a[r * n + tri.dim] = 1.0;
    rhs[r] = simplex[r] == eta ? 1.0 : 0.0;
  }
  if (!detail::solve_linear(std::move(a), std::move(rhs), n, sol)) throw SingularSimplex(s);
  RidgeTerm g;
  g.a.assign(sol.begin(), sol.begin() + static_cast<std::ptrdiff_t>(tri.dim));
  g.b = sol[tri.dim];
  return g;
}

// Exact nodal basis function phi_eta(x) = max(0, min_tau g_tau(x)), valid when
// the patch of eta is convex.
inline double eval_hat(const Triangulation& tri, std::size_t eta, std::span<const double> x) {
  double m = INFINITY;
  for (std::size_t s : tri.patch(eta)) {
    const RidgeTerm g = hat_piece(tri, s, eta);
    double v = g.b;
    for (std::size_t i = 0; i < tri.dim; ++i) v += g.a[i] * x[i];
    m = std::min(m, v);
  }
  return std::max(m, 0.0);
}

// Two-layer network for phi_eta. Input nodes 0..T-1 carry g_tau(x) for the T
// simplices around eta and node T carries 0; node T+1 fires near the min of
// the g's, node T+2 one unit later, node T+3 near min(node T+1, 0). The
// decoder (p, q) -> p - 1 - q returns max(min g, 0). Each neuron adds at most
// eps/3, so the total error is at most eps. The caller is responsible for the
// convexity of the patch around eta.
inline AffineSnn build_hat_net(const Triangulation& tri, std::size_t eta, double eps) {
  detail::require_positive_eps(eps);
  if (eta >= tri.vertices.size()) throw InvalidParameters("hat vertex index out of range");
  const std::vector<std::size_t> patch = tri.patch(eta);
  if (patch.empty()) throw InvalidParameters("vertex belongs to no simplex");
  const std::size_t t = patch.size();
  const std::size_t d0 = tri.dim;

  Matrix w_in(t + 1, d0);
  std::vector<double> b_in(t + 1, 0.0);
  for (std::size_t k = 0; k < t; ++k) {
    const RidgeTerm g = hat_piece(tri, patch[k], eta);
    for (std::size_t i = 0; i < d0; ++i) w_in(k, i) = g.a[i];
    b_in[k] = g.b;
  }

  const NodeId zero = t, w = t + 1, v1 = t + 2, v2 = t + 3;
  const double big = 3.0 / eps;
  std::vector<Edge> edges;
  std::vector<double> weights;
  for (NodeId u = 0; u < t; ++u) {
    edges.push_back({u, w});
    weights.push_back(big);
  }
  edges.push_back({w, v1});
  weights.push_back(1.0);
  edges.push_back({w, v2});
  weights.push_back(big);
  edges.push_back({zero, v2});
  weights.push_back(big);
  auto graph = std::make_shared<const NetworkGraph>(NetworkGraph::build(std::move(edges), t + 4));
  const std::size_t m = weights.size();
  SpikingNetwork core(std::move(graph), std::move(weights), std::vector<double>(m, 0.0));

  Matrix w_out(1, 2);
  w_out(0, 0) = 1.0;
  w_out(0, 1) = -1.0;
  return AffineSnn(AffineMap(std::move(w_in), std::move(b_in)), std::move(core),
                   AffineMap(std::move(w_out), {-1.0}));
}

// Sum over vertices of f(eta) * phi_eta; error at most sum|f(eta)| * eps.
inline AffineSnn build_fem_net(const FemFunction& f, double eps) {
  if (!f.mesh) throw InvalidParameters("finite element function has no mesh");
  const Triangulation& tri = *f.mesh;
  if (f.values.size() != tri.vertices.size()) throw DimensionMismatch("need one nodal value per vertex");
  AffineSnn net;
  bool first = true;
  for (std::size_t eta = 0; eta < tri.vertices.size(); ++eta) {
    if (!std::isfinite(f.values[eta])) throw InvalidParameters("nodal values must be finite");
    AffineSnn hat = build_hat_net(tri, eta, eps);
    AffineMap& dec = hat.mutable_decoder();
    for (double& x : dec.weights.values()) x *= f.values[eta];
    for (double& x : dec.bias) x *= f.values[eta];
    if (first) {
      net = std::move(hat);
      first = false;
    } else {
      net = add(net, hat);
    }
  }
  return net;
}

// Piecewise-linear interpolant of the nodal values, evaluated through the
// barycentric coordinates of the simplex containing x.
inline double eval_fem(const FemFunction& f, std::span<const double> x, double tol = 1e-12) {
  const Triangulation& tri = *f.mesh;
  for (std::size_t s = 0; s < tri.simplices.size(); ++s) {
    double value = 0.0;
    bool inside = true;
    for (std::size_t eta : tri.simplices[s]) {
      const RidgeTerm g = hat_piece(tri, s, eta);
      double lambda = g.b;
      for (std::size_t i = 0; i < tri.dim; ++i) lambda += g.a[i] * x[i];
      if (lambda < -tol) {
        inside = false;
        break;
      }
      value += lambda * f.values[eta];
    }
    if (inside) return value;
  }
  throw InvalidParameters("point lies outside the triangulated domain");
}

}  // namespace affine_snn
