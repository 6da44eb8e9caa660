#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "affine_snn/affine.hpp"
#include "affine_snn/error.hpp"
#include "affine_snn/graph.hpp"
#include "affine_snn/matrix.hpp"

namespace affine_snn {

// Architecture box of the parameterized hypothesis class: weights >= b,
// delays and all other parameter magnitudes <= B.
struct ParamBox {
  std::size_t d0 = 1;
  std::size_t d1 = 1;
  std::size_t d_in = 1;
  std::size_t d_out = 1;
  std::size_t edges = 1;
  std::size_t depth = 1;
  double b = 1.0;
  double big_b = 1.0;

  static ParamBox from_graph(const NetworkGraph& g, std::size_t d0, std::size_t d1, double b, double big_b) {
    return {d0, d1, g.inputs().size(), g.outputs().size(), g.edge_count(), g.depth(), b, big_b};
  }

  // Parameter count d_in*d0 + 2#E + d1*d_out.
  std::size_t parameter_count() const { return d_in * d0 + 2 * edges + d1 * d_out; }

  void validate() const {
    if (!(b > 0.0 && b <= 1.0)) throw InvalidParameters("weight floor b must lie in (0, 1]");
    if (!(big_b >= 1.0) || !std::isfinite(big_b)) throw InvalidParameters("parameter bound B must be >= 1");
  }
};

// Input Lipschitz constant sqrt(d0 d_out) |W_in|_F |W_out|_F w.r.t. sup norms.
inline double input_lipschitz(const AffineSnn& net) {
  const double d0 = static_cast<double>(net.input_dim());
  const double d_out = static_cast<double>(net.core().output_count());
  return std::sqrt(d0 * d_out) * net.encoder().weights.frobenius_norm() * net.decoder().weights.frobenius_norm();
}

// Sensitivity of output spike times to sup-norm changes of weights and delays.
inline double param_lipschitz_factor(double depth, double b) {
  if (!(b > 0.0)) throw InvalidParameters("weight floor must be positive");
  return depth * (1.0 + 1.0 / (b * b));
}

// Bound on the output spike times for all-zero input spike times.
inline double zero_output_bound(double depth, double b, double big_b) {
  if (!(b > 0.0)) throw InvalidParameters("weight floor must be positive");
  return depth * (1.0 / b + big_b);
}

// Lipschitz constant of the parameters-to-function map on the box.
inline double l_star(const ParamBox& box) {
  const double d_out = static_cast<double>(box.d_out);
  const double d_in = static_cast<double>(box.d_in);
  const double d0 = static_cast<double>(box.d0);
  const double depth = static_cast<double>(box.depth);
  return d_out * (2.0 * std::sqrt(d_in) * d0 * box.big_b + box.big_b * depth * (1.0 + 1.0 / (box.b * box.b)) +
                  2.0 * box.big_b + depth * (1.0 / box.b + box.big_b)) +
         1.0;
}

// M * ln ceil(2 B L* / eps).
inline double log_covering(double parameter_count, double big_b, double l_star_value, double eps) {
  if (!(eps > 0.0)) throw InvalidParameters("covering radius must be positive");
  return parameter_count * std::log(std::ceil(2.0 * big_b * l_star_value / eps));
}

inline double log_covering(const ParamBox& box, double eps) {
  return log_covering(static_cast<double>(box.parameter_count()), box.big_b, l_star(box), eps);
}

struct GapResult {
  double gap = 0.0;
  bool feasible = false;
  double required_samples_term = 0.0;  // 2 (M ln(m ceil(16 B L*)) + ln(2/delta))
};

// Uniform deviation between risk and empirical risk, holding with
// probability 1 - delta once m exceeds required_samples_term.
inline GapResult generalization_gap(double parameter_count, double big_b, double l_star_value, double m,
                                    double delta) {
  if (!(m >= 1.0)) throw InvalidParameters("sample count must be at least 1");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidParameters("confidence delta must lie in (0, 1)");
  // ln(m * ceil(.)) as a sum of logs to stay finite for large arguments.
  const double log_term = std::log(m) + std::log(std::ceil(16.0 * big_b * l_star_value));
  GapResult r;
  r.required_samples_term = 2.0 * (parameter_count * log_term + std::log(2.0 / delta));
  r.gap = std::sqrt(r.required_samples_term / m);
  r.feasible = m >= r.required_samples_term;
  return r;
}

inline GapResult generalization_gap(const ParamBox& box, double m, double delta) {
  return generalization_gap(static_cast<double>(box.parameter_count()), box.big_b, l_star(box), m, delta);
}

// Sup-norm distance between the synaptic parameters of two cores on the same graph.
inline double core_distance(const SpikingNetwork& a, const SpikingNetwork& b) {
  if (a.weights().size() != b.weights().size()) throw DimensionMismatch("cores have different edge counts");
  double d = 0.0;
  for (std::size_t e = 0; e < a.weights().size(); ++e) {
    d = std::max(d, std::abs(a.weights()[e] - b.weights()[e]));
    d = std::max(d, std::abs(a.delays()[e] - b.delays()[e]));
  }
  return d;
}

struct PerturbationBound {
  double b1 = 0.0;
  double b2 = 0.0;
  double total() const { return b1 + b2; }
};

// Bound on |R(net)(x) - R(other)(x)|_inf for two affine SNNs on the same
// graph whose weights are all >= b and delays all <= big_b.
inline PerturbationBound perturbation_bound(const AffineSnn& net, const AffineSnn& other, std::span<const double> x,
                                            double b, double big_b) {
  const AffineMap& ei = net.encoder();
  const AffineMap& eo = other.encoder();
  const AffineMap& di = net.decoder();
  const AffineMap& dout = other.decoder();
  if (ei.weights.rows() != eo.weights.rows() || ei.weights.cols() != eo.weights.cols() ||
      di.weights.rows() != dout.weights.rows() || di.weights.cols() != dout.weights.cols())
    throw DimensionMismatch("networks must share their architecture");

  auto diff_frobenius = [](const Matrix& p, const Matrix& q) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.values().size(); ++i) s += (p.values()[i] - q.values()[i]) * (p.values()[i] - q.values()[i]);
    return std::sqrt(s);
  };
  auto diff_sup = [](std::span<const double> p, std::span<const double> q) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s = std::max(s, std::abs(p[i] - q[i]));
    return s;
  };

  const double d0 = static_cast<double>(net.input_dim());
  const double d_out = static_cast<double>(net.core().output_count());
  const double depth = static_cast<double>(net.graph().depth());
  const double x_sup = max_abs(x);
  const double w_out_star = std::max(di.weights.frobenius_norm(), dout.weights.frobenius_norm());
  const double w_in_star = std::max(ei.weights.frobenius_norm(), eo.weights.frobenius_norm());
  const double b_in_star = std::max(max_abs(ei.bias), max_abs(eo.bias));

  PerturbationBound r;
  r.b1 = std::sqrt(d_out) * w_out_star *
         (std::sqrt(d0) * diff_frobenius(ei.weights, eo.weights) * x_sup +
          param_lipschitz_factor(depth, b) * core_distance(net.core(), other.core()) + diff_sup(ei.bias, eo.bias));
  r.b2 = std::sqrt(d_out) * diff_frobenius(di.weights, dout.weights) *
             (std::sqrt(d0) * w_in_star * x_sup + b_in_star + zero_output_bound(depth, b, big_b)) +
         diff_sup(di.bias, dout.bias);
  return r;
}

struct BoundsReport {
  ParamBox box;
  double input_lipschitz = 0.0;  // 0 unless a concrete network is supplied
  double param_lipschitz_factor = 0.0;
  double zero_output_bound = 0.0;
  double l_star = 0.0;
  double eps = 0.0;
  double log_covering = 0.0;
  double m = 0.0;
  double delta = 0.0;
  GapResult gap;
};

inline BoundsReport bounds_report(const ParamBox& box, double m, double delta, double eps,
                                  const AffineSnn* net = nullptr) {
  box.validate();
  BoundsReport r;
  r.box = box;
  r.input_lipschitz = net ? input_lipschitz(*net) : 0.0;
  r.param_lipschitz_factor = param_lipschitz_factor(static_cast<double>(box.depth), box.b);
  r.zero_output_bound = zero_output_bound(static_cast<double>(box.depth), box.b, box.big_b);
  r.l_star = l_star(box);
  r.eps = eps;
  r.log_covering = log_covering(box, eps);
  r.m = m;
  r.delta = delta;
  r.gap = generalization_gap(box, m, delta);
  return r;
}

// Approximation and learning rates with unspecified universal constants kept
// as named symbols.
struct RateRecord {
  std::string family;
  std::string error_bound;       // symbolic expression
  double error_exponent = 0.0;   // exponent of the size parameter in the error
  double error_factor = 0.0;     // numeric part of the error bound, constants excluded
  double weight_floor = 0.0;     // numeric part, constants excluded
  std::string weight_cap;
  std::string size_bound;
  double kappa_b = 0.0;
  double kappa_m = 0.0;
  double learning_exponent = 0.0;  // exponent of m in the full learning error
  std::string learning_bound;
};

// Functions of Sobolev smoothness s on a d0-dimensional domain, emulated
// through a mesh with N vertices.
inline RateRecord sobolev_rate(std::size_t d0, int s, double n) {
  if (d0 == 0) throw InvalidParameters("dimension must be positive");
  if (s != 1 && s != 2) throw InvalidParameters("smoothness must be 1 or 2");
  if (!(n >= 1.0)) throw InvalidParameters("N must be at least 1");
  const double ratio = static_cast<double>(s) / static_cast<double>(d0);
  RateRecord r;
  r.family = "sobolev";
  r.error_exponent = -ratio;
  r.error_factor = std::pow(n, -ratio);
  r.error_bound = "C1 * N^(" + std::to_string(-ratio) + ") * |f|_{W^{s,inf}}";
  r.weight_floor = 2.0 * std::pow(n, ratio + 1.0);
  r.weight_cap = "max{C3 * N^(1/d0) * |f|_inf, 2 * N^(s/d0 + 1)}";
  r.size_bound = "C2 * N";
  r.kappa_b = 1.0 / ratio + 1.0;
  r.kappa_m = 1.0 / ratio;
  r.learning_exponent = -2.0 / (r.kappa_m + 4.0);
  r.learning_bound = "C * (m^(-2/(d0/s + 4)) * sqrt(log m) + sqrt(log(2/delta)/m))";
  return r;
}

// Barron-class functions with constant K emulated by M ridge terms.
inline RateRecord barron_rate(std::size_t d0, double k, double m_terms) {
  if (d0 == 0) throw InvalidParameters("dimension must be positive");
  if (!(k > 0.0) || !(m_terms >= 1.0)) throw InvalidParameters("K must be positive and M at least 1");
  RateRecord r;
  r.family = "barron";
  r.error_exponent = -0.5;
  r.error_factor = std::sqrt(static_cast<double>(d0)) * k / std::sqrt(m_terms);
  r.error_bound = "nu * sqrt(d0) * K / sqrt(M)";
  r.weight_floor = std::pow(m_terms, 1.5) / std::sqrt(k);
  r.weight_cap = "C * (M^(3/2) / sqrt(K) + sqrt(K))";
  r.size_bound = "C * d0 * M";
  r.kappa_b = 3.0;
  r.kappa_m = 2.0;
  r.learning_exponent = -2.0 / (r.kappa_m + 4.0);
  r.learning_bound = "C * (m^(-1/3) * sqrt(log m) + sqrt(log(2/delta)/m))";
  return r;
}

}  // namespace affine_snn
