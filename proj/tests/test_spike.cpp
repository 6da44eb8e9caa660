#include <algorithm>
#include <catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "affine_snn/bounds.hpp"
#include "affine_snn/oracle.hpp"
#include "affine_snn/spike.hpp"
#include "support.hpp"

using namespace affine_snn;
using Catch::Approx;

namespace {

std::shared_ptr<const NetworkGraph> chain(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
  return std::make_shared<const NetworkGraph>(NetworkGraph::build(edges, n));
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST_CASE("single neuron spike times") {
  {
    const std::vector<Arrival> a{{0.0, 2.0}};
    const auto s = neuron_spike_time(a);
    CHECK(s.time == Approx(0.5).margin(1e-15));
    CHECK(s.causal_count == 1);
  }
  {
    const std::vector<Arrival> a{{0.0, 10.0}, {0.05, 10.0}};
    const auto s = neuron_spike_time(a);
    CHECK(s.time == Approx(0.075).margin(1e-15));
    CHECK(s.causal_count == 2);
    CHECK(oracle_spike_time(a) == Approx(0.075).margin(1e-12));
  }
  {
    const std::vector<Arrival> a{{0.0, 10.0}, {0.5, 10.0}};
    const auto s = neuron_spike_time(a);
    CHECK(s.time == Approx(0.1).margin(1e-15));
    CHECK(s.causal_count == 1);
  }
  {
    // Unsorted input.
    const std::vector<Arrival> a{{0.5, 10.0}, {0.0, 10.0}};
    CHECK(neuron_spike_time(a).time == Approx(0.1).margin(1e-15));
  }
}

TEST_CASE("arrival coinciding with the spike time joins the causal set") {
  // First arrival alone reaches threshold at exactly 1, where the second arrives.
  const std::vector<Arrival> a{{0.0, 1.0}, {1.0, 5.0}};
  const auto s = neuron_spike_time(a);
  CHECK(s.time == 1.0);
  CHECK(s.causal_count == 2);
}

TEST_CASE("solver matches bisection on random positive instances") {
  Rng rng(2024);
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t n = 1 + rng.index(16);
    std::vector<Arrival> a(n);
    for (auto& x : a) x = {rng.uniform(-2.0, 2.0), rng.uniform(0.05, 5.0)};
    const auto s = neuron_spike_time(a);
    REQUIRE(std::abs(s.time - oracle_spike_time(a)) <= 1e-9);
    // Causal set = arrivals at or before the spike.
    std::size_t causal = 0;
    for (const auto& x : a) causal += x.time <= s.time;
    REQUIRE(causal == s.causal_count);
    REQUIRE(s.time > std::min_element(a.begin(), a.end(), [](auto& p, auto& q) { return p.time < q.time; })->time);
  }
}

TEST_CASE("general weights: discontinuity examples") {
  const std::vector<double> w{1.0, -1.0, 1.0};
  for (double eps : {0.1, 0.01, 0.001}) {
    const std::vector<Arrival> above{{0.0, w[0]}, {1.0 + eps, w[1]}, {2.0, w[2]}};
    const std::vector<Arrival> below{{0.0, w[0]}, {1.0 - eps, w[1]}, {2.0, w[2]}};
    CHECK(std::abs(neuron_spike_time(above, WeightMode::general).time - 1.0) <= 1e-12);
    CHECK(std::abs(neuron_spike_time(below, WeightMode::general).time - (2.0 + eps)) <= 1e-12);
  }
  // Delay-parameterized variant at t = 0.
  auto at = [&](double s) {
    const std::vector<Arrival> a{{0.0, 1.0}, {1.0 + s, -1.0}, {2.0, 1.0}};
    return neuron_spike_time(a, WeightMode::general).time;
  };
  CHECK(at(0.5) == Approx(1.0).margin(1e-12));
  CHECK(at(-0.5) == Approx(2.5).margin(1e-12));
  CHECK(at(0.0) == Approx(1.0).margin(1e-12));
}

TEST_CASE("general weights: no spike is reported") {
  const std::vector<Arrival> a{{0.0, 1.0}, {0.5, -1.0}};
  CHECK_THROWS_AS(neuron_spike_time(a, WeightMode::general), NoSpike);
  const std::vector<Arrival> b{{0.0, -1.0}, {0.1, 0.5}};
  CHECK_THROWS_AS(neuron_spike_time(b, WeightMode::general), NoSpike);

  auto g = std::make_shared<const NetworkGraph>(NetworkGraph::build({{0, 2}, {1, 2}, {2, 3}}, 4));
  SpikingNetwork net(g, {1.0, -1.0, 1.0}, {0.0, 0.0, 0.0}, WeightMode::general);
  try {
    forward(net, std::vector<double>{0.0, 0.5});
    FAIL("expected NoSpike");
  } catch (const NoSpike& e) {
    CHECK(e.node() == 2);
  }
}

TEST_CASE("parameter validation") {
  auto g = std::make_shared<const NetworkGraph>(NetworkGraph::build({{0, 1}}, 2));
  CHECK_THROWS_AS(SpikingNetwork(g, {-1.0}, {0.0}), InvalidParameters);
  CHECK_THROWS_AS(SpikingNetwork(g, {0.0}, {0.0}), InvalidParameters);
  CHECK_THROWS_AS(SpikingNetwork(g, {1.0}, {-0.1}), InvalidParameters);
  CHECK_THROWS_AS(SpikingNetwork(g, {1.0, 2.0}, {0.0}), DimensionMismatch);
  CHECK_THROWS_AS(SpikingNetwork(g, {-1.0}, {0.0}, WeightMode::general), InvalidParameters);
  CHECK_NOTHROW(SpikingNetwork(g, {1.0}, {0.0}, WeightMode::general));
  SpikingNetwork ok(g, {1.0}, {0.0});
  CHECK_THROWS_AS(forward(ok, std::vector<double>{0.0, 1.0}), DimensionMismatch);
  CHECK_THROWS_AS(forward(ok, std::vector<double>{NAN}), InvalidParameters);
}

TEST_CASE("chain closed forms") {
  for (std::size_t n : {2u, 3u, 5u, 10u})
    for (double b : {0.25, 0.5, 1.0})
      for (double t : {0.0, -1.5, 3.25}) {
        SpikingNetwork fast(chain(n), std::vector<double>(n - 1, 2.0 * b), std::vector<double>(n - 1, 0.0));
        SpikingNetwork slow(chain(n), std::vector<double>(n - 1, b), std::vector<double>(n - 1, b));
        const double k = static_cast<double>(n - 1);
        CHECK(std::abs(realize(fast, std::vector<double>{t})[0] - (t + k / (2.0 * b))) <= 1e-12);
        CHECK(std::abs(realize(slow, std::vector<double>{t})[0] - (t + k * (1.0 / b + b))) <= 1e-12);
      }
  SpikingNetwork three(chain(3), {1.0, 1.0}, {0.0, 0.0});
  CHECK(realize(three, std::vector<double>{0.0})[0] == Approx(2.0));
  SpikingNetwork three_slow(chain(3), {0.5, 0.5}, {0.5, 0.5});
  CHECK(realize(three_slow, std::vector<double>{0.0})[0] == Approx(5.0));
}

TEST_CASE("random networks: order, translation, Lipschitz and magnitude properties") {
  Rng rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    auto g = test_support::random_graph(2 + rng.index(11), 0.4, rng);
    const SpikingNetwork net = test_support::random_core(g, 0.1, 3.0, 1.5, rng);
    const std::size_t d = g->inputs().size();
    const auto t = test_support::random_vector(d, -1.0, 1.0, rng);
    const auto out = realize(net, t);

    // Output times never precede the earliest input.
    const double t_min = *std::min_element(t.begin(), t.end());
    for (double v : out) REQUIRE(v >= t_min);

    // Translation equivariance.
    const double c = rng.uniform(0.1, 2.0);
    auto shifted = t;
    for (double& v : shifted) v += c;
    const auto out_shift = realize(net, shifted);
    for (std::size_t i = 0; i < out.size(); ++i) REQUIRE(out_shift[i] == Approx(out[i] + c).margin(1e-10));

    // Monotonicity.
    auto later = t;
    for (double& v : later) v += rng.uniform(0.0, 0.5);
    const auto out_later = realize(net, later);
    for (std::size_t i = 0; i < out.size(); ++i) REQUIRE(out_later[i] >= out[i] - 1e-12);

    // 1-Lipschitz in the sup norm.
    const auto other = test_support::random_vector(d, -1.0, 1.0, rng);
    REQUIRE(sup_diff(realize(net, other), out) <= sup_diff(other, t) + 1e-12);

    // Magnitude at zero input.
    const auto zero = realize(net, std::vector<double>(d, 0.0));
    const double bound = zero_output_bound(static_cast<double>(g->depth()), net.min_weight(), std::max(1.0, net.max_delay()));
    for (double v : zero) REQUIRE(std::abs(v) <= bound + 1e-12);

    // Parameter perturbation.
    std::vector<double> w(net.weights().begin(), net.weights().end()), dl(net.delays().begin(), net.delays().end());
    const double h = rng.uniform(0.0, 0.05);
    for (double& x : w) x = std::max(0.1, x + rng.uniform(-h, h));
    for (double& x : dl) x = std::max(0.0, x + rng.uniform(-h, h));
    const SpikingNetwork pert(g, w, dl);
    const double b = std::min(net.min_weight(), pert.min_weight());
    const double factor = param_lipschitz_factor(static_cast<double>(g->depth()), b);
    REQUIRE(sup_diff(realize(pert, t), out) <= factor * core_distance(net, pert) + 1e-12);
  }
}

TEST_CASE("forward trace records causal sets consistent with the closed form") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    auto g = test_support::random_graph(2 + rng.index(11), 0.5, rng);
    const SpikingNetwork net = test_support::random_core(g, 0.1, 3.0, 1.0, rng);
    const auto trace = forward(net, test_support::random_vector(g->inputs().size(), 0.0, 1.0, rng));
    for (NodeId v = 0; v < g->node_count(); ++v) {
      if (g->is_input(v)) continue;
      double w_sum = 0.0, s = 0.0;
      for (std::size_t e : trace.causal_edges[v]) {
        const double a = trace.spike_times[g->edge(e).from] + net.delays()[e];
        REQUIRE(a <= trace.spike_times[v]);
        w_sum += net.weights()[e];
        s += net.weights()[e] * a;
      }
      REQUIRE(w_sum > 0.0);
      REQUIRE(trace.causal_weight_sums[v] == Approx(w_sum));
      REQUIRE(trace.spike_times[v] == Approx((1.0 + s) / w_sum).epsilon(1e-12));
    }
  }
}

TEST_CASE("clip") {
  CHECK(clip(std::vector<double>{-0.2, 0.5, 1.7}, 0.0, 1.0) == std::vector<double>{0.0, 0.5, 1.0});
  CHECK(clip(std::vector<double>{0.3}, 0.0, 1.0) == std::vector<double>{0.3});
  CHECK(clip(std::vector<double>{2.0, -3.0}, -1.0, 1.0) == std::vector<double>{1.0, -1.0});
  CHECK_THROWS_AS(clip(std::vector<double>{0.0}, 1.0, 0.0), InvalidParameters);
}
