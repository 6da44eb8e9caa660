#include <catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "affine_snn/affine.hpp"
#include "affine_snn/constructors.hpp"
#include "affine_snn/oracle.hpp"
#include "support.hpp"

using namespace affine_snn;
using Catch::Approx;

namespace {

std::size_t nonzero(std::span<const double> v) {
  std::size_t n = 0;
  for (double x : v) n += x != 0.0;
  return n;
}

// Decoder-bias overlap: how many nonzero scalars disappear when the two
// decoder biases are summed.
std::size_t bias_merge_loss(const AffineSnn& a, const AffineSnn& b) {
  std::vector<double> sum(a.decoder().bias.size());
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = a.decoder().bias[i] + b.decoder().bias[i];
  return nonzero(a.decoder().bias) + nonzero(b.decoder().bias) - nonzero(sum);
}

}  // namespace

TEST_CASE("identity codec around a single synapse") {
  auto g = std::make_shared<const NetworkGraph>(NetworkGraph::build({{0, 1}}, 2));
  const AffineSnn net(AffineMap::identity(1), SpikingNetwork(g, {2.0}, {0.0}), AffineMap::identity(1));
  CHECK(realize(net, std::vector<double>{0.0})[0] == Approx(0.5));
  CHECK(net.input_dim() == 1);
  CHECK(net.output_dim() == 1);
}

TEST_CASE("negated codec emulates max") {
  const double eps = 0.01;
  auto g = std::make_shared<const NetworkGraph>(NetworkGraph::build({{0, 2}, {1, 2}}, 3));
  Matrix enc(2, 1);
  enc(0, 0) = -1.0;
  enc(1, 0) = -1.0;
  const AffineSnn net(AffineMap(enc, {0.0, 0.0}), SpikingNetwork(g, {1.0 / eps, 1.0 / eps}, {0.0, 0.0}),
                      AffineMap(Matrix(1, 1, -1.0), {0.0}));
  for (double x : {-0.3, 0.0, 0.7}) {
    const std::vector<Arrival> arr{{-x, 1.0 / eps}, {-x, 1.0 / eps}};
    const double expected = -oracle_spike_time(arr);
    CHECK(realize(net, std::vector<double>{x})[0] == Approx(expected).margin(1e-10));
    CHECK(std::abs(realize(net, std::vector<double>{x})[0] - x) <= eps);
  }
}

TEST_CASE("zero decoder gives a constant") {
  Rng rng(3);
  AffineSnn net = test_support::random_affine(8, 3, 2, rng);
  AffineMap& dec = net.mutable_decoder();
  for (double& v : dec.weights.values()) v = 0.0;
  dec.bias = {0.25, -4.0};
  for (int i = 0; i < 10; ++i) {
    const auto y = realize(net, test_support::random_vector(3, -2.0, 2.0, rng));
    CHECK(y == std::vector<double>{0.25, -4.0});
  }
}

TEST_CASE("clipped realization") {
  auto g = std::make_shared<const NetworkGraph>(NetworkGraph::build({{0, 1}}, 2));
  auto with_bias = [&](double b) {
    return AffineSnn(AffineMap::identity(1), SpikingNetwork(g, {1.0}, {0.0}), AffineMap(Matrix(1, 1, 0.0), {b}));
  };
  const std::vector<double> x{0.0};
  CHECK(realize_clipped(with_bias(1.7), x, 0.0, 1.0)[0] == 1.0);
  CHECK(realize_clipped(with_bias(-0.2), x, 0.0, 1.0)[0] == 0.0);
  CHECK(realize_clipped(with_bias(0.4), x, 0.0, 1.0)[0] == 0.4);
}

TEST_CASE("codec shape validation") {
  auto g = std::make_shared<const NetworkGraph>(NetworkGraph::build({{0, 2}, {1, 2}}, 3));
  SpikingNetwork core(g, {1.0, 1.0}, {0.0, 0.0});
  CHECK_THROWS_AS(AffineSnn(AffineMap::identity(1), core, AffineMap::identity(1)), DimensionMismatch);
  CHECK_THROWS_AS(AffineSnn(AffineMap::identity(2), core, AffineMap::identity(2)), DimensionMismatch);
  const AffineSnn net(AffineMap::identity(2), core, AffineMap::identity(1));
  CHECK_THROWS_AS(realize(net, std::vector<double>{1.0}), DimensionMismatch);
}

TEST_CASE("size counts nonzero scalars") {
  CHECK(size(build_min_net(2, 0.1)) == 5);
  auto g = std::make_shared<const NetworkGraph>(NetworkGraph::build({{0, 3}, {1, 3}, {2, 3}}, 4));
  const AffineSnn zeros(AffineMap(Matrix(3, 2), {0.0, 0.0, 0.0}), SpikingNetwork(g, {1.0, 2.0, 3.0}, {0.0, 0.0, 0.0}),
                        AffineMap(Matrix(1, 1), {0.0}));
  CHECK(size(zeros) == 3);
  RidgeTerm dense{{0.5, -1.0, 2.0}, 0.3, 1.5, -0.7};
  CHECK(size(build_ridge_net(dense, 0.01)) <= 3 + 5);
}

TEST_CASE("addition is exact and sizes add up") {
  Rng rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t d0 = 1 + rng.index(3), d1 = 1 + rng.index(3);
    const AffineSnn a = test_support::random_affine(6, d0, d1, rng);
    const AffineSnn b = test_support::random_affine(6, d0, d1, rng);
    const AffineSnn sum = add(a, b);
    const auto x = test_support::random_vector(d0, -1.0, 1.0, rng);
    const auto ya = realize(a, x), yb = realize(b, x), ys = realize(sum, x);
    for (std::size_t i = 0; i < d1; ++i) REQUIRE(std::abs(ys[i] - (ya[i] + yb[i])) <= 1e-12);
    REQUIRE(size(sum) + bias_merge_loss(a, b) == size(a) + size(b));
    REQUIRE(sum.graph().node_count() == a.graph().node_count() + b.graph().node_count());
  }
}

TEST_CASE("size is additive when decoder biases do not overlap") {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const AffineSnn a = test_support::random_affine(6, 2, 2, rng);
    AffineSnn b = test_support::random_affine(6, 2, 2, rng);
    std::fill(b.mutable_decoder().bias.begin(), b.mutable_decoder().bias.end(), 0.0);
    REQUIRE(size(add(a, b)) == size(a) + size(b));
  }
}

TEST_CASE("addition with a zero network and associativity") {
  Rng rng(13);
  const AffineSnn a = test_support::random_affine(6, 2, 1, rng);
  AffineSnn zero = test_support::random_affine(4, 2, 1, rng);
  for (double& v : zero.mutable_decoder().weights.values()) v = 0.0;
  zero.mutable_decoder().bias = {0.0};
  const AffineSnn b = test_support::random_affine(6, 2, 1, rng);
  const AffineSnn c = test_support::random_affine(6, 2, 1, rng);
  for (int i = 0; i < 50; ++i) {
    const auto x = test_support::random_vector(2, -1.0, 1.0, rng);
    CHECK(realize(add(a, zero), x)[0] == realize(a, x)[0]);
    CHECK(realize(add(add(a, b), c), x)[0] == Approx(realize(add(a, add(b, c)), x)[0]).margin(1e-12));
  }
  CHECK_THROWS_AS(add(a, test_support::random_affine(4, 3, 1, rng)), DimensionMismatch);
}

TEST_CASE("input enumeration of a sum lists the first summand first") {
  const AffineSnn a = build_min_net(2, 0.1);
  const AffineSnn b = build_min_net(2, 0.2);
  const AffineSnn s = add(a, b);
  CHECK(std::vector<NodeId>(s.graph().inputs().begin(), s.graph().inputs().end()) == std::vector<NodeId>{0, 1, 3, 4});
  CHECK(std::vector<NodeId>(s.graph().outputs().begin(), s.graph().outputs().end()) == std::vector<NodeId>{2, 5});
}
