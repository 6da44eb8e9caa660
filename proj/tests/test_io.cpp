#include <catch_amalgamated.hpp>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <vector>

#include "affine_snn/constructors.hpp"
#include "affine_snn/idx.hpp"
#include "affine_snn/serialize.hpp"
#include "support.hpp"

using namespace affine_snn;

namespace {

void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

// Hand-assembled IDX buffers, independent of encode_idx.
std::vector<std::uint8_t> image_fixture() {
  std::vector<std::uint8_t> b;
  put32(b, 0x00000803);
  put32(b, 4);
  put32(b, 28);
  put32(b, 28);
  for (std::size_t i = 0; i < 4 * 28 * 28; ++i) b.push_back(static_cast<std::uint8_t>(i % 251));
  return b;
}

std::vector<std::uint8_t> label_fixture() {
  std::vector<std::uint8_t> b;
  put32(b, 0x00000801);
  put32(b, 4);
  for (std::uint8_t v : {3, 1, 4, 1}) b.push_back(v);
  return b;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("affine_snn_test_io_" + name);
}

}  // namespace

TEST_CASE("IDX images and labels") {
  const IdxArray images = parse_idx(image_fixture());
  REQUIRE(images.dims == std::vector<std::size_t>{4, 28, 28});
  CHECK(images.count() == 4);
  CHECK(images.item_size() == 784);
  CHECK(images.data[800] == 800 % 251);

  const IdxArray labels = parse_idx(label_fixture());
  CHECK(labels.dims == std::vector<std::size_t>{4});
  CHECK(labels.data == std::vector<std::uint8_t>{3, 1, 4, 1});

  CHECK(encode_idx(images) == image_fixture());
  CHECK(encode_idx(labels) == label_fixture());

  const auto path = temp_file("labels.idx");
  write_idx(path.string(), labels);
  CHECK(load_idx(path.string()).data == labels.data);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_idx((std::filesystem::temp_directory_path() / "affine_snn_missing.idx").string()), ConfigError);
}

TEST_CASE("IDX errors") {
  auto bad = label_fixture();
  bad[2] = 0x09;
  CHECK_THROWS_AS(parse_idx(bad), BadMagic);
  bad = label_fixture();
  bad[3] = 0x02;
  CHECK_THROWS_AS(parse_idx(bad), BadMagic);

  auto cut = image_fixture();
  cut.pop_back();
  CHECK_THROWS_AS(parse_idx(cut), TruncatedFile);
  CHECK_THROWS_AS(parse_idx(std::vector<std::uint8_t>{0, 0}), TruncatedFile);
  CHECK_THROWS_AS(parse_idx(std::vector<std::uint8_t>{0, 0, 8, 3, 0, 0, 0, 4}), TruncatedFile);
}

TEST_CASE("double encoding is bit exact") {
  Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    const double v = rng.normal() * std::pow(10.0, rng.uniform(-30.0, 30.0));
    REQUIRE(same_bits(decode_double(json(encode_double(v))), v));
  }
  for (double v : {0.0, -0.0, 1.0, -2.5, 5e-324, 1.7976931348623157e308})
    CHECK(same_bits(decode_double(json(encode_double(v))), v));
  CHECK(encode_double(3.0) == "0x1.8p+1");
  CHECK(decode_double(json(0.25)) == 0.25);
  CHECK(decode_double(json("-0x1p-2")) == -0.25);
  CHECK(decode_double(json("1.5")) == 1.5);
  CHECK_THROWS_AS(decode_double(json("0x1.8q")), FormatError);
  CHECK_THROWS_AS(decode_double(json(true)), FormatError);
  CHECK_THROWS_AS(encode_double(std::numeric_limits<double>::infinity()), FormatError);
}

TEST_CASE("graph JSON round trip keeps enumeration") {
  const NetworkGraph g = NetworkGraph::build({{0, 2}, {1, 2}, {2, 3}, {2, 4}}, 5, std::vector<NodeId>{1, 0},
                                             std::vector<NodeId>{4, 3});
  const NetworkGraph back = graph_from_json(graph_to_json(g));
  CHECK(back.node_count() == 5);
  CHECK(std::vector<Edge>(back.edges().begin(), back.edges().end()) ==
        std::vector<Edge>(g.edges().begin(), g.edges().end()));
  CHECK(std::vector<NodeId>(back.inputs().begin(), back.inputs().end()) == std::vector<NodeId>{1, 0});
  CHECK(std::vector<NodeId>(back.outputs().begin(), back.outputs().end()) == std::vector<NodeId>{4, 3});

  json cyclic = graph_to_json(g);
  cyclic["edges"].push_back({3, 0});
  CHECK_THROWS_AS(graph_from_json(cyclic), Error);
}

TEST_CASE("model JSON round trip is bit exact") {
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d0 = 1 + rng.index(4);
    const AffineSnn net = test_support::random_affine(10, d0, 1 + rng.index(3), rng);
    const auto path = temp_file("model.json");
    write_json_file(path.string(), model_to_json(net));
    const AffineSnn back = model_from_json(read_json_file(path.string()));
    std::filesystem::remove(path);

    const auto w0 = net.core().weights();
    const auto w1 = back.core().weights();
    REQUIRE(w0.size() == w1.size());
    for (std::size_t e = 0; e < w0.size(); ++e) {
      REQUIRE(same_bits(w0[e], w1[e]));
      REQUIRE(same_bits(net.core().delays()[e], back.core().delays()[e]));
    }
    REQUIRE(net.encoder().weights == back.encoder().weights);
    REQUIRE(net.decoder().weights == back.decoder().weights);
    REQUIRE(net.encoder().bias == back.encoder().bias);
    REQUIRE(net.decoder().bias == back.decoder().bias);
    const auto x = test_support::random_vector(d0, -1.0, 1.0, rng);
    const auto y0 = realize(net, x);
    const auto y1 = realize(back, x);
    for (std::size_t i = 0; i < y0.size(); ++i) REQUIRE(same_bits(y0[i], y1[i]));
  }
  CHECK_THROWS_AS(model_from_json(json{{"graph", 1}}), Error);
}

TEST_CASE("triangulation JSON round trip") {
  const Triangulation tri = regular_grid_triangulation(2, 3);
  std::vector<double> values(tri.vertices.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = 0.1 * static_cast<double>(i);
  std::vector<double> back_values;
  const Triangulation back = triangulation_from_json(triangulation_to_json(tri, &values), &back_values);
  CHECK(back.dim == 2);
  CHECK(back.vertices == tri.vertices);
  CHECK(back.simplices == tri.simplices);
  CHECK(back_values == values);
  CHECK(back.h_min == tri.h_min);
  CHECK(back.h_max == tri.h_max);

  json bad = triangulation_to_json(tri);
  bad["simplices"][0][0] = 1000;
  CHECK_THROWS_AS(triangulation_from_json(bad), Error);
}

TEST_CASE("JSON file errors") {
  CHECK_THROWS_AS(read_json_file((std::filesystem::temp_directory_path() / "affine_snn_missing.json").string()),
                  ConfigError);
  const auto path = temp_file("broken.json");
  {
    std::ofstream out(path);
    out << "{ not json";
  }
  CHECK_THROWS_AS(read_json_file(path.string()), FormatError);
  std::filesystem::remove(path);
}
