#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <nlohmann/json.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "affine_snn/affine.hpp"
#include "affine_snn/constructors.hpp"
#include "affine_snn/error.hpp"
#include "affine_snn/graph.hpp"

namespace affine_snn {

using json = nlohmann::json;

// Doubles are written as hex-float strings ("0x1.8p+1") so that a round trip
// reproduces every bit. Plain JSON numbers are accepted on input.
inline std::string encode_double(double v) {
  if (!std::isfinite(v)) throw FormatError("only finite values can be serialized");
  char buf[64];
  char* p = buf;
  if (std::signbit(v)) {
    *p++ = '-';
    v = -v;
  }
  *p++ = '0';
  *p++ = 'x';
  const auto res = std::to_chars(p, buf + sizeof(buf), v, std::chars_format::hex);
  return std::string(buf, res.ptr);
}

inline double decode_double(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (!j.is_string()) throw FormatError("expected a number or hex-float string");
  std::string_view s = j.get_ref<const std::string&>();
  bool negative = false;
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
    negative = s[0] == '-';
    s.remove_prefix(1);
  }
  const bool hex = s.size() > 1 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X');
  if (hex) s.remove_prefix(2);
  double v = 0.0;
  const auto res =
      std::from_chars(s.data(), s.data() + s.size(), v, hex ? std::chars_format::hex : std::chars_format::general);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw FormatError("malformed number '" + j.get<std::string>() + "'");
  return negative ? -v : v;
}

inline json encode_array(std::span<const double> v) {
  json out = json::array();
  for (double x : v) out.push_back(encode_double(x));
  return out;
}

inline std::vector<double> decode_array(const json& j) {
  if (!j.is_array()) throw FormatError("expected an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const json& x : j) out.push_back(decode_double(x));
  return out;
}

inline json graph_to_json(const NetworkGraph& g) {
  json edges = json::array();
  for (const Edge& e : g.edges()) edges.push_back({e.from, e.to});
  return {{"nodes", g.node_count()},
          {"edges", std::move(edges)},
          {"inputs", std::vector<NodeId>(g.inputs().begin(), g.inputs().end())},
          {"outputs", std::vector<NodeId>(g.outputs().begin(), g.outputs().end())}};
}

// "inputs"/"outputs" are optional; when present they must be permutations of
// the derived input/output node sets and fix the enumeration order.
inline NetworkGraph graph_from_json(const json& j) {
  try {
    std::vector<Edge> edges;
    for (const json& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw FormatError("edge must be a [from, to] pair");
      edges.push_back({e[0].get<NodeId>(), e[1].get<NodeId>()});
    }
    std::optional<std::vector<NodeId>> inputs, outputs;
    if (j.contains("inputs")) inputs = j["inputs"].get<std::vector<NodeId>>();
    if (j.contains("outputs")) outputs = j["outputs"].get<std::vector<NodeId>>();
    return NetworkGraph::build(std::move(edges), j.at("nodes").get<std::size_t>(), std::move(inputs),
                               std::move(outputs));
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad graph description: ") + e.what());
  }
}

inline json affine_map_to_json(const AffineMap& m) {
  return {{"rows", m.weights.rows()},
          {"cols", m.weights.cols()},
          {"weights", encode_array(m.weights.values())},
          {"bias", encode_array(m.bias)}};
}

inline AffineMap affine_map_from_json(const json& j) {
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  return AffineMap(Matrix(rows, cols, decode_array(j.at("weights"))), decode_array(j.at("bias")));
}

inline json model_to_json(const AffineSnn& net) {
  return {{"graph", graph_to_json(net.graph())},
          {"positive_mode", net.core().positive()},
          {"weights", encode_array(net.core().weights())},
          {"delays", encode_array(net.core().delays())},
          {"encoder", affine_map_to_json(net.encoder())},
          {"decoder", affine_map_to_json(net.decoder())}};
}

inline AffineSnn model_from_json(const json& j) {
  try {
    auto graph = std::make_shared<const NetworkGraph>(graph_from_json(j.at("graph")));
    const WeightMode mode = j.value("positive_mode", true) ? WeightMode::positive : WeightMode::general;
    SpikingNetwork core(std::move(graph), decode_array(j.at("weights")), decode_array(j.at("delays")), mode);
    return AffineSnn(affine_map_from_json(j.at("encoder")), std::move(core), affine_map_from_json(j.at("decoder")));
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad model file: ") + e.what());
  }
}

inline json triangulation_to_json(const Triangulation& tri, const std::vector<double>* values = nullptr) {
  json vertices = json::array();
  for (const auto& v : tri.vertices) vertices.push_back(encode_array(v));
  json out = {{"vertices", std::move(vertices)}, {"simplices", tri.simplices}};
  if (values) out["values"] = encode_array(*values);
  return out;
}

inline Triangulation triangulation_from_json(const json& j, std::vector<double>* values = nullptr) {
  try {
    Triangulation tri;
    for (const json& v : j.at("vertices")) tri.vertices.push_back(decode_array(v));
    tri.simplices = j.at("simplices").get<std::vector<std::vector<std::size_t>>>();
    tri.dim = tri.vertices.empty() ? 0 : tri.vertices.front().size();
    validate_triangulation(tri);
    if (values && j.contains("values")) *values = decode_array(j["values"]);
    return tri;
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad triangulation file: ") + e.what());
  }
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

}  // namespace affine_snn
