#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace affine_snn {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidGraph : public Error {
 public:
  using Error::Error;
};

class CycleDetected : public InvalidGraph {
 public:
  CycleDetected() : InvalidGraph("network graph contains a directed cycle") {}
};

class IsolatedNode : public InvalidGraph {
 public:
  explicit IsolatedNode(std::size_t node)
      : InvalidGraph("node " + std::to_string(node) + " has no incident edge"), node_(node) {}
  std::size_t node() const noexcept { return node_; }

 private:
  std::size_t node_;
};

class DuplicateEdge : public InvalidGraph {
 public:
  DuplicateEdge(std::size_t from, std::size_t to)
      : InvalidGraph("duplicate edge (" + std::to_string(from) + ", " + std::to_string(to) + ")") {}
};

class InvalidParameters : public Error {
 public:
  using Error::Error;
};

// The potential of a general-weight neuron never reaches the threshold.
class NoSpike : public Error {
 public:
  explicit NoSpike(std::size_t node)
      : Error("neuron " + std::to_string(node) + " never reaches threshold"), node_(node) {}
  std::size_t node() const noexcept { return node_; }

 private:
  std::size_t node_;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class SingularSimplex : public Error {
 public:
  explicit SingularSimplex(std::size_t simplex)
      : Error("simplex " + std::to_string(simplex) + " is degenerate"), simplex_(simplex) {}
  std::size_t simplex() const noexcept { return simplex_; }

 private:
  std::size_t simplex_;
};

class BadMagic : public Error {
 public:
  using Error::Error;
};

class TruncatedFile : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// An experiment's stated guarantee was violated at run time.
class AssertFailed : public Error {
 public:
  using Error::Error;
};

}  // namespace affine_snn
