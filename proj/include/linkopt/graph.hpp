#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "linkopt/sparse.hpp"

namespace linkopt {

struct Arc {
  int src = 0;
  int dst = 0;
  friend bool operator==(const Arc&, const Arc&) = default;
  friend auto operator<=>(const Arc&, const Arc&) = default;
};

/// Classification of a facultative arc by the sign of the objective derivative.
enum class ArcClass { Activate, Deactivate, Indifferent };

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, int line)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// A web-graph fragment whose candidate arcs are partitioned into obligatory
/// links (always weight 1), prohibited links (always weight 0, implicit) and
/// facultative links (free weight in [0,1]).  The facultative list is ordered;
/// it defines the coordinate order of every weight vector for this graph.
struct LinkGraph {
  int n = 0;
  std::vector<Arc> obligatory;
  std::vector<Arc> facultative;
  std::vector<int> target_set;              // sorted node ids whose scores the objective aggregates
  std::vector<std::string> labels;          // optional, empty or size n

  std::size_t facultative_count() const { return facultative.size(); }

  /// Pages with at least one facultative outlink.
  std::vector<int> controlled_pages() const;

  void validate() const;  // throws std::invalid_argument on any broken invariant
};

struct ParseOptions {
  bool allow_self_links = false;  // facultative self-loops are rejected by default
};

/// Parses the edge-list format: "n <count>", then "o|p|f <src> <dst>" lines and
/// optional "t <node>" target declarations; '#' starts a comment.  Duplicate
/// identical lines collapse to one arc; an arc listed in two classes is an error.
LinkGraph parse_graph(const std::string& text, const ParseOptions& opts = {});
LinkGraph load_graph(const std::string& path, const ParseOptions& opts = {});

std::string serialize(const LinkGraph& g);

struct WeightVector {
  std::vector<double> x;  // one entry per facultative arc, in list order

  std::size_t size() const { return x.size(); }
  double operator[](std::size_t k) const { return x[k]; }
  double& operator[](std::size_t k) { return x[k]; }
};

/// Coordinatewise clamp onto the box [0,1]; idempotent and nonexpansive.
WeightVector project_box(std::span<const double> x);
void project_box_inplace(std::vector<double>& x);

/// Weighted adjacency matrix A(x): 1 on obligatory arcs, x_k on the k-th
/// facultative arc.  Facultative entries are kept structurally even at weight
/// zero so the sparsity pattern (and hence every gradient coordinate) is
/// stable across weight vectors.
SparseMatrix assemble(const LinkGraph& g, const WeightVector& x);

/// Weight-vector file: one "<src> <dst> <weight>" line per facultative arc,
/// in facultative-list order.
WeightVector parse_weights(const LinkGraph& g, const std::string& text);
WeightVector load_weights(const LinkGraph& g, const std::string& path);
std::string serialize_weights(const LinkGraph& g, const WeightVector& x);

}  // namespace linkopt
