#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qcache/circuit.hpp"
#include "qcache/phase.hpp"

namespace qcache::zx {

using VertexId = std::int32_t;

enum class VertexKind : std::uint8_t { Boundary, Z, X };
enum class EdgeType : std::uint8_t { Simple, Hadamard };

inline EdgeType toggle(EdgeType t) { return t == EdgeType::Simple ? EdgeType::Hadamard : EdgeType::Simple; }
/// Composition of two edges through a phase-free degree-2 spider.
inline EdgeType compose(EdgeType a, EdgeType b) { return a == b ? EdgeType::Simple : EdgeType::Hadamard; }

struct Vertex {
  VertexKind kind = VertexKind::Z;
  Phase phase;
  bool operator==(const Vertex&) const = default;
};

/// Open ZX diagram. Vertex ids are handed out by a monotone counter and never
/// reused; all containers are ordered so iteration is deterministic.
///
/// Boundary vertices have phase 0 and degree 1. There is at most one edge per
/// vertex pair: `connect` resolves would-be parallel edges and self-loops with
/// the Hopf and fusion rules (up to scalar) before storing anything.
class ZxGraph {
 public:
  VertexId add_vertex(VertexKind kind, Phase phase = {});
  VertexId add_input();
  VertexId add_output();
  void remove_vertex(VertexId v);

  /// Adds an edge of type `t` between u and v, merging with an existing edge
  /// or self-loop. Throws std::logic_error if a boundary would gain a second
  /// edge.
  void connect(VertexId u, VertexId v, EdgeType t);
  /// Raw insertion; the pair must not already be adjacent.
  void add_edge(VertexId u, VertexId v, EdgeType t);
  void remove_edge(VertexId u, VertexId v);
  void set_edge_type(VertexId u, VertexId v, EdgeType t);
  /// Toggles a Hadamard edge between two Z spiders: removes it when present,
  /// adds it otherwise.
  void toggle_hadamard(VertexId u, VertexId v);

  bool has_vertex(VertexId v) const { return vertices_.contains(v); }
  bool connected(VertexId u, VertexId v) const;
  std::optional<EdgeType> edge_type(VertexId u, VertexId v) const;

  const Vertex& vertex(VertexId v) const { return vertices_.at(v); }
  VertexKind kind(VertexId v) const { return vertices_.at(v).kind; }
  Phase phase(VertexId v) const { return vertices_.at(v).phase; }
  void set_phase(VertexId v, Phase p);
  void add_to_phase(VertexId v, Phase p) { set_phase(v, phase(v) + p); }
  void set_kind(VertexId v, VertexKind k) { vertices_.at(v).kind = k; }
  bool is_boundary(VertexId v) const { return kind(v) == VertexKind::Boundary; }

  const std::map<VertexId, EdgeType>& neighbors(VertexId v) const { return adjacency_.at(v); }
  std::size_t degree(VertexId v) const { return adjacency_.at(v).size(); }

  const std::map<VertexId, Vertex>& vertices() const { return vertices_; }
  /// Edge list with first < second, in lexicographic order.
  std::vector<std::tuple<VertexId, VertexId, EdgeType>> edges() const;

  const std::vector<VertexId>& inputs() const { return inputs_; }
  const std::vector<VertexId>& outputs() const { return outputs_; }
  /// Position of a boundary in inputs/outputs.
  std::optional<std::size_t> input_index(VertexId v) const;
  std::optional<std::size_t> output_index(VertexId v) const;

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_spiders() const { return vertices_.size() - inputs_.size() - outputs_.size(); }
  std::size_t num_edges() const;
  VertexId next_id() const { return next_id_; }

  /// Throws std::logic_error describing the first violated invariant.
  void check_invariants() const;

  bool operator==(const ZxGraph&) const = default;

 private:
  std::map<VertexId, Vertex> vertices_;
  std::map<VertexId, std::map<VertexId, EdgeType>> adjacency_;
  std::vector<VertexId> inputs_;
  std::vector<VertexId> outputs_;
  VertexId next_id_ = 0;
};

/// Deterministic adjacency listing, e.g.
///
///     inputs 0
///     outputs 2
///     v 0 B 0/1
///     v 1 Z 1/4
///     e 0 1 S
std::string dump(const ZxGraph& g);

/// Gate-by-gate translation; ids are assigned in gate order (inputs first,
/// outputs last).
ZxGraph circuit_to_zx(const Circuit& c);

/// Only Z spiders, no Simple edge between two spiders, no parallel edges or
/// self-loops.
ZxGraph to_graph_like(ZxGraph g);
bool is_graph_like(const ZxGraph& g);

/// Full Reduce to a fixpoint. Scalars are discarded, including boundary-free
/// components.
ZxGraph full_reduce(ZxGraph g);

/// One recorded rewrite during full_reduce.
struct RewriteStep {
  std::string_view rule;
  const ZxGraph& after;
};
using RewriteObserver = std::function<void(const RewriteStep&)>;
ZxGraph full_reduce(ZxGraph g, const RewriteObserver& observer);

/// Termination measure of the rewrite system. Every rule strictly decreases
/// it in lexicographic order:
///
///   weight    = 2 * (#spiders) + (#non-Clifford spiders whose degree != 1)
///   x_spiders = #X spiders
///
/// Colour changes keep the weight and remove an X spider; every other rule
/// lowers the weight (fusion and identity removal by >= 1, local
/// complementation by >= 2, pivoting by >= 4, gadget pivoting by >= 1 and
/// gadget fusion by >= 4). Degree-1 non-Clifford spiders are phase-gadget
/// leaves, which is why rules that would rewire a leaf are excluded.
struct ReductionMeasure {
  std::size_t weight = 0;
  std::size_t x_spiders = 0;
  auto operator<=>(const ReductionMeasure&) const = default;
};
ReductionMeasure reduction_measure(const ZxGraph& g);

/// Individual rewrite rules. Each `match_*` returns the lowest-id candidate
/// (lexicographically lowest pair for two-vertex rules) or nothing; each
/// apply function preserves the linear map up to a non-zero scalar.
namespace rules {

/// Recolours an X spider to Z, toggling every incident edge.
void color_change(ZxGraph& g, VertexId v);
/// Two Z spiders (or two X spiders) joined by a Simple edge.
std::optional<std::pair<VertexId, VertexId>> match_fusion(const ZxGraph& g);
void fuse(ZxGraph& g, VertexId keep, VertexId absorb);

/// Phase-0 Z spider of degree 2.
std::optional<VertexId> match_identity(const ZxGraph& g);
void remove_identity(ZxGraph& g, VertexId v);

/// Interior Z spider with phase +-pi/2 and only Hadamard edges.
std::optional<VertexId> match_local_complement(const ZxGraph& g);
void local_complement(ZxGraph& g, VertexId v);

/// Hadamard-connected interior Z spiders with phases in {0, pi}.
std::optional<std::pair<VertexId, VertexId>> match_pivot(const ZxGraph& g);
void pivot(ZxGraph& g, VertexId u, VertexId v);

/// Interior Pauli spider `first` next to an interior non-Clifford spider
/// `second`; the non-Clifford phase is moved onto a new phase gadget.
std::optional<std::pair<VertexId, VertexId>> match_pivot_gadget(const ZxGraph& g);
void pivot_gadget(ZxGraph& g, VertexId pauli, VertexId non_clifford);

/// Two phase gadgets (leaf, hub) with identical hub neighbourhoods, returned
/// as the two leaves.
std::optional<std::pair<VertexId, VertexId>> match_gadget_fusion(const ZxGraph& g);
void fuse_gadgets(ZxGraph& g, VertexId keep_leaf, VertexId absorb_leaf);

/// Removes connected components that contain no boundary (pure scalars).
bool remove_scalar_components(ZxGraph& g);

}  // namespace rules

using LinearMap = Eigen::MatrixXcd;

/// Dense linear map of a diagram: rows index outputs, columns inputs, with
/// boundary 0 as the least significant bit.
///
/// Contracts spider by spider in id order, keeping a frontier tensor over the
/// vertices that still have uncontracted edges. Throws std::length_error when
/// more than 12 boundaries are present or the frontier exceeds 24 vertices.
LinearMap zx_to_tensor(const ZxGraph& g);

}  // namespace qcache::zx
