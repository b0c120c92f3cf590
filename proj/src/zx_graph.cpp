#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "qcache/zx.hpp"

namespace qcache::zx {

VertexId ZxGraph::add_vertex(VertexKind kind, Phase phase) {
  const VertexId id = next_id_++;
  vertices_.emplace(id, Vertex{kind, kind == VertexKind::Boundary ? Phase{} : phase});
  adjacency_.emplace(id, std::map<VertexId, EdgeType>{});
  return id;
}

VertexId ZxGraph::add_input() {
  const VertexId id = add_vertex(VertexKind::Boundary);
  inputs_.push_back(id);
  return id;
}

VertexId ZxGraph::add_output() {
  const VertexId id = add_vertex(VertexKind::Boundary);
  outputs_.push_back(id);
  return id;
}

void ZxGraph::remove_vertex(VertexId v) {
  if (is_boundary(v)) throw std::logic_error("boundary vertices are never removed");
  for (const auto& [w, _] : adjacency_.at(v)) adjacency_.at(w).erase(v);
  adjacency_.erase(v);
  vertices_.erase(v);
}

bool ZxGraph::connected(VertexId u, VertexId v) const { return adjacency_.at(u).contains(v); }

std::optional<EdgeType> ZxGraph::edge_type(VertexId u, VertexId v) const {
  const auto& nbrs = adjacency_.at(u);
  if (auto it = nbrs.find(v); it != nbrs.end()) return it->second;
  return std::nullopt;
}

void ZxGraph::set_phase(VertexId v, Phase p) {
  auto& vert = vertices_.at(v);
  if (vert.kind == VertexKind::Boundary && !p.is_zero()) throw std::logic_error("boundary phase must be zero");
  vert.phase = p;
}

void ZxGraph::add_edge(VertexId u, VertexId v, EdgeType t) {
  if (u == v) throw std::logic_error("raw self-loop");
  if (connected(u, v)) throw std::logic_error("raw parallel edge");
  adjacency_.at(u).emplace(v, t);
  adjacency_.at(v).emplace(u, t);
}

void ZxGraph::remove_edge(VertexId u, VertexId v) {
  adjacency_.at(u).erase(v);
  adjacency_.at(v).erase(u);
}

void ZxGraph::set_edge_type(VertexId u, VertexId v, EdgeType t) {
  adjacency_.at(u).at(v) = t;
  adjacency_.at(v).at(u) = t;
}

void ZxGraph::toggle_hadamard(VertexId u, VertexId v) {
  if (connected(u, v)) {
    remove_edge(u, v);
  } else {
    add_edge(u, v, EdgeType::Hadamard);
  }
}

void ZxGraph::connect(VertexId u, VertexId v, EdgeType t) {
  if (u == v) {
    if (is_boundary(u)) throw std::logic_error("self-loop on a boundary");
    // A Simple self-loop is the identity; a Hadamard self-loop adds pi.
    if (t == EdgeType::Hadamard) add_to_phase(u, Phase::pi());
    return;
  }
  const auto existing = edge_type(u, v);
  if (!existing) {
    if ((is_boundary(u) && degree(u) > 0) || (is_boundary(v) && degree(v) > 0)) {
      throw std::logic_error("boundary would gain a second edge");
    }
    add_edge(u, v, t);
    return;
  }
  if (is_boundary(u) || is_boundary(v)) throw std::logic_error("parallel edge at a boundary");
  // The "fusing" edge type joins same-coloured spiders with Simple edges and
  // differently coloured spiders with Hadamard edges.
  const EdgeType fusing = kind(u) == kind(v) ? EdgeType::Simple : EdgeType::Hadamard;
  if (*existing == fusing && t == fusing) return;
  if (*existing != fusing && t != fusing) {
    remove_edge(u, v);  // Hopf
    return;
  }
  // One fusing and one non-fusing edge: after fusion the latter is a
  // Hadamard self-loop, i.e. a pi phase.
  set_edge_type(u, v, fusing);
  add_to_phase(u, Phase::pi());
}

std::vector<std::tuple<VertexId, VertexId, EdgeType>> ZxGraph::edges() const {
  std::vector<std::tuple<VertexId, VertexId, EdgeType>> out;
  for (const auto& [u, nbrs] : adjacency_) {
    for (const auto& [v, t] : nbrs) {
      if (u < v) out.emplace_back(u, v, t);
    }
  }
  return out;
}

std::size_t ZxGraph::num_edges() const {
  std::size_t twice = 0;
  for (const auto& [_, nbrs] : adjacency_) twice += nbrs.size();
  return twice / 2;
}

std::optional<std::size_t> ZxGraph::input_index(VertexId v) const {
  auto it = std::find(inputs_.begin(), inputs_.end(), v);
  if (it == inputs_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - inputs_.begin());
}

std::optional<std::size_t> ZxGraph::output_index(VertexId v) const {
  auto it = std::find(outputs_.begin(), outputs_.end(), v);
  if (it == outputs_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - outputs_.begin());
}

void ZxGraph::check_invariants() const {
  std::size_t boundaries = 0;
  for (const auto& [v, vert] : vertices_) {
    if (v >= next_id_) throw std::logic_error("vertex id beyond the id counter");
    const auto& nbrs = adjacency_.at(v);
    if (nbrs.contains(v)) throw std::logic_error("stored self-loop at " + std::to_string(v));
    for (const auto& [w, t] : nbrs) {
      auto back = adjacency_.find(w);
      if (back == adjacency_.end() || !back->second.contains(v) || back->second.at(v) != t) {
        throw std::logic_error("asymmetric adjacency between " + std::to_string(v) + " and " + std::to_string(w));
      }
    }
    if (vert.kind == VertexKind::Boundary) {
      ++boundaries;
      if (!vert.phase.is_zero()) throw std::logic_error("boundary with a phase");
      if (nbrs.size() != 1) throw std::logic_error("boundary " + std::to_string(v) + " must have degree 1");
      if (!input_index(v) && !output_index(v)) throw std::logic_error("unlisted boundary");
    }
  }
  if (boundaries != inputs_.size() + outputs_.size()) throw std::logic_error("boundary lists out of sync");
  for (VertexId v : inputs_) {
    if (output_index(v)) throw std::logic_error("vertex is both input and output");
    if (!has_vertex(v) || !is_boundary(v)) throw std::logic_error("input is not a boundary");
  }
  for (VertexId v : outputs_) {
    if (!has_vertex(v) || !is_boundary(v)) throw std::logic_error("output is not a boundary");
  }
}

std::string dump(const ZxGraph& g) {
  std::ostringstream out;
  out << "inputs";
  for (auto v : g.inputs()) out << ' ' << v;
  out << "\noutputs";
  for (auto v : g.outputs()) out << ' ' << v;
  out << '\n';
  for (const auto& [v, vert] : g.vertices()) {
    const char kind = vert.kind == VertexKind::Boundary ? 'B' : vert.kind == VertexKind::Z ? 'Z' : 'X';
    out << "v " << v << ' ' << kind << ' ' << vert.phase.to_string() << '\n';
  }
  for (const auto& [u, v, t] : g.edges()) {
    out << "e " << u << ' ' << v << ' ' << (t == EdgeType::Simple ? 'S' : 'H') << '\n';
  }
  return out.str();
}

}  // namespace qcache::zx
