#include <algorithm>
#include <deque>
#include <set>
#include <stdexcept>

#include "qcache/zx.hpp"

namespace qcache::zx {
namespace {

bool is_z(const ZxGraph& g, VertexId v) { return g.kind(v) == VertexKind::Z; }

bool is_interior(const ZxGraph& g, VertexId v) {
  if (g.is_boundary(v)) return false;
  for (const auto& [w, _] : g.neighbors(v)) {
    if (g.is_boundary(w)) return false;
  }
  return true;
}

bool only_hadamard_edges(const ZxGraph& g, VertexId v) {
  for (const auto& [_, t] : g.neighbors(v)) {
    if (t != EdgeType::Hadamard) return false;
  }
  return true;
}

// True when some neighbour other than `except` has degree 1, i.e. `v` is the
// hub of a dangling spider that the rule must not rewire.
bool has_leaf_neighbor(const ZxGraph& g, VertexId v, VertexId except) {
  for (const auto& [w, _] : g.neighbors(v)) {
    if (w != except && g.degree(w) == 1) return true;
  }
  return false;
}

std::vector<std::pair<VertexId, EdgeType>> neighbor_list(const ZxGraph& g, VertexId v) {
  return {g.neighbors(v).begin(), g.neighbors(v).end()};
}

// First edge (u < v, in id order) satisfying `pred`, without materialising the
// edge list.
template <class Pred>
std::optional<std::pair<VertexId, VertexId>> find_edge(const ZxGraph& g, Pred pred) {
  for (const auto& [u, _] : g.vertices()) {
    for (const auto& [v, t] : g.neighbors(u)) {
      if (u < v) {
        if (auto m = pred(u, v, t)) return m;
      }
    }
  }
  return std::nullopt;
}

bool pivot_candidate(const ZxGraph& g, VertexId u, VertexId v) {
  return is_z(g, u) && is_z(g, v) && is_interior(g, u) && is_interior(g, v) && only_hadamard_edges(g, u) &&
         only_hadamard_edges(g, v);
}

}  // namespace

namespace rules {

void color_change(ZxGraph& g, VertexId v) {
  if (g.kind(v) != VertexKind::X) throw std::logic_error("color_change expects an X spider");
  g.set_kind(v, VertexKind::Z);
  for (const auto& [w, t] : neighbor_list(g, v)) g.set_edge_type(v, w, toggle(t));
}

std::optional<std::pair<VertexId, VertexId>> match_fusion(const ZxGraph& g) {
  return find_edge(g, [&g](VertexId u, VertexId v, EdgeType t) -> std::optional<std::pair<VertexId, VertexId>> {
    if (t == EdgeType::Simple && !g.is_boundary(u) && !g.is_boundary(v) && g.kind(u) == g.kind(v)) {
      return std::pair{u, v};
    }
    return std::nullopt;
  });
}

void fuse(ZxGraph& g, VertexId keep, VertexId absorb) {
  if (g.kind(keep) != g.kind(absorb) || g.edge_type(keep, absorb) != EdgeType::Simple) {
    throw std::logic_error("fuse expects same-coloured spiders joined by a Simple edge");
  }
  const Phase phase = g.phase(absorb);
  const auto nbrs = neighbor_list(g, absorb);
  g.remove_vertex(absorb);
  g.add_to_phase(keep, phase);
  for (const auto& [w, t] : nbrs) {
    if (w != keep) g.connect(keep, w, t);
  }
}

std::optional<VertexId> match_identity(const ZxGraph& g) {
  for (const auto& [v, vert] : g.vertices()) {
    if (vert.kind == VertexKind::Z && vert.phase.is_zero() && g.degree(v) == 2) return v;
  }
  return std::nullopt;
}

void remove_identity(ZxGraph& g, VertexId v) {
  if (!is_z(g, v) || !g.phase(v).is_zero() || g.degree(v) != 2) {
    throw std::logic_error("remove_identity expects a phase-free degree-2 Z spider");
  }
  const auto nbrs = neighbor_list(g, v);
  g.remove_vertex(v);
  g.connect(nbrs[0].first, nbrs[1].first, compose(nbrs[0].second, nbrs[1].second));
}

std::optional<VertexId> match_local_complement(const ZxGraph& g) {
  for (const auto& [v, vert] : g.vertices()) {
    if (vert.kind == VertexKind::Z && vert.phase.is_proper_clifford() && is_interior(g, v) &&
        only_hadamard_edges(g, v) && !has_leaf_neighbor(g, v, v)) {
      bool all_z = true;
      for (const auto& [w, _] : g.neighbors(v)) all_z = all_z && is_z(g, w);
      if (all_z) return v;
    }
  }
  return std::nullopt;
}

void local_complement(ZxGraph& g, VertexId v) {
  const Phase phase = g.phase(v);
  if (!phase.is_proper_clifford()) throw std::logic_error("local_complement expects a +-pi/2 spider");
  std::vector<VertexId> nbrs;
  for (const auto& [w, _] : g.neighbors(v)) nbrs.push_back(w);
  g.remove_vertex(v);
  for (std::size_t i = 0; i < nbrs.size(); ++i) {
    for (std::size_t j = i + 1; j < nbrs.size(); ++j) g.connect(nbrs[i], nbrs[j], EdgeType::Hadamard);
  }
  for (VertexId w : nbrs) g.add_to_phase(w, -phase);
}

std::optional<std::pair<VertexId, VertexId>> match_pivot(const ZxGraph& g) {
  return find_edge(g, [&g](VertexId u, VertexId v, EdgeType t) -> std::optional<std::pair<VertexId, VertexId>> {
    if (t != EdgeType::Hadamard || !g.phase(u).is_pauli() || !g.phase(v).is_pauli()) return std::nullopt;
    if (!pivot_candidate(g, u, v) || has_leaf_neighbor(g, u, v) || has_leaf_neighbor(g, v, u)) return std::nullopt;
    return std::pair{u, v};
  });
}

void pivot(ZxGraph& g, VertexId u, VertexId v) {
  if (g.edge_type(u, v) != EdgeType::Hadamard || !g.phase(u).is_pauli() || !g.phase(v).is_pauli()) {
    throw std::logic_error("pivot expects Hadamard-connected Pauli spiders");
  }
  std::set<VertexId> nu, nv;
  for (const auto& [w, _] : g.neighbors(u)) {
    if (w != v) nu.insert(w);
  }
  for (const auto& [w, _] : g.neighbors(v)) {
    if (w != u) nv.insert(w);
  }
  std::vector<VertexId> only_u, only_v, both;
  std::set_difference(nu.begin(), nu.end(), nv.begin(), nv.end(), std::back_inserter(only_u));
  std::set_difference(nv.begin(), nv.end(), nu.begin(), nu.end(), std::back_inserter(only_v));
  std::set_intersection(nu.begin(), nu.end(), nv.begin(), nv.end(), std::back_inserter(both));

  const Phase pu = g.phase(u), pv = g.phase(v);
  g.remove_vertex(u);
  g.remove_vertex(v);
  auto complement = [&g](const std::vector<VertexId>& a, const std::vector<VertexId>& b) {
    for (VertexId x : a) {
      for (VertexId y : b) g.connect(x, y, EdgeType::Hadamard);
    }
  };
  complement(only_u, only_v);
  complement(only_u, both);
  complement(only_v, both);
  for (VertexId w : only_u) g.add_to_phase(w, pv);
  for (VertexId w : only_v) g.add_to_phase(w, pu);
  for (VertexId w : both) g.add_to_phase(w, pu + pv + Phase::pi());
}

std::optional<std::pair<VertexId, VertexId>> match_pivot_gadget(const ZxGraph& g) {
  return find_edge(g, [&g](VertexId a, VertexId b, EdgeType t) -> std::optional<std::pair<VertexId, VertexId>> {
    if (t != EdgeType::Hadamard) return std::nullopt;
    const Phase pa = g.phase(a), pb = g.phase(b);
    const bool ab = pa.is_pauli() && !pb.is_clifford(), ba = pb.is_pauli() && !pa.is_clifford();
    if (!(ab || ba) || !pivot_candidate(g, a, b)) return std::nullopt;
    if (has_leaf_neighbor(g, a, a) || has_leaf_neighbor(g, b, b)) return std::nullopt;
    return ab ? std::pair{a, b} : std::pair{b, a};
  });
}

void pivot_gadget(ZxGraph& g, VertexId pauli, VertexId non_clifford) {
  const Phase alpha = g.phase(non_clifford);
  const VertexId hub = g.add_vertex(VertexKind::Z);
  const VertexId leaf = g.add_vertex(VertexKind::Z, alpha);
  g.add_edge(non_clifford, hub, EdgeType::Hadamard);
  g.add_edge(hub, leaf, EdgeType::Hadamard);
  g.set_phase(non_clifford, {});
  pivot(g, pauli, non_clifford);
  // A pi on the hub is pushed through onto the leaf as a sign flip.
  if (!g.phase(hub).is_zero()) {
    g.set_phase(hub, {});
    g.set_phase(leaf, -g.phase(leaf));
  }
}

namespace {

struct Gadget {
  VertexId leaf;
  VertexId hub;
};

std::optional<Gadget> as_gadget(const ZxGraph& g, VertexId leaf) {
  if (!is_z(g, leaf) || g.degree(leaf) != 1) return std::nullopt;
  const auto [hub, t] = *g.neighbors(leaf).begin();
  if (t != EdgeType::Hadamard || !is_z(g, hub) || !g.phase(hub).is_zero() || g.degree(hub) < 2) return std::nullopt;
  return Gadget{leaf, hub};
}

}  // namespace

std::optional<std::pair<VertexId, VertexId>> match_gadget_fusion(const ZxGraph& g) {
  std::map<std::vector<std::pair<VertexId, EdgeType>>, std::vector<VertexId>> groups;
  for (const auto& [v, _] : g.vertices()) {
    auto gadget = as_gadget(g, v);
    if (!gadget) continue;
    std::vector<std::pair<VertexId, EdgeType>> signature;
    for (const auto& [w, t] : g.neighbors(gadget->hub)) {
      if (w != gadget->leaf) signature.emplace_back(w, t);
    }
    groups[signature].push_back(v);
  }
  std::optional<std::pair<VertexId, VertexId>> best;
  for (const auto& [_, leaves] : groups) {
    if (leaves.size() < 2) continue;
    const std::pair candidate{leaves[0], leaves[1]};
    if (!best || candidate < *best) best = candidate;
  }
  return best;
}

void fuse_gadgets(ZxGraph& g, VertexId keep_leaf, VertexId absorb_leaf) {
  const auto keep = as_gadget(g, keep_leaf);
  const auto absorb = as_gadget(g, absorb_leaf);
  if (!keep || !absorb || keep->hub == absorb->hub) throw std::logic_error("fuse_gadgets expects two distinct gadgets");
  g.add_to_phase(keep_leaf, g.phase(absorb_leaf));
  g.remove_vertex(absorb_leaf);
  g.remove_vertex(absorb->hub);
}

bool remove_scalar_components(ZxGraph& g) {
  std::set<VertexId> reached;
  std::deque<VertexId> frontier;
  for (auto v : g.inputs()) frontier.push_back(v);
  for (auto v : g.outputs()) frontier.push_back(v);
  while (!frontier.empty()) {
    const VertexId v = frontier.front();
    frontier.pop_front();
    if (!reached.insert(v).second) continue;
    for (const auto& [w, _] : g.neighbors(v)) {
      if (!reached.contains(w)) frontier.push_back(w);
    }
  }
  std::vector<VertexId> doomed;
  for (const auto& [v, _] : g.vertices()) {
    if (!reached.contains(v)) doomed.push_back(v);
  }
  for (auto v : doomed) g.remove_vertex(v);
  return !doomed.empty();
}

}  // namespace rules

bool is_graph_like(const ZxGraph& g) {
  for (const auto& [v, vert] : g.vertices()) {
    if (vert.kind == VertexKind::X) return false;
  }
  for (const auto& [u, v, t] : g.edges()) {
    if (t == EdgeType::Simple && !g.is_boundary(u) && !g.is_boundary(v)) return false;
  }
  return true;
}

namespace {

void normalize(ZxGraph& g, const RewriteObserver* observer) {
  std::vector<VertexId> xs;
  for (const auto& [v, vert] : g.vertices()) {
    if (vert.kind == VertexKind::X) xs.push_back(v);
  }
  for (auto v : xs) {
    rules::color_change(g, v);
    if (observer) (*observer)({"color_change", g});
  }
  while (auto m = rules::match_fusion(g)) {
    rules::fuse(g, m->first, m->second);
    if (observer) (*observer)({"fusion", g});
  }
}

}  // namespace

ZxGraph to_graph_like(ZxGraph g) {
  normalize(g, nullptr);
  return g;
}

ReductionMeasure reduction_measure(const ZxGraph& g) {
  ReductionMeasure m;
  for (const auto& [v, vert] : g.vertices()) {
    if (vert.kind == VertexKind::Boundary) continue;
    m.weight += 2;
    if (!vert.phase.is_clifford() && g.degree(v) != 1) m.weight += 1;
    if (vert.kind == VertexKind::X) m.x_spiders += 1;
  }
  return m;
}

ZxGraph full_reduce(ZxGraph g, const RewriteObserver& observer) {
  const RewriteObserver* obs = observer ? &observer : nullptr;
  auto notify = [&](std::string_view rule) {
    if (obs) (*obs)({rule, g});
  };
  // Only identity removal can leave a Simple edge between spiders; the other
  // rules add Hadamard edges between interior Z spiders.
  bool dirty = true;
  for (;;) {
    if (dirty) normalize(g, obs);
    dirty = false;
    if (auto v = rules::match_identity(g)) {
      rules::remove_identity(g, *v);
      notify("identity");
      dirty = true;
      continue;
    }
    if (auto v = rules::match_local_complement(g)) {
      rules::local_complement(g, *v);
      notify("local_complement");
      continue;
    }
    if (auto m = rules::match_pivot(g)) {
      rules::pivot(g, m->first, m->second);
      notify("pivot");
      continue;
    }
    if (auto m = rules::match_pivot_gadget(g)) {
      rules::pivot_gadget(g, m->first, m->second);
      notify("pivot_gadget");
      continue;
    }
    if (auto m = rules::match_gadget_fusion(g)) {
      rules::fuse_gadgets(g, m->first, m->second);
      notify("gadget_fusion");
      continue;
    }
    break;
  }
  if (rules::remove_scalar_components(g)) notify("scalar_removal");
  return g;
}

ZxGraph full_reduce(ZxGraph g) { return full_reduce(std::move(g), RewriteObserver{}); }

}  // namespace qcache::zx
