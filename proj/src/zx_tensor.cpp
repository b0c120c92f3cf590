#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <set>
#include <stdexcept>

#include "qcache/zx.hpp"

namespace qcache::zx {
namespace {

using cplx = std::complex<double>;

constexpr std::size_t kMaxBoundaries = 12;
constexpr std::size_t kMaxFrontier = 24;

// X spiders are Hadamard-conjugated Z spiders, so an edge behaves as a
// Hadamard edge iff an odd number of {edge, X endpoints} carry a Hadamard.
bool acts_as_hadamard(const ZxGraph& g, VertexId u, VertexId v, EdgeType t) {
  bool h = t == EdgeType::Hadamard;
  if (g.kind(u) == VertexKind::X) h = !h;
  if (g.kind(v) == VertexKind::X) h = !h;
  return h;
}

// Dense tensor over an ordered list of binary variables; variable i is bit i
// of the flat index.
struct Frontier {
  std::vector<VertexId> vars;
  std::vector<cplx> data{cplx{1.0, 0.0}};

  std::size_t position(VertexId v) const {
    return static_cast<std::size_t>(std::find(vars.begin(), vars.end(), v) - vars.begin());
  }

  void add_variable(VertexId v, cplx weight_one) {
    const std::size_t half = data.size();
    data.resize(half * 2);
    for (std::size_t i = 0; i < half; ++i) data[half + i] = data[i] * weight_one;
    vars.push_back(v);
  }

  void apply_edge(std::size_t a, std::size_t b, bool hadamard) {
    const std::size_t ma = std::size_t{1} << a, mb = std::size_t{1} << b;
    const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const bool ba = (i & ma) != 0, bb = (i & mb) != 0;
      if (hadamard) {
        data[i] *= (ba && bb) ? -inv_sqrt2 : inv_sqrt2;
      } else if (ba != bb) {
        data[i] = 0.0;
      }
    }
  }

  void sum_out(std::size_t pos) {
    const std::size_t low = std::size_t{1} << pos;
    std::vector<cplx> out(data.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const std::size_t lo = i & (low - 1);
      const std::size_t hi = (i >> pos) << (pos + 1);
      out[i] = data[hi | lo] + data[hi | low | lo];
    }
    data = std::move(out);
    vars.erase(vars.begin() + static_cast<std::ptrdiff_t>(pos));
  }
};

}  // namespace

LinearMap zx_to_tensor(const ZxGraph& g) {
  const std::size_t n_in = g.inputs().size(), n_out = g.outputs().size();
  if (n_in + n_out > kMaxBoundaries) throw std::length_error("zx_to_tensor: too many boundaries");

  Frontier f;
  std::set<VertexId> processed;
  for (const auto& [v, vert] : g.vertices()) {
    const bool spider = vert.kind != VertexKind::Boundary;
    const cplx weight_one = spider ? std::polar(1.0, vert.phase.radians()) : cplx{1.0, 0.0};
    f.add_variable(v, weight_one);
    if (f.vars.size() > kMaxFrontier) throw std::length_error("zx_to_tensor: contraction frontier too wide");
    processed.insert(v);
    const std::size_t pv = f.vars.size() - 1;
    for (const auto& [w, t] : g.neighbors(v)) {
      if (processed.contains(w) && w != v) f.apply_edge(pv, f.position(w), acts_as_hadamard(g, v, w, t));
    }
    // Retire spiders whose neighbourhood is fully contracted.
    for (std::size_t i = f.vars.size(); i-- > 0;) {
      const VertexId u = f.vars[i];
      if (g.is_boundary(u)) continue;
      const auto& nbrs = g.neighbors(u);
      const bool done = std::all_of(nbrs.begin(), nbrs.end(), [&](const auto& e) { return processed.contains(e.first); });
      if (done) f.sum_out(i);
    }
  }

  // Only boundaries remain on the frontier.
  const std::size_t rows = std::size_t{1} << n_out, cols = std::size_t{1} << n_in;
  LinearMap m = LinearMap::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::vector<std::size_t> in_pos(n_in), out_pos(n_out);
  for (std::size_t q = 0; q < n_in; ++q) in_pos[q] = f.position(g.inputs()[q]);
  for (std::size_t q = 0; q < n_out; ++q) out_pos[q] = f.position(g.outputs()[q]);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      std::size_t idx = 0;
      for (std::size_t q = 0; q < n_out; ++q) {
        if ((r >> q) & 1U) idx |= std::size_t{1} << out_pos[q];
      }
      for (std::size_t q = 0; q < n_in; ++q) {
        if ((c >> q) & 1U) idx |= std::size_t{1} << in_pos[q];
      }
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = f.data[idx];
    }
  }
  return m;
}

}  // namespace qcache::zx
