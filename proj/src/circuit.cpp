#include "qcache/circuit.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <numbers>
#include <stdexcept>

#include "qcache/prng.hpp"

namespace qcache {
namespace {

struct GateInfo {
  GateKind kind;
  std::string_view name;
  int arity;
  bool parametric;
};

constexpr std::array<GateInfo, 15> kGateTable{{
    {GateKind::H, "H", 1, false},
    {GateKind::X, "X", 1, false},
    {GateKind::Y, "Y", 1, false},
    {GateKind::Z, "Z", 1, false},
    {GateKind::S, "S", 1, false},
    {GateKind::Sdg, "SDG", 1, false},
    {GateKind::T, "T", 1, false},
    {GateKind::Tdg, "TDG", 1, false},
    {GateKind::RX, "RX", 1, true},
    {GateKind::RY, "RY", 1, true},
    {GateKind::RZ, "RZ", 1, true},
    {GateKind::CX, "CX", 2, false},
    {GateKind::CZ, "CZ", 2, false},
    {GateKind::RZZ, "RZZ", 2, true},
    {GateKind::SWAP, "SWAP", 2, false},
}};

const GateInfo& info(GateKind kind) { return kGateTable[static_cast<std::size_t>(kind)]; }

}  // namespace

std::string_view gate_name(GateKind kind) { return info(kind).name; }
int gate_arity(GateKind kind) { return info(kind).arity; }
bool gate_is_parametric(GateKind kind) { return info(kind).parametric; }

std::optional<GateKind> gate_from_name(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
  for (const auto& g : kGateTable) {
    if (g.name == upper) return g.kind;
  }
  return std::nullopt;
}

Gate::Gate(GateKind k, std::vector<int> qs, std::optional<Phase> p)
    : kind(k), qubits(std::move(qs)), param(p) {
  if (static_cast<int>(qubits.size()) != gate_arity(kind)) {
    throw std::invalid_argument(std::string(gate_name(kind)) + " expects " + std::to_string(gate_arity(kind)) +
                                " qubit(s)");
  }
  if (gate_is_parametric(kind) != param.has_value()) {
    throw std::invalid_argument(std::string(gate_name(kind)) +
                                (param ? " takes no parameter" : " requires a rotation parameter"));
  }
  if (qubits.size() == 2 && qubits[0] == qubits[1]) {
    throw std::invalid_argument(std::string(gate_name(kind)) + " operands must be distinct");
  }
  for (int q : qubits) {
    if (q < 0) throw std::invalid_argument("negative qubit index");
  }
}

Circuit::Circuit(int n_qubits, std::string label) : n_qubits_(n_qubits), label_(std::move(label)) {
  if (n_qubits <= 0) throw std::invalid_argument("circuit needs at least one qubit");
}

Circuit& Circuit::add(Gate gate) {
  for (int q : gate.qubits) {
    if (q >= n_qubits_) {
      throw std::invalid_argument("qubit " + std::to_string(q) + " out of range for " + std::to_string(n_qubits_) +
                                  "-qubit circuit");
    }
  }
  gates_.push_back(std::move(gate));
  return *this;
}

MaxCutGraph MaxCutGraph::from_edges(int n_vertices, std::span<const std::pair<int, int>> edges) {
  if (n_vertices <= 0) throw std::invalid_argument("graph needs at least one vertex");
  MaxCutGraph g;
  g.n_vertices = n_vertices;
  for (auto [a, b] : edges) {
    if (a == b) throw std::invalid_argument("self-loop on vertex " + std::to_string(a));
    if (a < 0 || b < 0 || a >= n_vertices || b >= n_vertices) throw std::invalid_argument("edge endpoint out of range");
    g.edges.emplace(std::min(a, b), std::max(a, b));
  }
  return g;
}

Circuit build_hea(int n_qubits, int layers, std::span<const Phase> params) {
  if (layers < 0) throw std::invalid_argument("negative layer count");
  if (params.size() != static_cast<std::size_t>(layers) * static_cast<std::size_t>(n_qubits)) {
    throw std::invalid_argument("HEA expects layers * n_qubits = " + std::to_string(layers * n_qubits) +
                                " parameters, got " + std::to_string(params.size()));
  }
  Circuit c(n_qubits, "hea");
  for (int l = 0; l < layers; ++l) {
    for (int q = 0; q < n_qubits; ++q) c.add(GateKind::RY, {q}, params[static_cast<std::size_t>(l * n_qubits + q)]);
    for (int q = 0; q + 1 < n_qubits; ++q) c.add(GateKind::CX, {q, q + 1});
  }
  return c;
}

Circuit build_random(int n_qubits, int depth, std::uint64_t seed) {
  if (n_qubits < 1 || depth < 1) throw std::invalid_argument("random circuit needs n_qubits >= 1 and depth >= 1");
  static constexpr std::array kOneQubit{GateKind::H,   GateKind::X,  GateKind::Y,  GateKind::Z,
                                        GateKind::S,   GateKind::Sdg, GateKind::T, GateKind::Tdg,
                                        GateKind::RX,  GateKind::RY, GateKind::RZ};
  static constexpr std::array kTwoQubit{GateKind::CX, GateKind::CZ, GateKind::RZZ, GateKind::SWAP};

  Xoshiro256 rng(seed);
  Circuit c(n_qubits, "random");
  std::vector<int> order(static_cast<std::size_t>(n_qubits));
  for (int layer = 0; layer < depth; ++layer) {
    for (int q = 0; q < n_qubits; ++q) order[static_cast<std::size_t>(q)] = q;
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    std::size_t next = 0;
    while (next < order.size()) {
      const std::size_t remaining = order.size() - next;
      const int operands = 1 + static_cast<int>(rng.below(std::min<std::size_t>(2, remaining)));
      const GateKind kind = operands == 1 ? kOneQubit[rng.below(kOneQubit.size())]
                                          : kTwoQubit[rng.below(kTwoQubit.size())];
      std::vector<int> qs(order.begin() + static_cast<std::ptrdiff_t>(next),
                          order.begin() + static_cast<std::ptrdiff_t>(next) + operands);
      next += static_cast<std::size_t>(operands);
      std::optional<Phase> param;
      if (gate_is_parametric(kind)) param = quantize_phase(rng.uniform() * 2.0 * std::numbers::pi);
      c.add(kind, std::move(qs), param);
    }
  }
  return c;
}

Circuit build_qaoa_maxcut(const MaxCutGraph& graph, std::span<const Phase> betas, std::span<const Phase> gammas) {
  if (betas.size() != gammas.size() || betas.empty()) {
    throw std::invalid_argument("QAOA needs equal, non-zero numbers of betas and gammas");
  }
  Circuit c(graph.n_vertices, "qaoa");
  for (int q = 0; q < graph.n_vertices; ++q) c.add(GateKind::H, {q});
  for (std::size_t l = 0; l < betas.size(); ++l) {
    const Phase cost = gammas[l].times(2);
    for (auto [a, b] : graph.edges) c.add(GateKind::RZZ, {a, b}, cost);
    const Phase mix = betas[l].times(2);
    for (int q = 0; q < graph.n_vertices; ++q) c.add(GateKind::RX, {q}, mix);
  }
  return c;
}

}  // namespace qcache
