#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qcache/phase.hpp"

namespace qcache {

enum class GateKind : std::uint8_t { H, X, Y, Z, S, Sdg, T, Tdg, RX, RY, RZ, CX, CZ, RZZ, SWAP };

std::string_view gate_name(GateKind kind);
std::optional<GateKind> gate_from_name(std::string_view name);
int gate_arity(GateKind kind);
bool gate_is_parametric(GateKind kind);

struct Gate {
  GateKind kind = GateKind::H;
  std::vector<int> qubits;
  std::optional<Phase> param;

  /// Throws std::invalid_argument on arity/parameter mismatch or repeated qubits.
  Gate(GateKind kind, std::vector<int> qubits, std::optional<Phase> param = std::nullopt);

  bool operator==(const Gate&) const = default;
};

class Circuit {
 public:
  explicit Circuit(int n_qubits, std::string label = {});

  int n_qubits() const { return n_qubits_; }
  const std::vector<Gate>& gates() const { return gates_; }
  std::size_t size() const { return gates_.size(); }
  const std::string& label() const { return label_; }
  void set_label(std::string label) { label_ = std::move(label); }

  /// Validates qubit bounds. Returns *this for chaining.
  Circuit& add(Gate gate);
  Circuit& add(GateKind kind, std::vector<int> qubits, std::optional<Phase> param = std::nullopt) {
    return add(Gate(kind, std::move(qubits), param));
  }

  bool operator==(const Circuit& other) const {
    return n_qubits_ == other.n_qubits_ && gates_ == other.gates_;
  }

 private:
  int n_qubits_;
  std::vector<Gate> gates_;
  std::string label_;
};

struct MaxCutGraph {
  int n_vertices = 0;
  /// Unordered pairs stored with first < second.
  std::set<std::pair<int, int>> edges;

  /// Throws std::invalid_argument on self-loops or out-of-range endpoints.
  static MaxCutGraph from_edges(int n_vertices, std::span<const std::pair<int, int>> edges);
};

/// Hardware-efficient ansatz: per layer an RY on every qubit, then a CX
/// ladder CX(q, q+1). `params` holds layers * n_qubits angles, layer-major.
Circuit build_hea(int n_qubits, int layers, std::span<const Phase> params);

/// Layered random circuit with at most two operands per gate. Each layer
/// shuffles the qubits and greedily packs one- and two-qubit gates drawn
/// uniformly from the gate set; rotation angles are uniform in [0, 2pi).
Circuit build_random(int n_qubits, int depth, std::uint64_t seed);

/// p-layer QAOA Max-Cut circuit. Layer l applies RZZ(2*gammas[l]) on every
/// edge in sorted order, then RX(2*betas[l]) on every qubit.
Circuit build_qaoa_maxcut(const MaxCutGraph& graph, std::span<const Phase> betas, std::span<const Phase> gammas);

}  // namespace qcache
