#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qcache/circuit.hpp"
#include "qcache/sim.hpp"

namespace qcache {

/// Severs `qubit`'s wire immediately after gate `position` (an index into
/// the circuit's gate list; the gate must act on that qubit).
struct CutSpec {
  int qubit = 0;
  std::size_t position = 0;
  bool operator==(const CutSpec&) const = default;
};

/// Observable measured on the upstream side of a cut. I and Z share one
/// quantum circuit; they differ only in post-processing.
enum class CutBasis : std::uint8_t { I, Z, X, Y };
/// Eigenstate prepared on the downstream side.
enum class PrepState : std::uint8_t { Zero, One, Plus, Minus, PlusI, MinusI };

struct CutSelection {
  CutBasis basis = CutBasis::I;
  int eigenvalue = 1;
  bool operator==(const CutSelection&) const = default;
};

/// The 8 per-cut selections in term order:
/// (I,+) (I,-) (Z,+) (Z,-) (X,+) (X,-) (Y,+) (Y,-).
std::span<const CutSelection, 8> cut_selections();
/// Coefficient 1/2 for I, eigenvalue/2 otherwise.
double selection_coefficient(const CutSelection& s);
/// Eigenstate the downstream fragment starts from for a selection.
PrepState selection_state(const CutSelection& s);

/// One side of the bipartition, on a compacted register.
struct Fragment {
  Circuit circuit{1};
  /// Original qubit index of each local qubit (ascending).
  std::vector<int> qubits;
  /// Local qubit of each cut's end in this fragment.
  std::vector<int> cut_qubits;

  /// Local index of an original qubit, or nullopt if it is not in this fragment.
  std::optional<int> local(int original) const;
};

struct FragmentPair {
  Fragment upstream;
  Fragment downstream;
  std::vector<CutSpec> cuts;
  int n_qubits = 0;
  /// Fragment holding each qubit's final wire segment (true = downstream).
  std::vector<bool> output_in_downstream;
  std::size_t cut_count() const { return cuts.size(); }
};

struct ReconstructionTerm {
  double coefficient = 1.0;
  std::vector<CutSelection> selections;  // one per cut
  std::size_t upstream_variant = 0;      // index into Enumeration::upstream
  std::size_t downstream_variant = 0;    // index into Enumeration::downstream
};

struct Decomposition {
  FragmentPair fragments;
  /// 8^k terms; selection of cut 0 varies slowest.
  std::vector<ReconstructionTerm> terms;
};

/// Splits the circuit at the cuts into an upstream and a downstream fragment.
///
/// Wire segments between cuts are grouped into connected components through
/// two-qubit gates; a component holding the upstream end of any cut belongs
/// to the upstream fragment, one holding a downstream end to the downstream
/// fragment, and components touching no cut go upstream. Throws
/// std::invalid_argument for a bad cut position and std::domain_error when
/// no two-fragment split exists.
Decomposition cut_wires(const Circuit& c, std::span<const CutSpec> cuts);

enum class FragmentRole : std::uint8_t { Upstream, Downstream };

struct SubcircuitVariant {
  Circuit circuit{1};
  FragmentRole role = FragmentRole::Upstream;
  /// Terms that request this circuit.
  std::vector<std::size_t> terms;
};

/// Distinct measurement (3^k) and preparation (6^k) circuits.
///
/// Upstream variants append H (X basis) or Sdg, H (Y basis) on each cut
/// qubit; downstream variants prepend X (|1>), H (|+>), X H (|->), H S
/// (|+i>) or H Sdg (|-i>). Every term requests one variant of each role, so
/// there are 2 * 8^k instances.
struct Enumeration {
  std::vector<SubcircuitVariant> upstream;
  std::vector<SubcircuitVariant> downstream;
  std::size_t instance_count() const;
  std::size_t distinct_count() const { return upstream.size() + downstream.size(); }
};
Enumeration enumerate_subcircuits(const Decomposition& d);

/// Observable factors on the local registers. A qubit's factor goes to the
/// fragment that holds its final wire segment.
struct SplitObservable {
  PauliString upstream;
  PauliString downstream;
};
SplitObservable split_observable(const FragmentPair& fp, const PauliString& observable);

/// Per-term fragment expectations; empty slots are missing results.
struct TermResults {
  std::vector<std::optional<double>> upstream;
  std::vector<std::optional<double>> downstream;
};

/// Expectation of (upstream observable x Z on every non-I cut) in the
/// measured upstream state, and of the downstream observable in the prepared
/// downstream state, for every term.
TermResults fragment_expectations(const Decomposition& d, const Enumeration& e, const PauliString& observable,
                                  std::span<const Statevector> upstream_states,
                                  std::span<const Statevector> downstream_states);

/// Sum over terms of coefficient * upstream * downstream. Throws
/// std::runtime_error naming the first term with a missing result.
double reconstruct_expectation(const Decomposition& d, const TermResults& results);

}  // namespace qcache
