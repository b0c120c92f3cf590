#include "qcache/cutting.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

namespace qcache {
namespace {

constexpr std::array<CutSelection, 8> kSelections = {{
    {CutBasis::I, 1}, {CutBasis::I, -1}, {CutBasis::Z, 1}, {CutBasis::Z, -1},
    {CutBasis::X, 1}, {CutBasis::X, -1}, {CutBasis::Y, 1}, {CutBasis::Y, -1},
}};

// Upstream circuits: I and Z measure in the same basis.
int measurement_digit(CutBasis b) {
  switch (b) {
    case CutBasis::I:
    case CutBasis::Z: return 0;
    case CutBasis::X: return 1;
    case CutBasis::Y: return 2;
  }
  return 0;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

Fragment make_fragment(const Circuit& c, const std::vector<int>& qubits, const std::vector<const Gate*>& gates) {
  Fragment f;
  f.qubits = qubits;
  f.circuit = Circuit(static_cast<int>(qubits.size()), c.label());
  for (const Gate* g : gates) {
    std::vector<int> local;
    for (int q : g->qubits) local.push_back(*f.local(q));
    f.circuit.add(g->kind, std::move(local), g->param);
  }
  return f;
}

}  // namespace

std::span<const CutSelection, 8> cut_selections() { return kSelections; }

double selection_coefficient(const CutSelection& s) {
  return s.basis == CutBasis::I ? 0.5 : 0.5 * s.eigenvalue;
}

PrepState selection_state(const CutSelection& s) {
  const bool plus = s.eigenvalue > 0;
  switch (s.basis) {
    case CutBasis::I:
    case CutBasis::Z: return plus ? PrepState::Zero : PrepState::One;
    case CutBasis::X: return plus ? PrepState::Plus : PrepState::Minus;
    case CutBasis::Y: return plus ? PrepState::PlusI : PrepState::MinusI;
  }
  return PrepState::Zero;
}

std::optional<int> Fragment::local(int original) const {
  const auto it = std::lower_bound(qubits.begin(), qubits.end(), original);
  if (it == qubits.end() || *it != original) return std::nullopt;
  return static_cast<int>(it - qubits.begin());
}

Decomposition cut_wires(const Circuit& c, std::span<const CutSpec> cuts) {
  const int n = c.n_qubits();
  if (cuts.empty()) throw std::invalid_argument("at least one cut is required");
  const auto& gates = c.gates();

  // Cut positions per qubit, validated.
  std::vector<std::vector<std::size_t>> cut_after(static_cast<std::size_t>(n));
  for (const auto& cut : cuts) {
    if (cut.qubit < 0 || cut.qubit >= n) {
      throw std::invalid_argument("cut qubit " + std::to_string(cut.qubit) + " out of range");
    }
    if (cut.position >= gates.size()) {
      throw std::invalid_argument("cut position " + std::to_string(cut.position) + " out of range");
    }
    const auto& qs = gates[cut.position].qubits;
    if (std::find(qs.begin(), qs.end(), cut.qubit) == qs.end()) {
      throw std::invalid_argument("gate " + std::to_string(cut.position) + " does not act on qubit " +
                                  std::to_string(cut.qubit));
    }
    auto& list = cut_after[cut.qubit];
    if (std::find(list.begin(), list.end(), cut.position) != list.end()) {
      throw std::invalid_argument("duplicate cut");
    }
    list.push_back(cut.position);
  }
  for (auto& list : cut_after) std::sort(list.begin(), list.end());

  // Segment s of qubit q spans the gates between its (s-1)th and sth cut.
  std::vector<int> first_segment(static_cast<std::size_t>(n) + 1, 0);
  for (int q = 0; q < n; ++q) first_segment[q + 1] = first_segment[q] + static_cast<int>(cut_after[q].size()) + 1;
  auto segment_of = [&](int q, std::size_t gate_index) {
    const auto& list = cut_after[q];
    const auto before = std::lower_bound(list.begin(), list.end(), gate_index) - list.begin();
    return first_segment[q] + static_cast<int>(before);
  };

  UnionFind uf(first_segment[n]);
  for (std::size_t i = 0; i < gates.size(); ++i) {
    const auto& qs = gates[i].qubits;
    for (std::size_t k = 1; k < qs.size(); ++k) uf.unite(segment_of(qs[0], i), segment_of(qs[k], i));
  }

  // 0 = unlabelled, 1 = upstream, 2 = downstream.
  std::vector<int> side(static_cast<std::size_t>(first_segment[n]), 0);
  auto label = [&](int segment, int s) {
    int& slot = side[uf.find(segment)];
    if (slot != 0 && slot != s) throw std::domain_error("cuts do not separate the circuit into two fragments");
    slot = s;
  };
  for (const auto& cut : cuts) {
    const int up = segment_of(cut.qubit, cut.position);
    label(up, 1);
    label(up + 1, 2);
  }
  auto downstream = [&](int segment) { return side[uf.find(segment)] == 2; };

  std::vector<int> up_qubits, down_qubits;
  FragmentPair fp;
  fp.n_qubits = n;
  fp.cuts.assign(cuts.begin(), cuts.end());
  fp.output_in_downstream.resize(static_cast<std::size_t>(n));
  for (int q = 0; q < n; ++q) {
    bool any_up = false, any_down = false;
    for (int s = first_segment[q]; s < first_segment[q + 1]; ++s) (downstream(s) ? any_down : any_up) = true;
    if (any_up) up_qubits.push_back(q);
    if (any_down) down_qubits.push_back(q);
    fp.output_in_downstream[q] = downstream(first_segment[q + 1] - 1);
  }

  std::vector<const Gate*> up_gates, down_gates;
  for (std::size_t i = 0; i < gates.size(); ++i) {
    (downstream(segment_of(gates[i].qubits[0], i)) ? down_gates : up_gates).push_back(&gates[i]);
  }
  fp.upstream = make_fragment(c, up_qubits, up_gates);
  fp.downstream = make_fragment(c, down_qubits, down_gates);
  for (const auto& cut : cuts) {
    fp.upstream.cut_qubits.push_back(*fp.upstream.local(cut.qubit));
    fp.downstream.cut_qubits.push_back(*fp.downstream.local(cut.qubit));
  }

  Decomposition d;
  d.fragments = std::move(fp);
  const std::size_t k = cuts.size();
  if (k > 10) throw std::invalid_argument("too many cuts");
  std::size_t n_terms = 1;
  for (std::size_t i = 0; i < k; ++i) n_terms *= kSelections.size();
  d.terms.reserve(n_terms);
  for (std::size_t t = 0; t < n_terms; ++t) {
    ReconstructionTerm term;
    term.selections.resize(k);
    std::size_t rest = t, up = 0, down = 0;
    for (std::size_t i = k; i-- > 0;) {
      term.selections[i] = kSelections[rest % kSelections.size()];
      rest /= kSelections.size();
    }
    for (const auto& s : term.selections) {
      term.coefficient *= selection_coefficient(s);
      up = up * 3 + static_cast<std::size_t>(measurement_digit(s.basis));
      down = down * 6 + static_cast<std::size_t>(selection_state(s));
    }
    term.upstream_variant = up;
    term.downstream_variant = down;
    d.terms.push_back(std::move(term));
  }
  return d;
}

std::size_t Enumeration::instance_count() const {
  std::size_t n = 0;
  for (const auto& v : upstream) n += v.terms.size();
  for (const auto& v : downstream) n += v.terms.size();
  return n;
}

Enumeration enumerate_subcircuits(const Decomposition& d) {
  const auto& fp = d.fragments;
  const std::size_t k = fp.cut_count();
  std::size_t n_up = 1, n_down = 1;
  for (std::size_t i = 0; i < k; ++i) n_up *= 3, n_down *= 6;

  // Digits of a variant index, cut 0 most significant.
  auto digits = [k](std::size_t index, std::size_t radix) {
    std::vector<int> out(k);
    for (std::size_t i = k; i-- > 0;) {
      out[i] = static_cast<int>(index % radix);
      index /= radix;
    }
    return out;
  };

  Enumeration e;
  for (std::size_t v = 0; v < n_up; ++v) {
    SubcircuitVariant var{fp.upstream.circuit, FragmentRole::Upstream, {}};
    const auto ds = digits(v, 3);
    for (std::size_t i = 0; i < k; ++i) {
      const int q = fp.upstream.cut_qubits[i];
      if (ds[i] == 1) {
        var.circuit.add(GateKind::H, {q});
      } else if (ds[i] == 2) {
        var.circuit.add(GateKind::Sdg, {q}).add(GateKind::H, {q});
      }
    }
    e.upstream.push_back(std::move(var));
  }
  for (std::size_t v = 0; v < n_down; ++v) {
    const Fragment& f = fp.downstream;
    SubcircuitVariant var{Circuit(f.circuit.n_qubits(), f.circuit.label()), FragmentRole::Downstream, {}};
    const auto ds = digits(v, 6);
    for (std::size_t i = 0; i < k; ++i) {
      const int q = f.cut_qubits[i];
      switch (static_cast<PrepState>(ds[i])) {
        case PrepState::Zero: break;
        case PrepState::One: var.circuit.add(GateKind::X, {q}); break;
        case PrepState::Plus: var.circuit.add(GateKind::H, {q}); break;
        case PrepState::Minus: var.circuit.add(GateKind::X, {q}).add(GateKind::H, {q}); break;
        case PrepState::PlusI: var.circuit.add(GateKind::H, {q}).add(GateKind::S, {q}); break;
        case PrepState::MinusI: var.circuit.add(GateKind::H, {q}).add(GateKind::Sdg, {q}); break;
      }
    }
    for (const auto& g : f.circuit.gates()) var.circuit.add(g);
    e.downstream.push_back(std::move(var));
  }
  for (std::size_t t = 0; t < d.terms.size(); ++t) {
    e.upstream[d.terms[t].upstream_variant].terms.push_back(t);
    e.downstream[d.terms[t].downstream_variant].terms.push_back(t);
  }
  return e;
}

SplitObservable split_observable(const FragmentPair& fp, const PauliString& observable) {
  SplitObservable out;
  for (const auto& [q, p] : observable) {
    if (q < 0 || q >= fp.n_qubits) throw std::out_of_range("observable qubit " + std::to_string(q) + " out of range");
    if (p == Pauli::I) continue;
    if (fp.output_in_downstream[q]) {
      out.downstream[*fp.downstream.local(q)] = p;
    } else {
      out.upstream[*fp.upstream.local(q)] = p;
    }
  }
  return out;
}

TermResults fragment_expectations(const Decomposition& d, const Enumeration& e, const PauliString& observable,
                                  std::span<const Statevector> upstream_states,
                                  std::span<const Statevector> downstream_states) {
  if (upstream_states.size() != e.upstream.size() || downstream_states.size() != e.downstream.size()) {
    throw std::invalid_argument("one state per subcircuit variant is required");
  }
  const auto split = split_observable(d.fragments, observable);
  const auto& cut_qubits = d.fragments.upstream.cut_qubits;

  TermResults r;
  r.upstream.resize(d.terms.size());
  r.downstream.resize(d.terms.size());
  // Upstream values depend only on the variant and which cuts are I.
  std::map<std::pair<std::size_t, std::vector<bool>>, double> up_cache;
  std::vector<std::optional<double>> down_cache(e.downstream.size());
  for (std::size_t t = 0; t < d.terms.size(); ++t) {
    const auto& term = d.terms[t];
    std::vector<bool> measured(term.selections.size());
    for (std::size_t i = 0; i < measured.size(); ++i) measured[i] = term.selections[i].basis != CutBasis::I;
    auto [it, fresh] = up_cache.try_emplace({term.upstream_variant, measured}, 0.0);
    if (fresh) {
      PauliString p = split.upstream;
      for (std::size_t i = 0; i < measured.size(); ++i) {
        if (measured[i]) p[cut_qubits[i]] = Pauli::Z;
      }
      it->second = expectation_pauli(upstream_states[term.upstream_variant], p);
    }
    r.upstream[t] = it->second;
    auto& down = down_cache[term.downstream_variant];
    if (!down) down = expectation_pauli(downstream_states[term.downstream_variant], split.downstream);
    r.downstream[t] = *down;
  }
  return r;
}

double reconstruct_expectation(const Decomposition& d, const TermResults& results) {
  double sum = 0.0;
  for (std::size_t t = 0; t < d.terms.size(); ++t) {
    const bool have_up = t < results.upstream.size() && results.upstream[t];
    const bool have_down = t < results.downstream.size() && results.downstream[t];
    if (!have_up || !have_down) {
      throw std::runtime_error("missing " + std::string(have_up ? "downstream" : "upstream") +
                               " result for term " + std::to_string(t));
    }
    sum += d.terms[t].coefficient * *results.upstream[t] * *results.downstream[t];
  }
  return sum;
}

}  // namespace qcache
