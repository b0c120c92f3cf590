#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "qcache/circuit.hpp"
#include "qcache/zx.hpp"

namespace qcache {

/// Id-free view of a reduced diagram: node labels carry kind, phase and
/// boundary ordinal; edge labels are "S" or "H".
struct LabeledGraph {
  std::map<int, std::string> nodes;
  /// (u, v, label) with u < v, sorted.
  std::vector<std::tuple<int, int, std::string>> edges;

  bool operator==(const LabeledGraph&) const = default;
};

/// Node labels: "Z:<num>/<den>" for spiders ("X:..." if any survive),
/// "IN:<ordinal>" and "OUT:<ordinal>" for boundaries.
LabeledGraph canonical_graph(const zx::ZxGraph& g);
std::string dump(const LabeledGraph& lg);

inline constexpr int kDefaultWlIterations = 3;

/// Weisfeiler-Leman refinement hashed with SHA-256.
///
/// Round r relabels node v as the hex SHA-256 of
///
///     label(v) "(" e1 ":" label(u1) ";" e2 ":" label(u2) ";" ... ")"
///
/// where the (edge label, neighbour label) pairs are sorted. After
/// `iterations` rounds the graph digest is SHA-256 of the sorted final labels
/// joined by "\n"; the key is its first 16 hex characters. Throws
/// std::invalid_argument if iterations < 1.
std::string wl_hash(const LabeledGraph& lg, int iterations = kDefaultWlIterations);

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

enum class PayloadKind : std::uint8_t { Full = 0, Compact = 1 };

struct CacheKey {
  std::string hash;  // 16 lowercase hex characters
  int n_qubits = 0;
  int interior_spiders = 0;
  PayloadKind payload_kind = PayloadKind::Full;

  bool operator==(const CacheKey&) const = default;
};

/// Wall-clock seconds spent in each identification stage.
struct PipelineTimings {
  double translate = 0.0;
  double reduce = 0.0;
  double serialize = 0.0;
  double hash = 0.0;

  double total() const { return translate + reduce + serialize + hash; }
  PipelineTimings& operator+=(const PipelineTimings& o) {
    translate += o.translate;
    reduce += o.reduce;
    serialize += o.serialize;
    hash += o.hash;
    return *this;
  }
};

/// circuit_to_zx -> full_reduce -> canonical_graph -> wl_hash, with the
/// qubit count and reduced spider count attached for collision validation.
CacheKey circuit_key(const Circuit& c, PayloadKind kind = PayloadKind::Full, int wl_iterations = kDefaultWlIterations,
                     PipelineTimings* timings = nullptr);

/// Recomputes the circuit's metadata and compares it with the key's.
bool verify_key_match(const CacheKey& key, const Circuit& c, int wl_iterations = kDefaultWlIterations);

}  // namespace qcache
