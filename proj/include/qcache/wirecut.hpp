#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qcache/circuit.hpp"
#include "qcache/cutting.hpp"
#include "qcache/identity.hpp"
#include "qcache/sim.hpp"
#include "qcache/store.hpp"

namespace qcache {

/// Counters and timings of one cut-and-reconstruct run.
struct WirecutReport {
  std::size_t terms = 0;
  std::size_t instances = 0;
  std::size_t distinct_circuits = 0;
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t unique = 0;  // misses whose put inserted
  std::uint64_t extra = 0;   // misses whose put found the key already present
  std::uint64_t simulations = 0;
  double wall_time = 0.0;
  double simulate_time = 0.0;  // summed over workers
  double lookup_time = 0.0;    // summed over workers
  double put_time = 0.0;       // summed over workers
  PipelineTimings pipeline;    // summed over workers
  double reconstructed = 0.0;
  std::optional<double> direct;  // full-circuit value when it fits in memory

  double hit_rate() const { return instances ? static_cast<double>(hits) / static_cast<double>(instances) : 0.0; }
};

struct WirecutOptions {
  int workers = 1;
  /// Compare against a direct simulation of the whole circuit (n <= 20).
  bool check_direct = true;
};

/// Cuts `c`, evaluates every subcircuit instance through `store` (or by
/// plain simulation when `store` is null), and reconstructs <observable>.
///
/// Workers pull instances from one queue ordered so that each distinct
/// circuit is requested once before any is requested again.
WirecutReport run_wirecut(const Circuit& c, std::span<const CutSpec> cuts, const PauliString& observable,
                          Store* store, const WirecutOptions& options = {});

/// Workload description read from a manifest file:
///
///     # comment
///     family hea | random | file
///     qubits 8
///     layers 1          (hea)
///     depth 6           (random)
///     seed 1
///     circuit path.qc   (file; relative to the manifest)
///     cut <qubit> <gate index>     (one line per cut)
///     observable Z0 Z7
///     workers 4
///     repeat 2          (runs sharing one store)
struct WirecutManifest {
  std::string family = "hea";
  int qubits = 8;
  int layers = 1;
  int depth = 4;
  std::uint64_t seed = 1;
  std::string circuit_path;
  std::vector<CutSpec> cuts;
  PauliString observable;
  int workers = 1;
  int repeat = 1;
};

/// Throws std::invalid_argument with a line number on malformed input.
WirecutManifest parse_manifest(const std::string& text);
/// `base_dir` resolves relative circuit paths.
Circuit manifest_circuit(const WirecutManifest& m, const std::string& base_dir = ".");

/// HEA with RY angles drawn uniformly from [0, 2pi) by a seeded generator.
Circuit seeded_hea(int n_qubits, int layers, std::uint64_t seed);

/// The 8-qubit, 1-layer HEA with two cuts: qubit 3 after CX(2,3) and qubit 4
/// after its RY.
WirecutManifest desk_manifest();

std::string wirecut_csv_header();
std::string wirecut_csv_row(const std::string& run, const std::string& backend, int workers, const WirecutReport& r);

}  // namespace qcache
