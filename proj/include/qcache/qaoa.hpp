#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qcache/circuit.hpp"
#include "qcache/identity.hpp"
#include "qcache/store.hpp"

namespace qcache {

/// beta in linspace(0, pi/2, n_beta), gamma in linspace(0, 2pi, n_gamma),
/// both endpoints included.
struct Grid {
  int n_beta = 16;
  int n_gamma = 32;

  static Grid coarse() { return {16, 32}; }
  static Grid medium() { return {32, 64}; }
  static Grid fine() { return {64, 128}; }

  double beta_point(int i) const;
  double gamma_point(int i) const;
  /// Nearest point index; ties go to the lower point. Values outside the
  /// range map to the end points.
  int nearest_beta(double beta) const;
  int nearest_gamma(double gamma) const;
  void validate() const;
};

/// Snaps [beta_1..beta_p, gamma_1..gamma_p] onto the grid and quantizes.
/// The result keeps the same layout.
std::vector<Phase> snap(std::span<const double> params, const Grid& grid);

struct DeConfig {
  int population = 50;
  int generations = 20;
  double F = 0.7;
  double CR = 0.7;
  std::string strategy = "best1bin";
  std::uint64_t seed = 100;
  /// Throws std::invalid_argument unless 0 < F <= 2, 0 <= CR <= 1,
  /// population >= 4 and the strategy is best1bin.
  void validate() const;
};

enum class StoreFailurePolicy { Abort, Degrade };

struct QaoaOptions {
  int workers = 1;
  /// Degrade: a failing store call is counted and the energy is computed.
  StoreFailurePolicy on_store_error = StoreFailurePolicy::Abort;
};

/// Cumulative counters after a generation. Generation 0 is the initial
/// population.
struct GenerationRecord {
  int generation = 0;
  double best_energy = 0.0;
  std::uint64_t calls = 0;
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t unique_entries = 0;
  std::uint64_t extra_simulations = 0;
};

struct OptimizationReport {
  std::vector<GenerationRecord> generations;
  std::vector<Phase> best_params;  // [betas..., gammas...]
  double best_energy = 0.0;
  std::uint64_t simulations = 0;
  std::uint64_t store_errors = 0;
  double wall_time = 0.0;
  double simulate_time = 0.0;
  double lookup_time = 0.0;
  double put_time = 0.0;
  PipelineTimings pipeline;

  /// Best energy of every generation, in order.
  std::vector<double> best_sequence() const;
};

/// Seeded uniform sample of distinct edges: a partial Fisher-Yates shuffle
/// of the n(n-1)/2 vertex pairs listed in lexicographic order. Throws
/// std::invalid_argument when n_edges exceeds the number of pairs.
MaxCutGraph random_graph(int n, int n_edges, std::uint64_t seed);

/// Expected cut value of the p-layer QAOA state, without building the
/// circuit. Matches maxcut_energy(simulate(build_qaoa_maxcut(...))) to
/// rounding.
///
/// The state is invariant under flipping every bit, so only amplitudes with
/// the top qubit at 0 are kept (split real/imaginary arrays of 2^(n-1)).
/// Each cost layer is a diagonal phase looked up by cut value; mixer RX
/// gates on the low qubits are applied block by block together with that
/// phase, higher qubits three at a time, and the top qubit pairs z with its
/// complement. One instance per thread.
class MaxCutEvaluator {
 public:
  explicit MaxCutEvaluator(const MaxCutGraph& graph);
  double energy(std::span<const Phase> betas, std::span<const Phase> gammas);
  int n_qubits() const { return n_; }

 private:
  int n_;
  int n_edges_;
  std::vector<std::uint8_t> cut_;  // cut value of every kept basis state
  std::vector<double> re_, im_;
};

/// Energies are rounded to a multiple of 2^-32 before they are compared or
/// stored, so equal keys always yield bit-identical values.
double round_energy(double e);

/// best1bin differential evolution over grid indices, maximizing the cut.
///
/// Random stream: the initial population draws one uniform per member per
/// dimension; then, per generation and per member, r1 and r2 (rejection
/// sampled, distinct from each other and the member), the forced crossover
/// dimension, and one uniform per dimension. Trials are evaluated by
/// `options.workers` threads and selected at the generation barrier; a trial
/// replaces its target when its energy is not lower. `store` may be null.
OptimizationReport de_optimize(const MaxCutGraph& graph, int p, const Grid& grid, const DeConfig& cfg, Store* store,
                               const QaoaOptions& options = {});

/// key=value workload file; '#' starts a comment.
///
///     vertices=24  edges=60  graph_seed=42  p=2
///     grid=coarse | medium | fine   (or n_beta=, n_gamma=)
///     population=50  generations=20  F=0.7  CR=0.7  seed=100  strategy=best1bin
///     workers=1
struct QaoaConfig {
  int vertices = 24;
  int edges = 60;
  std::uint64_t graph_seed = 42;
  int p = 2;
  Grid grid = Grid::coarse();
  DeConfig de;
  int workers = 1;
};
QaoaConfig parse_qaoa_config(const std::string& text);
std::string to_text(const QaoaConfig& cfg);

/// "generation,best_energy,calls,hits,unique_entries" plus one row per record.
std::string qaoa_csv(const OptimizationReport& report);

}  // namespace qcache
