// End-to-end acceptance run: one PASS/FAIL line per criterion, detail lines
// indented underneath. Exit status 1 when any criterion fails.
#include <sys/wait.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <latch>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "qcache/circuit_io.hpp"
#include "qcache/cutting.hpp"
#include "qcache/embedded_store.hpp"
#include "qcache/identity.hpp"
#include "qcache/linalg.hpp"
#include "qcache/net_store.hpp"
#include "qcache/qaoa.hpp"
#include "qcache/snapshot.hpp"
#include "qcache/wirecut.hpp"
#include "qcache/zx.hpp"
#include "test_support.hpp"

using namespace qcache;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
  std::string name;
  bool pass = false;
  std::string summary;
};

std::vector<Verdict> verdicts;

void detail(const std::string& line) { std::cout << "    " << line << std::endl; }

void record(std::string name, bool pass, std::string summary) {
  std::cout << (pass ? "  ok   " : "  FAIL ") << name << ": " << summary << std::endl;
  verdicts.push_back({std::move(name), pass, std::move(summary)});
}

class TempDir {
 public:
  TempDir() {
    std::string pattern = (fs::temp_directory_path() / "qcache-accept-XXXXXX").string();
    path_ = ::mkdtemp(pattern.data());
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

// Reference state by dense gate matrices; shares no kernel with the simulator.
Eigen::VectorXcd oracle_state(const Circuit& c) {
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(Eigen::Index{1} << c.n_qubits());
  psi(0) = 1.0;
  for (const auto& g : c.gates()) psi = testing::embed_gate(g, c.n_qubits()) * psi;
  return psi;
}

// <psi| P |psi> with P applied basis state by basis state.
double oracle_expectation(const Eigen::VectorXcd& psi, const PauliString& obs) {
  using cd = std::complex<double>;
  std::complex<double> acc = 0.0;
  for (Eigen::Index x = 0; x < psi.size(); ++x) {
    Eigen::Index y = x;
    cd factor = 1.0;
    for (const auto& [q, p] : obs) {
      const bool bit = (x >> q) & 1;
      if (p == Pauli::X || p == Pauli::Y) y ^= Eigen::Index{1} << q;
      if (p == Pauli::Y) factor *= bit ? cd(0, -1) : cd(0, 1);
      if (p == Pauli::Z && bit) factor = -factor;
    }
    // P|x> = factor |y>, so <psi|P|psi> picks up conj(psi_y) factor psi_x.
    acc += std::conj(psi(y)) * factor * psi(x);
  }
  return acc.real();
}

bool same_up_to_phase(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  Eigen::Index r = 0, c = 0;
  a.cwiseAbs().maxCoeff(&r, &c);
  if (std::abs(b(r, c)) < 1e-12) return false;
  const std::complex<double> phase = a(r, c) / b(r, c);
  if (std::abs(std::abs(phase) - 1.0) > tol) return false;
  return (a - phase * b).cwiseAbs().maxCoeff() <= tol;
}

std::optional<std::vector<CutSpec>> random_cuts(const Circuit& c, int k, Xoshiro256& rng) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    std::vector<CutSpec> cuts;
    std::set<int> used;
    while (static_cast<int>(cuts.size()) < k) {
      const std::size_t pos = rng.below(c.size());
      const auto& qs = c.gates()[pos].qubits;
      const int q = qs[rng.below(qs.size())];
      if (!used.insert(q).second) continue;
      cuts.push_back({q, pos});
    }
    try {
      cut_wires(c, cuts);
      return cuts;
    } catch (const std::domain_error&) {
    }
  }
  return std::nullopt;
}

void race(int n, const std::function<void(int)>& body) {
  std::latch start(n);
  std::vector<std::jthread> threads;
  for (int t = 0; t < n; ++t) {
    threads.emplace_back([&, t] {
      start.arrive_and_wait();
      body(t);
    });
  }
}

std::string run_cli(const std::vector<std::string>& args, int* status) {
  std::string cmd = "'" QCACHE_CLI "'";
  for (const auto& a : args) cmd += " '" + a + "'";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed");
  std::string out;
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, pipe)) > 0;) out.append(buf, n);
  const int raw = ::pclose(pipe);
  *status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return out;
}

std::vector<std::uint8_t> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Cached runs collected for the accounting check.
struct Ledger {
  std::string run;
  std::uint64_t requests, hits, unique, extra;
};
std::vector<Ledger> cached_runs;

void note_wirecut(const std::string& run, const WirecutReport& r) {
  cached_runs.push_back({run, r.instances, r.hits, r.unique, r.extra});
}

void note_qaoa(const std::string& run, const OptimizationReport& r) {
  for (const auto& g : r.generations) {
    cached_runs.push_back({run + " gen " + std::to_string(g.generation), g.calls, g.hits, g.unique_entries,
                           g.extra_simulations});
  }
}

// --- criteria ---

void counting() {
  const Circuit hea = seeded_hea(8, 1, 7);
  const std::vector<std::pair<std::vector<CutSpec>, std::size_t>> cases = {
      {{{3, 10}}, 16}, {{{3, 10}, {4, 4}}, 128}, {{{4, 4}, {5, 5}, {6, 6}, {7, 7}}, 8192}};
  bool ok = true;
  std::ostringstream s;
  for (const auto& [cuts, expected] : cases) {
    const auto got = enumerate_subcircuits(cut_wires(hea, cuts)).instance_count();
    ok &= got == expected;
    s << "k=" << cuts.size() << " -> " << got << " ";
  }
  record("subcircuit counting", ok, s.str());
}

void reconstruction() {
  Xoshiro256 rng(314);
  int checked = 0;
  double worst = 0.0;
  std::map<std::string, int> families;
  for (std::uint64_t seed = 0; checked < 60 && seed < 500; ++seed) {
    const int n = 3 + static_cast<int>(seed % 6);  // 3..8 qubits
    const int k = 1 + static_cast<int>(seed % 2);
    Circuit c(1);
    std::string family;
    switch (seed % 3) {
      case 0:
        c = seeded_hea(n, 1 + static_cast<int>(seed % 2), seed);
        family = "hea";
        break;
      case 1:
        c = build_random(n, 3 + static_cast<int>(seed % 3), seed);
        family = "random";
        break;
      default:
        c = testing::random_clifford_t(n, 4 * n, seed);
        family = "clifford+t";
    }
    const auto cuts = random_cuts(c, k, rng);
    if (!cuts) continue;
    PauliString obs;
    while (obs.empty()) {
      for (int q = 0; q < n; ++q) {
        const auto p = static_cast<Pauli>(rng.below(4));
        if (p != Pauli::I && obs.size() < 2) obs[q] = p;
      }
    }
    MemoryStore store;
    WirecutOptions opts;
    opts.check_direct = false;
    const auto r = run_wirecut(c, *cuts, obs, &store, opts);
    note_wirecut("reconstruction seed " + std::to_string(seed), r);
    worst = std::max(worst, std::abs(r.reconstructed - oracle_expectation(oracle_state(c), obs)));
    ++checked;
    ++families[family];
  }
  std::ostringstream s;
  s << checked << " circuits (";
  for (const auto& [f, n] : families) s << f << ' ' << n << ' ';
  s << "), max |reconstructed - oracle| = " << std::scientific << std::setprecision(2) << worst;
  record("reconstruction identity", checked >= 50 && worst <= 1e-9, s.str());
}

void rewrite_soundness() {
  using namespace zx;
  constexpr double kTol = 1e-9;
  Xoshiro256 rng(4242);
  int diagrams = 0, unsound = 0, non_decreasing = 0;
  std::map<std::string, int> fired;
  auto check_rule = [&](const ZxGraph& g, const Eigen::MatrixXcd& before, const char* rule) {
    ++fired[rule];
    if (!equal_up_to_scalar(zx_to_tensor(g), before, kTol)) ++unsound;
  };
  for (int trial = 0; trial < 240; ++trial) {
    const int n_in = static_cast<int>(rng.below(3)), n_out = static_cast<int>(rng.below(3));
    const int spiders = 2 + static_cast<int>(rng.below(6));
    const ZxGraph start = trial % 4 == 3 ? circuit_to_zx(testing::random_clifford_t(1 + trial % 4, 10, trial))
                                         : testing::random_nonzero_diagram(rng, n_in, n_out, spiders,
                                                                           0.25 + 0.3 * rng.uniform(), trial % 2);
    const auto before = zx_to_tensor(start);
    ++diagrams;

    for (const auto& [v, vert] : start.vertices()) {
      if (vert.kind != VertexKind::X) continue;
      ZxGraph g = start;
      rules::color_change(g, v);
      check_rule(g, before, "color_change");
      break;
    }
    if (auto m = rules::match_fusion(start)) {
      ZxGraph g = start;
      rules::fuse(g, m->first, m->second);
      check_rule(g, before, "fusion");
    }
    const ZxGraph gl = to_graph_like(start);
    if (auto v = rules::match_identity(gl)) {
      ZxGraph g = gl;
      rules::remove_identity(g, *v);
      check_rule(g, before, "identity");
    }
    if (auto v = rules::match_local_complement(gl)) {
      ZxGraph g = gl;
      rules::local_complement(g, *v);
      check_rule(g, before, "local_complement");
    }
    if (auto m = rules::match_pivot(gl)) {
      ZxGraph g = gl;
      rules::pivot(g, m->first, m->second);
      check_rule(g, before, "pivot");
    }
    if (auto m = rules::match_pivot_gadget(gl)) {
      ZxGraph g = gl;
      rules::pivot_gadget(g, m->first, m->second);
      check_rule(g, before, "pivot_gadget");
    }
    if (auto m = rules::match_gadget_fusion(gl)) {
      ZxGraph g = gl;
      rules::fuse_gadgets(g, m->first, m->second);
      check_rule(g, before, "gadget_fusion");
    }

    ReductionMeasure last = reduction_measure(start);
    const ZxGraph out = full_reduce(start, [&](const RewriteStep& step) {
      if (step.rule == "scalar_removal") return;
      const auto m = reduction_measure(step.after);
      if (!(m < last)) ++non_decreasing;
      last = m;
    });
    ++fired["full_reduce"];
    if (!equal_up_to_scalar(zx_to_tensor(out), before, kTol)) ++unsound;
  }
  std::ostringstream s;
  s << diagrams << " diagrams, " << unsound << " unsound rewrites, " << non_decreasing << " non-decreasing steps;";
  for (const auto& [rule, n] : fired) s << ' ' << rule << '=' << n;
  record("rewrite soundness", diagrams >= 200 && unsound == 0 && non_decreasing == 0, s.str());
}

LabeledGraph relabel(const LabeledGraph& lg, Xoshiro256& rng) {
  std::vector<int> perm(lg.nodes.size());
  std::iota(perm.begin(), perm.end(), 500);
  for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
  std::map<int, int> to;
  std::size_t i = 0;
  for (const auto& [id, _] : lg.nodes) to[id] = perm[i++];
  LabeledGraph out;
  for (const auto& [id, l] : lg.nodes) out.nodes[to[id]] = l;
  for (const auto& [a, b, e] : lg.edges) out.edges.emplace_back(std::min(to[a], to[b]), std::max(to[a], to[b]), e);
  std::sort(out.edges.begin(), out.edges.end());
  return out;
}

void hash_determinism() {
  TempDir dir;
  int mismatches = 0, files = 0;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Circuit c = seed % 2 ? build_random(5, 4, seed) : seeded_hea(6, 2, seed);
    const auto path = dir / ("c" + std::to_string(seed) + ".qc");
    std::ofstream(path) << to_text(c);
    int s1 = 0, s2 = 0;
    const auto a = run_cli({"hash", path.string()}, &s1);
    const auto b = run_cli({"hash", path.string()}, &s2);
    const auto first = a.substr(0, a.find('\n'));
    ++files;
    if (s1 != 0 || s2 != 0 || a != b || first != circuit_key(c).hash || first.size() != 16) ++mismatches;
  }
  Xoshiro256 rng(99);
  int changed = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto lg = canonical_graph(zx::full_reduce(zx::circuit_to_zx(build_random(4, 4, 7000 + trial))));
    changed += wl_hash(relabel(lg, rng)) != wl_hash(lg);
  }
  std::ostringstream s;
  s << files << " circuits hashed by two processes, " << mismatches << " mismatches; 500 id permutations, "
    << changed << " hash changes";
  record("hash determinism and invariance", mismatches == 0 && changed == 0, s.str());
}

void soundness_sampling() {
  // Small circuits collide often, which exercises both directions.
  std::vector<Circuit> corpus;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    corpus.push_back(testing::random_clifford_t(1 + static_cast<int>(seed % 2), 3 + static_cast<int>(seed % 4), seed));
  }
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    corpus.push_back(testing::random_clifford_t(3 + static_cast<int>(seed % 2), 8, 1000 + seed));
  }
  for (std::uint64_t seed = 0; seed < 50; ++seed) corpus.push_back(build_random(2 + static_cast<int>(seed % 3), 3, seed));
  for (int n = 1; n <= 4; ++n) {
    for (int layers = 1; layers <= 2; ++layers) corpus.push_back(seeded_hea(n, layers, 5));
  }
  std::vector<std::string> keys;
  std::vector<Eigen::MatrixXcd> unitaries;
  for (const auto& c : corpus) {
    const auto k = circuit_key(c);
    keys.push_back(k.hash + "/" + std::to_string(k.n_qubits) + "/" + std::to_string(k.interior_spiders));
    unitaries.push_back(testing::dense_unitary(c));
  }
  std::uint64_t equal_keys = 0, false_pos = 0, equal_maps = 0, false_neg = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (std::size_t j = i + 1; j < corpus.size(); ++j) {
      const bool same_key = keys[i] == keys[j];
      const bool same_map = corpus[i].n_qubits() == corpus[j].n_qubits() &&
                            same_up_to_phase(unitaries[i], unitaries[j], 1e-8);
      equal_keys += same_key;
      equal_maps += same_map;
      false_pos += same_key && !same_map;
      false_neg += same_map && !same_key;
    }
  }
  std::ostringstream s;
  s << corpus.size() << " circuits, " << equal_keys << " equal-key pairs, " << false_pos << " false positives; "
    << false_neg << " of " << equal_maps << " equivalent pairs got different keys (false-negative rate "
    << std::setprecision(3) << (equal_maps ? static_cast<double>(false_neg) / static_cast<double>(equal_maps) : 0.0)
    << ")";
  record("soundness sampling", false_pos == 0 && equal_keys > 0, s.str());
}

void desk_hit_rate() {
  const auto m = desk_manifest();
  const Circuit c = manifest_circuit(m);
  MemoryStore store;
  const auto r = run_wirecut(c, m.cuts, m.observable, &store);
  note_wirecut("desk memory", r);
  std::ostringstream s;
  s << "hits " << r.hits << "/" << r.instances << " (" << std::setprecision(4) << 100 * r.hit_rate()
    << "%), unique_entries " << r.unique << ", distinct circuits " << r.distinct_circuits;
  record("desk-scale hit rate", r.instances == 128 && r.hit_rate() >= 0.5 && r.unique <= 64, s.str());

  TempDir dir;
  EmbeddedStore embedded(dir / "emb");
  note_wirecut("desk embedded", run_wirecut(c, m.cuts, m.observable, &embedded));
  note_wirecut("desk embedded warm", run_wirecut(c, m.cuts, m.observable, &embedded));
}

void concurrency() {
  bool ok = true;
  std::ostringstream s;
  const auto e = CacheEntry::full(circuit_key(seeded_hea(3, 1, 1)), simulate(seeded_hea(3, 1, 1)));
  auto race_put = [&](Store& store, const char* name) {
    std::atomic<int> inserted{0};
    race(8, [&](int) { inserted += store.put_if_absent(e) == PutResult::Inserted; });
    ok &= inserted == 1;
    s << name << " inserted " << inserted << "/8; ";
  };
  TempDir dir;
  {
    MemoryStore mem;
    race_put(mem, "memory");
    EmbeddedStore emb(dir / "race");
    race_put(emb, "embedded");
    StoreServer server;
    NetworkedStore net({"127.0.0.1", server.port()});
    race_put(net, "networked");
  }

  StoreServer server;
  NetworkedStore net({"127.0.0.1", server.port()});
  const auto m = desk_manifest();
  WirecutOptions opts;
  opts.workers = 8;
  const auto r = run_wirecut(manifest_circuit(m), m.cuts, m.observable, &net, opts);
  note_wirecut("desk networked 8 workers", r);
  ok &= r.extra <= 8;
  s << "networked wirecut 8 workers extra_simulations " << r.extra << "; ";

  EmbeddedStore queued(dir / "queued", {std::chrono::milliseconds(5), true});
  race(4, [&](int t) {
    for (int i = 0; i < 250; ++i) {
      char hash[17];
      std::snprintf(hash, sizeof hash, "%016x", static_cast<unsigned>(t * 250 + i) * 2654435761u);
      queued.put_if_absent(CacheEntry::compact(CacheKey{hash, 1, 0, PayloadKind::Compact}, t + i / 7.0));
    }
  });
  queued.drain();
  ok &= queued.committed_count() == 1000;
  s << "embedded drain committed " << queued.committed_count() << "/1000";
  record("concurrency", ok, s.str());
}

void snapshot_round_trip() {
  TempDir dir;
  StoreServer server;
  NetworkedStore net({"127.0.0.1", server.port()});
  for (std::uint64_t i = 0; i < 40; ++i) {
    const Circuit c = build_random(3, 2, i);
    const auto key = circuit_key(c, i % 2 ? PayloadKind::Full : PayloadKind::Compact);
    if (i % 2) {
      net.put_if_absent(CacheEntry::full(key, simulate(c)));
    } else {
      net.put_if_absent(CacheEntry::compact(key, expectation_pauli(simulate(c), {{0, Pauli::Z}})));
    }
  }
  const auto a = dir / "a.snap", b = dir / "b.snap", c = dir / "c.snap", d = dir / "d.snap";
  export_snapshot(net, a);
  export_snapshot(net, b);
  EmbeddedStore emb(dir / "emb");
  import_snapshot(a, emb);
  export_snapshot(emb, c);
  MemoryStore mem;
  import_snapshot(c, mem);
  export_snapshot(mem, d);
  const auto ref = net.entries();
  const bool ok = slurp(a) == slurp(b) && emb.entries() == ref && mem.entries() == ref && slurp(c) == slurp(a) &&
                  slurp(d) == slurp(a);
  std::ostringstream s;
  s << ref.size() << " entries, networked -> embedded -> memory, " << slurp(a).size() << "-byte snapshots "
    << (ok ? "byte-identical" : "differ");
  record("snapshot round trip", ok, s.str());
}

void qaoa_trajectory() {
  const QaoaConfig cfg;  // 24 vertices, 60 edges, graph seed 42, p = 2, coarse grid, pop 50, 20 generations
  const auto graph = random_graph(cfg.vertices, cfg.edges, cfg.graph_seed);
  detail("qaoa: " + to_text(cfg));
  auto timed = [&](const char* name, Store* store) {
    const auto t = Clock::now();
    auto r = de_optimize(graph, cfg.p, cfg.grid, cfg.de, store);
    std::ostringstream s;
    s << "qaoa " << name << ": best " << std::setprecision(10) << r.best_energy << ", simulations " << r.simulations
      << ", " << std::setprecision(3) << std::chrono::duration<double>(Clock::now() - t).count() << " s";
    detail(s.str());
    return r;
  };
  const auto plain = timed("none", nullptr);
  TempDir dir;
  OptimizationReport embedded, networked;
  {
    EmbeddedStore store(dir / "emb");
    embedded = timed("embedded", &store);
  }
  {
    StoreServer server;
    NetworkedStore store({"127.0.0.1", server.port()});
    networked = timed("networked", &store);
  }
  note_qaoa("qaoa embedded", embedded);
  note_qaoa("qaoa networked", networked);

  bool ok = embedded.best_sequence() == plain.best_sequence() && networked.best_sequence() == plain.best_sequence();
  for (const auto* r : {&embedded, &networked}) {
    std::uint64_t prev = 0;
    for (const auto& g : r->generations) {
      ok &= g.hits >= prev;
      prev = g.hits;
    }
    ok &= r->generations.back().hits > 0;
  }
  const auto& last = embedded.generations.back();
  std::ostringstream s;
  s << "best-energy sequences " << (ok ? "identical" : "differ") << " over " << plain.generations.size()
    << " generations; final hits " << last.hits << "/" << last.calls << ", unique " << last.unique_entries;
  record("qaoa trajectory invariance", ok, s.str());
}

void accounting() {
  std::size_t bad = 0;
  for (const auto& r : cached_runs) {
    if (r.hits + r.unique + r.extra != r.requests) {
      ++bad;
      detail("accounting broken in " + r.run);
    }
  }
  record("accounting identity", bad == 0 && !cached_runs.empty(),
         std::to_string(cached_runs.size()) + " cached runs, " + std::to_string(bad) + " violations");
}

void overhead_ratio() {
  struct Sizes {
    double pipeline = 0.0, simulate = 0.0;
    int circuits = 0;
  };
  std::map<int, Sizes> by_size;
  MemoryStore store;
  circuit_key(seeded_hea(4, 1, 1));  // first-call library setup stays out of the figures
  for (int n : {16, 18, 20}) {
    std::vector<Circuit> workload;
    for (int layers : {1, 2, 4}) workload.push_back(seeded_hea(n, layers, 3));
    for (int depth : {4, 8}) workload.push_back(build_random(n, depth, 3));
    for (const auto& c : workload) {
      PipelineTimings t;
      const auto key = circuit_key(c, PayloadKind::Full, kDefaultWlIterations, &t);
      const auto start = Clock::now();
      const bool hit = store.get(key).has_value();
      const double lookup = std::chrono::duration<double>(Clock::now() - start).count();
      const auto sim_start = Clock::now();
      const auto sv = simulate(c);
      const double sim = std::chrono::duration<double>(Clock::now() - sim_start).count();
      if (!hit) store.put_if_absent(CacheEntry::full(key, sv));
      auto& s = by_size[n];
      s.pipeline += t.total() + lookup;
      s.simulate += sim;
      ++s.circuits;
    }
  }
  double pipeline = 0.0, simulate_total = 0.0;
  std::ostringstream s;
  s << std::setprecision(3);
  for (const auto& [n, sz] : by_size) {
    pipeline += sz.pipeline;
    simulate_total += sz.simulate;
    detail("overhead n=" + std::to_string(n) + ": pipeline " + std::to_string(sz.pipeline) + " s, simulate " +
           std::to_string(sz.simulate) + " s, ratio " + std::to_string(sz.pipeline / sz.simulate));
  }
  const double ratio = pipeline / simulate_total;
  s << "pipeline " << pipeline << " s vs simulate " << simulate_total << " s over " << 15
    << " circuits of 16-20 qubits, ratio " << ratio;
  record("identification overhead ratio", ratio <= 0.05, s.str());
}

void footprint() {
  TempDir dir;
  EmbeddedStore store(dir / "emb");
  for (std::uint32_t i = 0; i < 1000; ++i) {
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(i) * 0x9e3779b97f4a7c15ULL);
    store.put_if_absent(CacheEntry::compact(CacheKey{hash, 4, 7, PayloadKind::Compact}, i / 3.0));
  }
  store.drain();
  const double per_entry = (static_cast<double>(store.file_size()) - 8.0 * 1000) / 1000.0;
  std::ostringstream s;
  s << store.committed_count() << " compact entries, " << store.file_size() << " bytes, " << per_entry
    << " bytes per entry beyond the 8-byte payload";
  record("embedded footprint", store.committed_count() == 1000 && per_entry <= 64.0, s.str());
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void()>>> steps = {
      {"subcircuit counting", counting},
      {"reconstruction identity", reconstruction},
      {"rewrite soundness", rewrite_soundness},
      {"hash determinism and invariance", hash_determinism},
      {"soundness sampling", soundness_sampling},
      {"desk-scale hit rate", desk_hit_rate},
      {"concurrency", concurrency},
      {"snapshot round trip", snapshot_round_trip},
      {"qaoa trajectory invariance", qaoa_trajectory},
      {"accounting identity", accounting},
      {"identification overhead ratio", overhead_ratio},
      {"embedded footprint", footprint},
  };
  for (const auto& [name, step] : steps) {
    try {
      step();
    } catch (const std::exception& e) {
      record(name, false, std::string("threw: ") + e.what());
    }
  }
  // Summary in criterion order.
  const std::vector<std::string> order = {"subcircuit counting",
                                          "reconstruction identity",
                                          "rewrite soundness",
                                          "hash determinism and invariance",
                                          "soundness sampling",
                                          "desk-scale hit rate",
                                          "accounting identity",
                                          "concurrency",
                                          "snapshot round trip",
                                          "qaoa trajectory invariance",
                                          "identification overhead ratio",
                                          "embedded footprint"};
  std::cout << "\n";
  bool all = true;
  for (const auto& name : order) {
    const auto it = std::find_if(verdicts.begin(), verdicts.end(), [&](const Verdict& v) { return v.name == name; });
    const bool pass = it != verdicts.end() && it->pass;
    all &= pass;
    std::cout << (pass ? "PASS " : "FAIL ") << name << " - " << (it != verdicts.end() ? it->summary : "not run")
              << '\n';
  }
  return all ? 0 : 1;
}
