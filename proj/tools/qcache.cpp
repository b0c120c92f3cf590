// qcache command-line tool.
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "qcache/circuit_io.hpp"
#include "qcache/embedded_store.hpp"
#include "qcache/identity.hpp"
#include "qcache/linalg.hpp"
#include "qcache/net_store.hpp"
#include "qcache/qaoa.hpp"
#include "qcache/sim.hpp"
#include "qcache/snapshot.hpp"
#include "qcache/wirecut.hpp"

namespace {

using namespace qcache;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitNotEquivalent = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BackendFlags {
  std::string backend;  // empty: pick from the environment
  std::string dir;
  std::string addr;
  bool no_cache = false;
};

void add_backend_flags(CLI::App* cmd, BackendFlags& f, bool allow_no_cache) {
  cmd->add_option("--backend", f.backend, "memory, embedded or networked (default: from QCACHE_ADDR / QCACHE_DIR)")
      ->check(CLI::IsMember({"memory", "embedded", "networked"}));
  cmd->add_option("--dir", f.dir, "embedded store directory (default: $QCACHE_DIR)");
  cmd->add_option("--addr", f.addr, "networked store host:port (default: $QCACHE_ADDR)");
  if (allow_no_cache) cmd->add_flag("--no-cache", f.no_cache, "simulate every request");
}

std::string env_or(const char* name, const std::string& fallback) {
  if (!fallback.empty()) return fallback;
  const char* v = std::getenv(name);
  return v ? v : "";
}

std::unique_ptr<Store> open_backend(const BackendFlags& f) {
  if (f.backend.empty()) {
    if (!f.dir.empty()) return std::make_unique<EmbeddedStore>(f.dir);
    if (!f.addr.empty()) return std::make_unique<NetworkedStore>(NetworkedStore::parse_address(f.addr));
    return open_store_from_env();
  }
  if (f.backend == "memory") return std::make_unique<MemoryStore>();
  if (f.backend == "embedded") {
    const auto dir = env_or("QCACHE_DIR", f.dir);
    if (dir.empty()) throw UsageError("--backend embedded needs --dir or QCACHE_DIR");
    return std::make_unique<EmbeddedStore>(dir);
  }
  const auto addr = env_or("QCACHE_ADDR", f.addr);
  if (addr.empty()) throw UsageError("--backend networked needs --addr or QCACHE_ADDR");
  return std::make_unique<NetworkedStore>(NetworkedStore::parse_address(addr));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void append_csv(const std::string& path, const std::string& header, const std::string& rows) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot write " + path);
  if (fresh) out << header << '\n';
  out << rows;
}

// Per-stage table: total seconds and mean milliseconds per event.
struct StageRow {
  std::string name;
  double total;
  std::uint64_t count;
};

void print_stage_table(std::ostream& out, const std::vector<StageRow>& rows, double wall) {
  out << "\n" << std::left << std::setw(12) << "stage" << std::right << std::setw(12) << "total_s" << std::setw(10)
      << "count" << std::setw(12) << "mean_ms" << '\n';
  out << std::fixed;
  double overhead = 0.0;
  for (const auto& r : rows) {
    out << std::left << std::setw(12) << r.name << std::right << std::setw(12) << std::setprecision(6) << r.total
        << std::setw(10) << r.count << std::setw(12) << std::setprecision(4)
        << (r.count ? 1e3 * r.total / static_cast<double>(r.count) : 0.0) << '\n';
    if (r.name != "simulate" && r.name != "store") overhead += r.total;
  }
  out << std::left << std::setw(12) << "overhead" << std::right << std::setw(12) << std::setprecision(6) << overhead
      << "   (translate+reduce+serialize+hash+lookup)\n";
  out << std::left << std::setw(12) << "wall" << std::right << std::setw(12) << std::setprecision(6) << wall << '\n';
  out << std::defaultfloat;
}

std::vector<StageRow> stage_rows(const PipelineTimings& p, double lookup, double simulate, double put,
                                 std::uint64_t requests, std::uint64_t simulations, std::uint64_t puts) {
  const std::uint64_t keyed = lookup > 0.0 || p.total() > 0.0 ? requests : 0;
  return {{"translate", p.translate, keyed}, {"reduce", p.reduce, keyed},   {"serialize", p.serialize, keyed},
          {"hash", p.hash, keyed},           {"lookup", lookup, keyed},     {"simulate", simulate, simulations},
          {"store", put, puts}};
}

int cmd_hash(const std::string& file, bool explain, int wl) {
  const Circuit c = load_circuit(file);
  const CacheKey key = circuit_key(c, PayloadKind::Full, wl);
  std::cout << key.hash << '\n' << "n_qubits " << key.n_qubits << '\n' << "interior_spiders " << key.interior_spiders << '\n';
  if (explain) {
    std::cout << "\nreduced diagram:\n" << dump(canonical_graph(zx::full_reduce(zx::circuit_to_zx(c))));
  }
  return kExitOk;
}

int cmd_equiv(const std::string& a_file, const std::string& b_file, bool oracle) {
  const Circuit a = load_circuit(a_file), b = load_circuit(b_file);
  const CacheKey ka = circuit_key(a), kb = circuit_key(b);
  const bool equal = ka == kb;
  std::cout << ka.hash << "  " << a_file << '\n' << kb.hash << "  " << b_file << '\n'
            << (equal ? "equivalent" : "not equivalent") << '\n';
  if (oracle) {
    if (a.n_qubits() > 4 || b.n_qubits() > 4) {
      std::cout << "oracle: skipped (more than 4 qubits)\n";
    } else {
      const bool same = a.n_qubits() == b.n_qubits() &&
                        equal_up_to_scalar(circuit_unitary(a), circuit_unitary(b), 1e-8);
      std::cout << "oracle: unitaries " << (same ? "equal up to global phase" : "differ beyond a global phase") << "\n";
      if (equal && !same) {
        std::cerr << "error: equal keys for inequivalent circuits\n";
        return kExitRuntime;
      }
    }
  }
  return equal ? kExitOk : kExitNotEquivalent;
}

int cmd_wirecut(const std::string& manifest_path, const BackendFlags& flags, int workers, const std::string& csv) {
  WirecutManifest m = parse_manifest(read_file(manifest_path));
  if (workers > 0) m.workers = workers;
  const auto base = std::filesystem::path(manifest_path).parent_path().string();
  const Circuit c = manifest_circuit(m, base.empty() ? "." : base);
  std::unique_ptr<Store> store;
  if (!flags.no_cache) store = open_backend(flags);
  const std::string backend = store ? store->describe() : "none";

  std::cout << "workload wirecut family=" << m.family << " qubits=" << c.n_qubits() << " gates=" << c.size()
            << " cuts=" << m.cuts.size() << " observable=" << to_string(m.observable) << " backend=" << backend
            << " workers=" << m.workers << '\n';
  std::string rows;
  for (int run = 1; run <= m.repeat; ++run) {
    WirecutOptions opts;
    opts.workers = m.workers;
    const auto r = run_wirecut(c, m.cuts, m.observable, store.get(), opts);
    std::cout << "\nrun " << run << '\n'
              << "terms " << r.terms << "  instances " << r.instances << "  distinct_circuits " << r.distinct_circuits
              << '\n'
              << "hits " << r.hits << "  misses " << r.misses << "  unique_entries " << r.unique
              << "  extra_simulations " << r.extra << "  simulations " << r.simulations << "  hit_rate "
              << std::setprecision(4) << r.hit_rate() << '\n'
              << std::setprecision(12) << "reconstructed " << r.reconstructed;
    if (r.direct) std::cout << "  direct " << *r.direct << "  abs_error " << std::abs(r.reconstructed - *r.direct);
    std::cout << std::setprecision(6) << '\n';
    print_stage_table(std::cout,
                      stage_rows(r.pipeline, r.lookup_time, r.simulate_time, r.put_time, store ? r.instances : 0,
                                 r.simulations, store ? r.misses : 0),
                      r.wall_time);
    rows += wirecut_csv_row(std::to_string(run), backend, m.workers, r) + '\n';
  }
  if (store) {
    const auto s = store->stats();
    std::cout << "\nstore " << backend << "  calls " << s.calls << "  hits " << s.hits << "  misses " << s.misses
              << "  unique_entries " << s.unique_entries << "  extra_simulations " << s.extra_simulations << '\n';
  }
  if (!csv.empty()) append_csv(csv, wirecut_csv_header(), rows);
  return kExitOk;
}

int cmd_qaoa(const std::string& config_path, const BackendFlags& flags, int workers, const std::string& csv,
             bool degrade) {
  QaoaConfig cfg = parse_qaoa_config(read_file(config_path));
  if (workers > 0) cfg.workers = workers;
  const auto graph = random_graph(cfg.vertices, cfg.edges, cfg.graph_seed);
  std::unique_ptr<Store> store;
  if (!flags.no_cache) store = open_backend(flags);
  const std::string backend = store ? store->describe() : "none";
  std::cout << "workload qaoa " << to_text(cfg) << " backend=" << backend << '\n';

  QaoaOptions opts;
  opts.workers = cfg.workers;
  opts.on_store_error = degrade ? StoreFailurePolicy::Degrade : StoreFailurePolicy::Abort;
  const auto r = de_optimize(graph, cfg.p, cfg.grid, cfg.de, store.get(), opts);

  std::cout << "\n" << std::setw(10) << "generation" << std::setw(20) << "best_energy" << std::setw(8) << "calls"
            << std::setw(8) << "hits" << std::setw(10) << "unique" << '\n';
  for (const auto& g : r.generations) {
    std::cout << std::setw(10) << g.generation << std::setw(20) << std::setprecision(12) << g.best_energy
              << std::setw(8) << g.calls << std::setw(8) << g.hits << std::setw(10) << g.unique_entries << '\n';
  }
  const auto& last = r.generations.back();
  std::cout << std::setprecision(12) << "\nbest_energy " << r.best_energy << "  params";
  for (const auto& ph : r.best_params) std::cout << ' ' << ph.to_string();
  std::cout << std::setprecision(6) << "\ncalls " << last.calls << "  hits " << last.hits << "  misses " << last.misses
            << "  unique_entries " << last.unique_entries << "  extra_simulations " << last.extra_simulations
            << "  simulations " << r.simulations << "  hit_rate "
            << (last.calls ? static_cast<double>(last.hits) / static_cast<double>(last.calls) : 0.0);
  if (r.store_errors) std::cout << "  store_errors " << r.store_errors;
  std::cout << '\n';
  print_stage_table(std::cout,
                    stage_rows(r.pipeline, r.lookup_time, r.simulate_time, r.put_time, store ? last.calls : 0,
                               r.simulations, store ? last.misses : 0),
                    r.wall_time);
  if (!csv.empty()) {
    std::ofstream out(csv);
    if (!out) throw std::runtime_error("cannot write " + csv);
    out << qaoa_csv(r);
  }
  return kExitOk;
}

void print_stats(const std::string& label, const CacheStats& s) {
  std::cout << label << "calls " << s.calls << '\n'
            << label << "hits " << s.hits << '\n'
            << label << "misses " << s.misses << '\n'
            << label << "stores " << s.stores << '\n'
            << label << "unique_entries " << s.unique_entries << '\n'
            << label << "extra_simulations " << s.extra_simulations << '\n';
}

int cmd_store_stats(const BackendFlags& flags) {
  auto store = open_backend(flags);
  std::cout << "backend " << store->describe() << '\n' << "entries " << store->entries().size() << '\n';
  if (auto* net = dynamic_cast<NetworkedStore*>(store.get())) {
    print_stats("server_", net->server_stats());
  } else {
    print_stats("", store->stats());
  }
  return kExitOk;
}

int cmd_store_serve(const std::string& host, int port) {
  // Block the stop signals before any thread starts so only sigwait sees them.
  sigset_t stop;
  sigemptyset(&stop);
  sigaddset(&stop, SIGINT);
  sigaddset(&stop, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop, nullptr);
  StoreServer server(Endpoint{host, static_cast<std::uint16_t>(port)});
  std::cout << "listening on " << host << ':' << server.port() << std::endl;
  int sig = 0;
  sigwait(&stop, &sig);
  const auto s = server.stats();
  server.stop();
  std::cout << "stopped (" << (sig == SIGINT ? "SIGINT" : "SIGTERM") << "), " << server.table().size()
            << " entries, " << s.calls << " calls" << std::endl;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic result cache for quantum circuits"};
  app.require_subcommand(1);

  std::string file_a, file_b, path, csv, host = "127.0.0.1";
  bool explain = false, oracle = false, degrade = false;
  int wl = kDefaultWlIterations, workers = 0, port = 0;
  BackendFlags flags;

  auto* hash = app.add_subcommand("hash", "print the cache key of a circuit file");
  hash->add_option("circuit", file_a, "circuit file (.qc text or .qasm)")->required();
  hash->add_flag("--explain", explain, "also print the reduced, canonically labelled diagram");
  hash->add_option("--wl", wl, "Weisfeiler-Leman iterations")->check(CLI::PositiveNumber);

  auto* equiv = app.add_subcommand("equiv", "exit 0 when two circuits get the same key, 3 otherwise");
  equiv->add_option("a", file_a)->required();
  equiv->add_option("b", file_b)->required();
  equiv->add_flag("--oracle", oracle, "compare unitaries up to global phase (at most 4 qubits)");

  auto* wirecut = app.add_subcommand("wirecut", "cut, evaluate through the cache, reconstruct");
  wirecut->add_option("manifest", path)->required();
  wirecut->add_option("--workers", workers, "worker threads (overrides the manifest)")->check(CLI::PositiveNumber);
  wirecut->add_option("--csv", csv, "append result rows to this CSV file");
  add_backend_flags(wirecut, flags, true);

  auto* qaoa = app.add_subcommand("qaoa", "differential-evolution QAOA through the cache");
  qaoa->add_option("config", path)->required();
  qaoa->add_option("--workers", workers, "worker threads (overrides the config)")->check(CLI::PositiveNumber);
  qaoa->add_option("--csv", csv, "write the per-generation CSV here");
  qaoa->add_flag("--degrade", degrade, "on store failure compute the energy and count the error");
  add_backend_flags(qaoa, flags, true);

  auto* store = app.add_subcommand("store", "snapshot, inspect or serve a store");
  store->require_subcommand(1);
  auto* exp = store->add_subcommand("export", "write a snapshot of the store");
  exp->add_option("file", path)->required();
  add_backend_flags(exp, flags, false);
  auto* imp = store->add_subcommand("import", "load a snapshot into the store");
  imp->add_option("file", path)->required();
  add_backend_flags(imp, flags, false);
  auto* stats = store->add_subcommand("stats", "print entry count and counters");
  add_backend_flags(stats, flags, false);
  auto* serve = store->add_subcommand("serve", "run a networked store server until SIGINT/SIGTERM");
  serve->add_option("--host", host, "IPv4 address to bind");
  serve->add_option("--port", port, "TCP port (0 picks a free one)")->check(CLI::Range(0, 65535));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*hash) return cmd_hash(file_a, explain, wl);
    if (*equiv) return cmd_equiv(file_a, file_b, oracle);
    if (*wirecut) return cmd_wirecut(path, flags, workers, csv);
    if (*qaoa) return cmd_qaoa(path, flags, workers, csv, degrade);
    if (*exp) {
      auto s = open_backend(flags);
      const auto n = export_snapshot(*s, path);
      std::cout << "exported " << n << " records to " << path << '\n';
      return kExitOk;
    }
    if (*imp) {
      auto s = open_backend(flags);
      const auto r = import_snapshot(path, *s);
      std::cout << "records " << r.records << "  inserted " << r.inserted << "  already_present " << r.already_present
                << '\n';
      return kExitOk;
    }
    if (*stats) return cmd_store_stats(flags);
    if (*serve) return cmd_store_serve(host, port);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
