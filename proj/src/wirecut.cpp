#include "qcache/wirecut.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <iomanip>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "qcache/circuit_io.hpp"
#include "qcache/prng.hpp"

namespace qcache {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Request {
  FragmentRole role;
  std::size_t variant;
};

// Rank r of every variant before rank r+1 of any, upstream before downstream.
std::vector<Request> schedule(const Enumeration& e) {
  std::size_t max_rank = 0;
  for (const auto& v : e.upstream) max_rank = std::max(max_rank, v.terms.size());
  for (const auto& v : e.downstream) max_rank = std::max(max_rank, v.terms.size());
  std::vector<Request> out;
  out.reserve(e.instance_count());
  for (std::size_t r = 0; r < max_rank; ++r) {
    for (std::size_t i = 0; i < e.upstream.size(); ++i) {
      if (r < e.upstream[i].terms.size()) out.push_back({FragmentRole::Upstream, i});
    }
    for (std::size_t i = 0; i < e.downstream.size(); ++i) {
      if (r < e.downstream[i].terms.size()) out.push_back({FragmentRole::Downstream, i});
    }
  }
  return out;
}

}  // namespace

WirecutReport run_wirecut(const Circuit& c, std::span<const CutSpec> cuts, const PauliString& observable,
                          Store* store, const WirecutOptions& options) {
  const auto start = Clock::now();
  const Decomposition d = cut_wires(c, cuts);
  const Enumeration e = enumerate_subcircuits(d);
  const auto requests = schedule(e);

  WirecutReport report;
  report.terms = d.terms.size();
  report.instances = requests.size();
  report.distinct_circuits = e.distinct_count();

  std::vector<std::optional<Statevector>> up(e.upstream.size()), down(e.downstream.size());
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;

  auto worker = [&] {
    WirecutReport local;
    try {
      for (std::size_t i; (i = next.fetch_add(1)) < requests.size();) {
        const Request& req = requests[i];
        const bool is_up = req.role == FragmentRole::Upstream;
        const Circuit& circuit = (is_up ? e.upstream : e.downstream)[req.variant].circuit;
        Statevector sv;
        if (store == nullptr) {
          auto t = Clock::now();
          sv = simulate(circuit);
          local.simulate_time += seconds_since(t);
          ++local.misses;
          ++local.simulations;
        } else {
          const CacheKey key = circuit_key(circuit, PayloadKind::Full, kDefaultWlIterations, &local.pipeline);
          auto t = Clock::now();
          auto hit = store->get(key);
          local.lookup_time += seconds_since(t);
          if (hit) {
            ++local.hits;
            sv = hit->statevector();
          } else {
            ++local.misses;
            t = Clock::now();
            sv = simulate(circuit);
            local.simulate_time += seconds_since(t);
            ++local.simulations;
            t = Clock::now();
            const auto put = store->put_if_absent(CacheEntry::full(key, sv));
            local.put_time += seconds_since(t);
            ++(put == PutResult::Inserted ? local.unique : local.extra);
          }
        }
        std::lock_guard lock(mu);
        auto& slot = (is_up ? up : down)[req.variant];
        if (!slot) slot = std::move(sv);
      }
    } catch (...) {
      std::lock_guard lock(mu);
      if (!failure) failure = std::current_exception();
      next = requests.size();
    }
    std::lock_guard lock(mu);
    report.hits += local.hits;
    report.misses += local.misses;
    report.unique += local.unique;
    report.extra += local.extra;
    report.simulations += local.simulations;
    report.simulate_time += local.simulate_time;
    report.lookup_time += local.lookup_time;
    report.put_time += local.put_time;
    report.pipeline += local.pipeline;
  };

  const int n_workers = std::max(1, options.workers);
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<Statevector> up_states, down_states;
  for (auto& s : up) up_states.push_back(std::move(*s));
  for (auto& s : down) down_states.push_back(std::move(*s));
  const auto results = fragment_expectations(d, e, observable, up_states, down_states);
  report.reconstructed = reconstruct_expectation(d, results);
  report.wall_time = seconds_since(start);
  if (options.check_direct && c.n_qubits() <= kMaxSimQubits) {
    report.direct = expectation_pauli(simulate(c), observable);
  }
  return report;
}

WirecutManifest parse_manifest(const std::string& text) {
  WirecutManifest m;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool saw_observable = false;
  auto fail = [&](const std::string& why) {
    throw std::invalid_argument("manifest line " + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string word;
    if (!(fields >> word)) continue;
    auto integer = [&](auto& out) {
      if (!(fields >> out)) fail("expected an integer after '" + word + "'");
    };
    if (word == "family") {
      if (!(fields >> m.family) || (m.family != "hea" && m.family != "random" && m.family != "file")) {
        fail("family must be hea, random or file");
      }
    } else if (word == "qubits") {
      integer(m.qubits);
    } else if (word == "layers") {
      integer(m.layers);
    } else if (word == "depth") {
      integer(m.depth);
    } else if (word == "seed") {
      integer(m.seed);
    } else if (word == "workers") {
      integer(m.workers);
      if (m.workers < 1) fail("workers must be positive");
    } else if (word == "repeat") {
      integer(m.repeat);
      if (m.repeat < 1) fail("repeat must be positive");
    } else if (word == "circuit") {
      if (!(fields >> m.circuit_path)) fail("expected a path");
    } else if (word == "cut") {
      CutSpec cut;
      long long q = -1, pos = -1;
      if (!(fields >> q >> pos) || q < 0 || pos < 0) fail("expected 'cut <qubit> <gate index>'");
      cut.qubit = static_cast<int>(q);
      cut.position = static_cast<std::size_t>(pos);
      m.cuts.push_back(cut);
    } else if (word == "observable") {
      std::string rest;
      std::getline(fields, rest);
      try {
        m.observable = parse_pauli_string(rest);
      } catch (const std::exception& ex) {
        fail(ex.what());
      }
      saw_observable = true;
    } else {
      fail("unknown directive '" + word + "'");
    }
    std::string extra;
    if (word != "observable" && (fields >> extra)) fail("unexpected '" + extra + "'");
  }
  if (m.cuts.empty()) {
    line_no = 0;
    fail("no cut given");
  }
  if (!saw_observable) m.observable = {{0, Pauli::Z}};
  return m;
}

Circuit seeded_hea(int n_qubits, int layers, std::uint64_t seed) {
  Xoshiro256 rng(seed);
  std::vector<Phase> params(static_cast<std::size_t>(n_qubits) * static_cast<std::size_t>(layers));
  for (auto& p : params) p = quantize_phase(rng.uniform() * 2.0 * std::numbers::pi);
  return build_hea(n_qubits, layers, params);
}

Circuit manifest_circuit(const WirecutManifest& m, const std::string& base_dir) {
  if (m.family == "hea") return seeded_hea(m.qubits, m.layers, m.seed);
  if (m.family == "random") return build_random(m.qubits, m.depth, m.seed);
  if (m.circuit_path.empty()) throw std::invalid_argument("family 'file' needs a circuit path");
  std::filesystem::path p(m.circuit_path);
  if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
  return load_circuit(p);
}

WirecutManifest desk_manifest() {
  WirecutManifest m;
  m.family = "hea";
  m.qubits = 8;
  m.layers = 1;
  m.seed = 1;
  // Gates 0-7 are the RYs, 8.. the CX ladder: gate 10 is CX(2,3).
  m.cuts = {{3, 10}, {4, 4}};
  m.observable = {{0, Pauli::Z}, {7, Pauli::Z}};
  m.workers = 1;
  return m;
}

std::string wirecut_csv_header() {
  return "run,backend,workers,terms,instances,distinct,hits,misses,unique,extra,hit_rate,wall_time,reconstructed";
}

std::string wirecut_csv_row(const std::string& run, const std::string& backend, int workers, const WirecutReport& r) {
  std::ostringstream out;
  out << run << ',' << backend << ',' << workers << ',' << r.terms << ',' << r.instances << ','
      << r.distinct_circuits << ',' << r.hits << ',' << r.misses << ',' << r.unique << ',' << r.extra << ','
      << std::fixed << std::setprecision(4) << r.hit_rate() << ',' << std::setprecision(6) << r.wall_time << ','
      << std::setprecision(12) << r.reconstructed;
  return out.str();
}

}  // namespace qcache
