#include "qcache/qaoa.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <iomanip>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "qcache/prng.hpp"

namespace qcache {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int nearest_index(double x, double hi, int n) {
  if (!(x > 0.0)) return 0;
  if (x >= hi) return n - 1;
  const double step = hi / (n - 1);
  const int below = std::min(n - 2, static_cast<int>(std::floor(x / step)));
  const double lo_pt = hi * below / (n - 1), hi_pt = hi * (below + 1) / (n - 1);
  return (x - lo_pt <= hi_pt - x) ? below : below + 1;
}

// Low qubits are mixed inside cache-sized blocks.
constexpr int kBlockQubits = 12;

}  // namespace

double Grid::beta_point(int i) const { return (std::numbers::pi / 2) * i / (n_beta - 1); }
double Grid::gamma_point(int i) const { return (2 * std::numbers::pi) * i / (n_gamma - 1); }
int Grid::nearest_beta(double beta) const { return nearest_index(beta, std::numbers::pi / 2, n_beta); }
int Grid::nearest_gamma(double gamma) const { return nearest_index(gamma, 2 * std::numbers::pi, n_gamma); }

void Grid::validate() const {
  if (n_beta < 2 || n_gamma < 2) throw std::invalid_argument("grid needs at least two points per axis");
}

std::vector<Phase> snap(std::span<const double> params, const Grid& grid) {
  if (params.size() % 2 != 0) throw std::invalid_argument("snap: expected 2p parameters");
  const std::size_t p = params.size() / 2;
  std::vector<Phase> out;
  out.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!std::isfinite(params[i])) throw std::invalid_argument("snap: non-finite parameter");
    out.push_back(quantize_phase(i < p ? grid.beta_point(grid.nearest_beta(params[i]))
                                       : grid.gamma_point(grid.nearest_gamma(params[i]))));
  }
  return out;
}

void DeConfig::validate() const {
  if (!(F > 0.0 && F <= 2.0)) throw std::invalid_argument("F must lie in (0, 2]");
  if (!(CR >= 0.0 && CR <= 1.0)) throw std::invalid_argument("CR must lie in [0, 1]");
  if (population < 4) throw std::invalid_argument("population must be at least 4");
  if (generations < 0) throw std::invalid_argument("generations must be non-negative");
  if (strategy != "best1bin") throw std::invalid_argument("unsupported strategy '" + strategy + "'");
}

std::vector<double> OptimizationReport::best_sequence() const {
  std::vector<double> out;
  for (const auto& g : generations) out.push_back(g.best_energy);
  return out;
}

MaxCutGraph random_graph(int n, int n_edges, std::uint64_t seed) {
  if (n < 0 || n_edges < 0) throw std::invalid_argument("random_graph: negative size");
  const std::size_t pairs = static_cast<std::size_t>(n) * static_cast<std::size_t>(std::max(n - 1, 0)) / 2;
  if (static_cast<std::size_t>(n_edges) > pairs) {
    throw std::invalid_argument("random_graph: " + std::to_string(n_edges) + " edges do not fit on " +
                                std::to_string(n) + " vertices");
  }
  std::vector<std::pair<int, int>> all;
  all.reserve(pairs);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) all.emplace_back(a, b);
  }
  Xoshiro256 rng(seed);
  for (std::size_t k = 0; k < static_cast<std::size_t>(n_edges); ++k) {
    std::swap(all[k], all[k + rng.below(pairs - k)]);
  }
  all.resize(static_cast<std::size_t>(n_edges));
  return MaxCutGraph::from_edges(n, all);
}

MaxCutEvaluator::MaxCutEvaluator(const MaxCutGraph& graph)
    : n_(graph.n_vertices), n_edges_(static_cast<int>(graph.edges.size())) {
  if (n_ < 1 || n_ > 29) throw std::length_error("MaxCutEvaluator supports 1 to 29 vertices");
  if (n_edges_ > 255) throw std::length_error("MaxCutEvaluator supports at most 255 edges");
  const int m = n_ - 1;
  const std::size_t size = std::size_t{1} << m;
  cut_.assign(size, 0);
  std::vector<std::vector<int>> nbrs(static_cast<std::size_t>(n_));
  for (auto [a, b] : graph.edges) {
    nbrs[b].push_back(a);
    nbrs[a].push_back(b);
  }
  // Setting bit q uncuts the edges at q whose other end is already set and
  // cuts the rest (higher bits, the top qubit included, are still zero).
  for (int q = 0; q < m; ++q) {
    const std::size_t bit = std::size_t{1} << q;
    for (std::size_t z = 0; z < bit; ++z) {
      int delta = 0;
      for (int u : nbrs[q]) delta += (u < q && ((z >> u) & 1)) ? -1 : 1;
      cut_[z | bit] = static_cast<std::uint8_t>(cut_[z] + delta);
    }
  }
}

namespace {

// RX = [[c, -is], [-is, c]] on `count` consecutive amplitude pairs.
inline void rx_run(double* __restrict r0, double* __restrict i0, double* __restrict r1, double* __restrict i1,
                   std::size_t count, double c, double s) {
  for (std::size_t k = 0; k < count; ++k) {
    const double a = r0[k], b = i0[k], x = r1[k], y = i1[k];
    r0[k] = c * a + s * y;
    i0[k] = c * b - s * x;
    r1[k] = c * x + s * b;
    i1[k] = c * y - s * a;
  }
}

}  // namespace

double MaxCutEvaluator::energy(std::span<const Phase> betas, std::span<const Phase> gammas) {
  if (betas.size() != gammas.size() || betas.empty()) {
    throw std::invalid_argument("QAOA needs equal, non-zero numbers of betas and gammas");
  }
  const int m = n_ - 1;
  const std::size_t size = cut_.size();
  re_.resize(size);
  im_.resize(size);
  double* __restrict re = re_.data();
  double* __restrict im = im_.data();
  const std::uint8_t* __restrict cut = cut_.data();
  const int low = std::min(m, kBlockQubits);
  const std::size_t block = std::size_t{1} << low;
  std::vector<double> pr(static_cast<std::size_t>(n_edges_) + 1), pi(pr.size());
  double total = 0.0;

  for (std::size_t l = 0; l < betas.size(); ++l) {
    // Product of RZZ(theta) over the edges: exp(i theta/2 (2 cut - |E|)).
    const double theta = gammas[l].times(2).radians();
    for (int k = 0; k <= n_edges_; ++k) {
      const double a = theta / 2 * (2 * k - n_edges_);
      pr[k] = std::cos(a);
      pi[k] = std::sin(a);
    }
    const double angle = betas[l].times(2).radians();
    const double c = std::cos(angle / 2), s = std::sin(angle / 2);
    const double amp0 = 1.0 / std::sqrt(std::ldexp(1.0, n_));

    for (std::size_t b = 0; b < size; b += block) {
      if (l == 0) {
        for (std::size_t z = b; z < b + block; ++z) {
          re[z] = amp0 * pr[cut[z]];
          im[z] = amp0 * pi[cut[z]];
        }
      } else {
        for (std::size_t z = b; z < b + block; ++z) {
          const double r = re[z], mm = im[z], cr = pr[cut[z]], ci = pi[cut[z]];
          re[z] = r * cr - mm * ci;
          im[z] = r * ci + mm * cr;
        }
      }
      for (int q = 0; q < low; ++q) {
        const std::size_t stride = std::size_t{1} << q;
        for (std::size_t i = b; i < b + block; i += 2 * stride) {
          rx_run(re + i, im + i, re + i + stride, im + i + stride, stride, c, s);
        }
      }
    }

    // Higher qubits, up to three per sweep, in tiles that stay in cache.
    for (int q = low; q < m;) {
      const int g = std::min(3, m - q);
      const std::size_t s0 = std::size_t{1} << q;
      const std::size_t tile = std::min<std::size_t>(s0, 512);
      for (std::size_t hi = 0; hi < size; hi += s0 << g) {
        for (std::size_t t = hi; t < hi + s0; t += tile) {
          for (int k = 0; k < g; ++k) {
            for (int a = 0; a < (1 << g); ++a) {
              if ((a >> k) & 1) continue;
              const std::size_t i = t + static_cast<std::size_t>(a) * s0;
              rx_run(re + i, im + i, re + i + (s0 << k), im + i + (s0 << k), tile, c, s);
            }
          }
        }
      }
      q += g;
    }

    // Top qubit: amplitude of z with the top bit set equals that of its
    // complement, so RX pairs z with z ^ mask inside the kept half.
    const bool last = l + 1 == betas.size();
    const std::size_t mask = size - 1;
    if (mask == 0) {
      const double r0 = re[0], i0 = im[0];
      re[0] = c * r0 + s * i0;
      im[0] = c * i0 - s * r0;
      if (last) total = 2 * (re[0] * re[0] + im[0] * im[0]) * cut[0];
      continue;
    }
    for (std::size_t i = 0; i < size / 2; ++i) {
      const std::size_t j = i ^ mask;
      const double r0 = re[i], i0 = im[i], r1 = re[j], i1 = im[j];
      const double nr0 = c * r0 + s * i1, ni0 = c * i0 - s * r1;
      const double nr1 = c * r1 + s * i0, ni1 = c * i1 - s * r0;
      if (last) {
        total += (nr0 * nr0 + ni0 * ni0) * cut[i] + (nr1 * nr1 + ni1 * ni1) * cut[j];
      } else {
        re[i] = nr0, im[i] = ni0, re[j] = nr1, im[j] = ni1;
      }
    }
  }
  return m == 0 ? total : 2 * total;
}

double round_energy(double e) { return std::ldexp(std::round(std::ldexp(e, 32)), -32); }

OptimizationReport de_optimize(const MaxCutGraph& graph, int p, const Grid& grid, const DeConfig& cfg, Store* store,
                               const QaoaOptions& options) {
  cfg.validate();
  grid.validate();
  if (p < 1) throw std::invalid_argument("p must be at least 1");
  const auto start = Clock::now();
  const std::size_t dims = 2 * static_cast<std::size_t>(p);
  const std::size_t pop = static_cast<std::size_t>(cfg.population);
  const int n_workers = std::max(1, options.workers);

  auto upper = [&](std::size_t d) { return d < static_cast<std::size_t>(p) ? std::numbers::pi / 2 : 2 * std::numbers::pi; };
  auto point = [&](std::size_t d, int index) { return d < static_cast<std::size_t>(p) ? grid.beta_point(index) : grid.gamma_point(index); };
  auto nearest = [&](std::size_t d, double x) { return d < static_cast<std::size_t>(p) ? grid.nearest_beta(x) : grid.nearest_gamma(x); };

  OptimizationReport report;
  GenerationRecord totals;
  std::mutex mu;
  std::vector<std::optional<MaxCutEvaluator>> evaluators(static_cast<std::size_t>(n_workers));

  // Energies of a batch of index vectors, computed by the worker pool.
  auto evaluate = [&](const std::vector<std::vector<int>>& batch) {
    std::vector<double> energies(batch.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    auto worker = [&](int w) {
      GenerationRecord local;
      OptimizationReport timing;
      try {
        auto& evaluator = evaluators[static_cast<std::size_t>(w)];
        for (std::size_t i; (i = next.fetch_add(1)) < batch.size();) {
          std::vector<Phase> betas, gammas;
          for (std::size_t d = 0; d < dims; ++d) {
            (d < static_cast<std::size_t>(p) ? betas : gammas).push_back(quantize_phase(point(d, batch[i][d])));
          }
          ++local.calls;
          std::optional<CacheKey> key;
          std::optional<double> energy;
          if (store) {
            try {
              const Circuit c = build_qaoa_maxcut(graph, betas, gammas);
              key = circuit_key(c, PayloadKind::Compact, kDefaultWlIterations, &timing.pipeline);
              const auto t = Clock::now();
              const auto hit = store->get(*key);
              timing.lookup_time += seconds_since(t);
              if (hit) energy = hit->expectation();
            } catch (const StoreError&) {
              if (options.on_store_error == StoreFailurePolicy::Abort) throw;
              ++timing.store_errors;
              key.reset();
            }
          }
          if (energy) {
            ++local.hits;
          } else {
            ++local.misses;
            if (!evaluator) evaluator.emplace(graph);
            const auto t = Clock::now();
            energy = round_energy(evaluator->energy(betas, gammas));
            timing.simulate_time += seconds_since(t);
            ++timing.simulations;
            if (key) {
              try {
                const auto ts = Clock::now();
                const auto put = store->put_if_absent(CacheEntry::compact(*key, *energy));
                timing.put_time += seconds_since(ts);
                ++(put == PutResult::Inserted ? local.unique_entries : local.extra_simulations);
              } catch (const StoreError&) {
                if (options.on_store_error == StoreFailurePolicy::Abort) throw;
                ++timing.store_errors;
              }
            }
          }
          energies[i] = *energy;
        }
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next = batch.size();
      }
      std::lock_guard lock(mu);
      totals.calls += local.calls;
      totals.hits += local.hits;
      totals.misses += local.misses;
      totals.unique_entries += local.unique_entries;
      totals.extra_simulations += local.extra_simulations;
      report.simulations += timing.simulations;
      report.store_errors += timing.store_errors;
      report.simulate_time += timing.simulate_time;
      report.lookup_time += timing.lookup_time;
      report.put_time += timing.put_time;
      report.pipeline += timing.pipeline;
    };
    if (n_workers == 1) {
      worker(0);
    } else {
      std::vector<std::jthread> pool;
      for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker, w);
    }
    if (failure) std::rethrow_exception(failure);
    return energies;
  };

  Xoshiro256 rng(cfg.seed);
  std::vector<std::vector<int>> population(pop, std::vector<int>(dims));
  for (auto& member : population) {
    for (std::size_t d = 0; d < dims; ++d) member[d] = nearest(d, rng.uniform() * upper(d));
  }
  std::vector<double> fitness = evaluate(population);

  auto best_index = [&] {
    return static_cast<std::size_t>(std::max_element(fitness.begin(), fitness.end(),
                                                     [](double a, double b) { return a < b; }) -
                                    fitness.begin());
  };
  auto record = [&](int generation) {
    GenerationRecord r = totals;
    r.generation = generation;
    r.best_energy = fitness[best_index()];
    report.generations.push_back(r);
  };
  record(0);

  for (int g = 1; g <= cfg.generations; ++g) {
    const std::vector<int> best = population[best_index()];
    std::vector<std::vector<int>> trials(pop);
    for (std::size_t i = 0; i < pop; ++i) {
      std::size_t r1, r2;
      do r1 = rng.below(pop); while (r1 == i);
      do r2 = rng.below(pop); while (r2 == i || r2 == r1);
      const std::size_t forced = rng.below(dims);
      trials[i] = population[i];
      for (std::size_t d = 0; d < dims; ++d) {
        const double u = rng.uniform();
        if (u < cfg.CR || d == forced) {
          const double x = point(d, best[d]) + cfg.F * (point(d, population[r1][d]) - point(d, population[r2][d]));
          trials[i][d] = nearest(d, std::clamp(x, 0.0, upper(d)));
        }
      }
    }
    const auto trial_fitness = evaluate(trials);
    for (std::size_t i = 0; i < pop; ++i) {
      if (trial_fitness[i] >= fitness[i]) {
        population[i] = std::move(trials[i]);
        fitness[i] = trial_fitness[i];
      }
    }
    record(g);
  }

  const auto& winner = population[best_index()];
  for (std::size_t d = 0; d < dims; ++d) report.best_params.push_back(quantize_phase(point(d, winner[d])));
  report.best_energy = fitness[best_index()];
  report.wall_time = seconds_since(start);
  return report;
}

QaoaConfig parse_qaoa_config(const std::string& text) {
  QaoaConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& why) {
    throw std::invalid_argument("config line " + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string token;
    while (tokens >> token) {
      const auto eq = token.find('=');
      if (eq == std::string::npos || eq == 0) fail("expected key=value, got '" + token + "'");
      const std::string key = token.substr(0, eq), value = token.substr(eq + 1);
      auto number = [&](auto& out) {
        std::istringstream v(value);
        if (!(v >> out) || !v.eof()) fail("bad value for " + key + ": '" + value + "'");
      };
      if (key == "vertices") number(cfg.vertices);
      else if (key == "edges") number(cfg.edges);
      else if (key == "graph_seed") number(cfg.graph_seed);
      else if (key == "p") number(cfg.p);
      else if (key == "n_beta") number(cfg.grid.n_beta);
      else if (key == "n_gamma") number(cfg.grid.n_gamma);
      else if (key == "population") number(cfg.de.population);
      else if (key == "generations") number(cfg.de.generations);
      else if (key == "F") number(cfg.de.F);
      else if (key == "CR") number(cfg.de.CR);
      else if (key == "seed") number(cfg.de.seed);
      else if (key == "workers") number(cfg.workers);
      else if (key == "strategy") cfg.de.strategy = value;
      else if (key == "grid") {
        if (value == "coarse") cfg.grid = Grid::coarse();
        else if (value == "medium") cfg.grid = Grid::medium();
        else if (value == "fine") cfg.grid = Grid::fine();
        else fail("grid must be coarse, medium or fine");
      } else {
        fail("unknown key '" + key + "'");
      }
    }
  }
  cfg.de.validate();
  cfg.grid.validate();
  if (cfg.p < 1) fail("p must be at least 1");
  if (cfg.workers < 1) fail("workers must be positive");
  return cfg;
}

std::string to_text(const QaoaConfig& cfg) {
  std::ostringstream out;
  out << "vertices=" << cfg.vertices << " edges=" << cfg.edges << " graph_seed=" << cfg.graph_seed << " p=" << cfg.p
      << " n_beta=" << cfg.grid.n_beta << " n_gamma=" << cfg.grid.n_gamma << " population=" << cfg.de.population
      << " generations=" << cfg.de.generations << " F=" << cfg.de.F << " CR=" << cfg.de.CR << " seed=" << cfg.de.seed
      << " strategy=" << cfg.de.strategy << " workers=" << cfg.workers;
  return out.str();
}

std::string qaoa_csv(const OptimizationReport& report) {
  std::ostringstream out;
  out << "generation,best_energy,calls,hits,unique_entries\n" << std::setprecision(17);
  for (const auto& g : report.generations) {
    out << g.generation << ',' << g.best_energy << ',' << g.calls << ',' << g.hits << ',' << g.unique_entries << '\n';
  }
  return out.str();
}

}  // namespace qcache
