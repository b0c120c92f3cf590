#include <cmath>
#include <numbers>
#include <set>

#include "doctest.h"
#include "qcache/embedded_store.hpp"
#include "qcache/net_store.hpp"
#include "qcache/qaoa.hpp"
#include "qcache/sim.hpp"
#include "test_support.hpp"

using namespace qcache;

namespace {

// Failing backend for the degrade policy.
class BrokenStore final : public Store {
 public:
  std::vector<CacheEntry> entries() override { return {}; }
  std::string describe() const override { return "broken"; }

 protected:
  std::optional<CacheEntry> lookup(const CacheKey&) override {
    throw StoreError(StoreError::Kind::ConnectionRefused, "down");
  }
  PutResult insert(const CacheEntry&) override { throw StoreError(StoreError::Kind::ConnectionRefused, "down"); }
};

std::string temp_dir() {
  std::string pattern = (std::filesystem::temp_directory_path() / "qcache-qaoa-XXXXXX").string();
  return mkdtemp(pattern.data());
}

}  // namespace

TEST_CASE("grid points and snapping") {
  const Grid g = Grid::coarse();
  CHECK(g.beta_point(0) == 0.0);
  CHECK(g.beta_point(15) == doctest::Approx(std::numbers::pi / 2));
  CHECK(g.gamma_point(31) == doctest::Approx(2 * std::numbers::pi));
  for (int i = 1; i < g.n_gamma; ++i) CHECK(g.gamma_point(i) > g.gamma_point(i - 1));

  const std::vector<double> small = {0.01, 0.01};
  CHECK(snap(small, g) == std::vector<Phase>{Phase(), Phase()});
  // Exact grid points are fixed points.
  for (int i = 0; i < g.n_beta; ++i) {
    for (int j = 0; j < g.n_gamma; j += 5) {
      const std::vector<double> x = {g.beta_point(i), g.gamma_point(j)};
      CHECK(snap(x, g) == std::vector<Phase>{quantize_phase(x[0]), quantize_phase(x[1])});
    }
  }
  // Ties go to the lower point.
  const double mid = (g.beta_point(3) + g.beta_point(4)) / 2;
  CHECK(g.nearest_beta(mid) == 3);
  CHECK(g.nearest_beta(-1.0) == 0);
  CHECK(g.nearest_gamma(100.0) == g.n_gamma - 1);
  const std::vector<double> bad = {NAN, 0.0};
  CHECK_THROWS_AS(snap(bad, g), std::invalid_argument);

  // At most n_beta^p * n_gamma^p distinct snapped vectors.
  const Grid tiny{3, 4};
  Xoshiro256 rng(5);
  std::set<std::vector<Phase>> seen;
  for (int i = 0; i < 5000; ++i) {
    const std::vector<double> x = {rng.uniform() * 3, rng.uniform() * 3, rng.uniform() * 7, rng.uniform() * 7};
    seen.insert(snap(x, tiny));
  }
  CHECK(seen.size() <= 3 * 3 * 4 * 4);
  // gamma = 2pi and gamma = 0 quantize to the same phase.
  CHECK(seen.size() == 3 * 3 * 3 * 3);
}

TEST_CASE("config validation") {
  DeConfig c;
  CHECK_NOTHROW(c.validate());
  c.F = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.F = 2.0;
  CHECK_NOTHROW(c.validate());
  c.CR = 1.5;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.population = 3;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.strategy = "rand1bin";
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("random graphs") {
  const auto g = random_graph(24, 60, 42);
  CHECK(g.n_vertices == 24);
  CHECK(g.edges.size() == 60);
  CHECK(random_graph(24, 60, 42).edges == g.edges);
  CHECK(random_graph(24, 60, 43).edges != g.edges);
  const auto tri = random_graph(3, 3, 1234);
  CHECK(tri.edges == std::set<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 2}});
  CHECK_THROWS_AS(random_graph(3, 4, 0), std::invalid_argument);
  CHECK(random_graph(5, 0, 0).edges.empty());
}

TEST_CASE("fast evaluator matches the statevector simulator") {
  Xoshiro256 rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(12));
    const int max_edges = n * (n - 1) / 2;
    const auto g = random_graph(n, static_cast<int>(rng.below(static_cast<std::uint64_t>(max_edges) + 1)), trial);
    const int p = 1 + static_cast<int>(rng.below(3));
    std::vector<Phase> betas, gammas;
    for (int l = 0; l < p; ++l) {
      betas.push_back(quantize_phase(rng.uniform() * std::numbers::pi));
      gammas.push_back(quantize_phase(rng.uniform() * 2 * std::numbers::pi));
    }
    MaxCutEvaluator ev(g);
    const double fast = ev.energy(betas, gammas);
    const double slow = maxcut_energy(simulate(build_qaoa_maxcut(g, betas, gammas)), g);
    CHECK(std::abs(fast - slow) < 1e-10);
    CHECK(fast >= -1e-12);
    CHECK(fast <= static_cast<double>(g.edges.size()) + 1e-12);
    CHECK(ev.energy(betas, gammas) == fast);  // reusable and deterministic
  }
  // Above the blocking size.
  const auto g = random_graph(16, 30, 3);
  const std::vector<Phase> b = {Phase(1, 8), Phase(3, 16)}, c = {Phase(5, 8), Phase(-1, 4)};
  MaxCutEvaluator ev(g);
  CHECK(std::abs(ev.energy(b, c) - maxcut_energy(simulate(build_qaoa_maxcut(g, b, c)), g)) < 1e-10);
}

TEST_CASE("energy rounding") {
  CHECK(round_energy(1.0) == 1.0);
  CHECK(round_energy(0.1) == std::ldexp(std::round(std::ldexp(0.1, 32)), -32));
  CHECK(round_energy(3.0 + 1e-13) == 3.0);
}

TEST_CASE("DE trajectory is independent of caching and backend") {
  const auto graph = random_graph(10, 20, 42);
  DeConfig cfg;
  cfg.population = 12;
  cfg.generations = 8;
  cfg.seed = 100;
  const Grid grid = Grid::coarse();

  const auto plain = de_optimize(graph, 2, grid, cfg, nullptr);
  REQUIRE(plain.generations.size() == 9);
  CHECK(plain.generations.back().calls == 12u * 9u);
  CHECK(plain.generations.back().hits == 0);
  CHECK(plain.simulations == 12u * 9u);
  for (std::size_t g = 1; g < plain.generations.size(); ++g) {
    CHECK(plain.generations[g].best_energy >= plain.generations[g - 1].best_energy);
  }
  CHECK(plain.best_energy >= 0.0);
  CHECK(plain.best_energy <= 20.0);
  CHECK(plain.best_energy == plain.generations.back().best_energy);

  MemoryStore memory;
  const auto cached = de_optimize(graph, 2, grid, cfg, &memory);
  CHECK(cached.best_sequence() == plain.best_sequence());
  CHECK(cached.best_params == plain.best_params);

  const auto dir = temp_dir();
  {
    EmbeddedStore embedded(dir);
    const auto r = de_optimize(graph, 2, grid, cfg, &embedded);
    CHECK(r.best_sequence() == plain.best_sequence());
  }
  StoreServer server(Endpoint{});
  NetworkedStore net(Endpoint{"127.0.0.1", server.port()});
  QaoaOptions opts;
  opts.workers = 3;
  const auto parallel = de_optimize(graph, 2, grid, cfg, &net, opts);
  CHECK(parallel.best_sequence() == plain.best_sequence());
  std::filesystem::remove_all(dir);

  // Accounting and monotone hits.
  for (const auto* r : {&cached, &parallel}) {
    std::uint64_t prev = 0;
    for (const auto& g : r->generations) {
      CHECK(g.hits >= prev);
      prev = g.hits;
      CHECK(g.calls == g.hits + g.misses);
      CHECK(g.misses == g.unique_entries + g.extra_simulations);
    }
    CHECK(r->generations.back().hits > 0);
  }
  CHECK(cached.generations.back().unique_entries == memory.size());
  CHECK(cached.generations.back().extra_simulations == 0);
  CHECK(cached.generations.back().unique_entries <= 16u * 16u * 32u * 32u);

  // A warm store answers every call.
  const auto warm = de_optimize(graph, 2, grid, cfg, &memory);
  CHECK(warm.best_sequence() == plain.best_sequence());
  CHECK(warm.simulations == 0);
}

TEST_CASE("store failures abort or degrade") {
  const auto graph = random_graph(6, 8, 1);
  DeConfig cfg;
  cfg.population = 6;
  cfg.generations = 2;
  BrokenStore broken;
  CHECK_THROWS_AS(de_optimize(graph, 1, Grid::coarse(), cfg, &broken), StoreError);
  QaoaOptions opts;
  opts.on_store_error = StoreFailurePolicy::Degrade;
  const auto r = de_optimize(graph, 1, Grid::coarse(), cfg, &broken, opts);
  CHECK(r.store_errors == 18);
  CHECK(r.simulations == 18);
  CHECK(r.best_sequence() == de_optimize(graph, 1, Grid::coarse(), cfg, nullptr).best_sequence());
}

TEST_CASE("config files") {
  const auto cfg = parse_qaoa_config("# desk\nvertices=12 edges=20\ngrid=medium p=1\npopulation=8 generations=3 F=0.5\n");
  CHECK(cfg.vertices == 12);
  CHECK(cfg.edges == 20);
  CHECK(cfg.grid.n_beta == 32);
  CHECK(cfg.p == 1);
  CHECK(cfg.de.F == 0.5);
  CHECK(cfg.de.seed == 100);
  const auto again = parse_qaoa_config(to_text(cfg));
  CHECK(to_text(again) == to_text(cfg));
  CHECK_THROWS_WITH_AS(parse_qaoa_config("p=2\nfoo=1\n"), "config line 2: unknown key 'foo'", std::invalid_argument);
  CHECK_THROWS_AS(parse_qaoa_config("population=x"), std::invalid_argument);
  CHECK_THROWS_AS(parse_qaoa_config("CR=2"), std::invalid_argument);

  OptimizationReport r;
  r.generations.push_back({0, 1.5, 10, 2, 8, 8, 0});
  CHECK(qaoa_csv(r) == "generation,best_energy,calls,hits,unique_entries\n0,1.5,10,2,8\n");
}
