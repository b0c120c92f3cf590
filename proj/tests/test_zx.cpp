#include <map>
#include <numbers>
#include <string>

#include "doctest.h"
#include "qcache/linalg.hpp"
#include "qcache/sim.hpp"
#include "qcache/zx.hpp"
#include "test_support.hpp"

using namespace qcache;
using namespace qcache::zx;

namespace {

constexpr double kTol = 1e-9;

bool same_map(const ZxGraph& a, const ZxGraph& b) {
  return equal_up_to_scalar(zx_to_tensor(a), zx_to_tensor(b), kTol);
}

ZxGraph random_case(Xoshiro256& rng, bool graph_like) {
  const int n_in = 1 + static_cast<int>(rng.below(3));
  const int n_out = 1 + static_cast<int>(rng.below(3));
  const int spiders = 2 + static_cast<int>(rng.below(9));
  return testing::random_nonzero_diagram(rng, n_in, n_out, spiders, 0.25 + 0.3 * rng.uniform(), graph_like);
}

}  // namespace

TEST_CASE("tensor of basic diagrams") {
  ZxGraph wire;
  const auto i = wire.add_input();
  const auto o = wire.add_output();
  wire.connect(i, o, EdgeType::Simple);
  CHECK(equal_up_to_scalar(zx_to_tensor(wire), Eigen::MatrixXcd::Identity(2, 2), 1e-12));

  ZxGraph had = wire;
  had.set_edge_type(i, o, EdgeType::Hadamard);
  Eigen::MatrixXcd h(2, 2);
  h << 1, 1, 1, -1;
  CHECK(equal_up_to_scalar(zx_to_tensor(had), h, 1e-12));

  ZxGraph t;
  const auto ti = t.add_input();
  const auto s = t.add_vertex(VertexKind::Z, Phase(1, 4));
  const auto to = t.add_output();
  t.connect(ti, s, EdgeType::Simple);
  t.connect(s, to, EdgeType::Simple);
  Eigen::MatrixXcd tm = Eigen::MatrixXcd::Zero(2, 2);
  tm(0, 0) = 1;
  tm(1, 1) = std::polar(1.0, std::numbers::pi / 4);
  CHECK(equal_up_to_scalar(zx_to_tensor(t), tm, 1e-12));

  t.set_kind(s, VertexKind::X);
  t.set_phase(s, Phase::pi());
  Eigen::MatrixXcd x(2, 2);
  x << 0, 1, 1, 0;
  CHECK(equal_up_to_scalar(zx_to_tensor(t), x, 1e-12));
}

TEST_CASE("tensor bounds are enforced") {
  ZxGraph g;
  for (int i = 0; i < 13; ++i) {
    const auto in = g.add_input();
    const auto out = g.add_output();
    g.connect(in, out, EdgeType::Simple);
  }
  CHECK_THROWS_AS(zx_to_tensor(g), std::length_error);
}

TEST_CASE("connect resolves parallel edges and self-loops") {
  ZxGraph g;
  const auto a = g.add_vertex(VertexKind::Z);
  const auto b = g.add_vertex(VertexKind::Z);
  g.connect(a, b, EdgeType::Hadamard);
  g.connect(a, b, EdgeType::Hadamard);  // Hopf
  CHECK_FALSE(g.connected(a, b));
  g.connect(a, b, EdgeType::Simple);
  g.connect(a, b, EdgeType::Hadamard);
  CHECK(g.edge_type(a, b) == EdgeType::Simple);
  CHECK(g.phase(a) == Phase::pi());
  g.connect(b, b, EdgeType::Hadamard);
  CHECK(g.phase(b) == Phase::pi());
  g.connect(b, b, EdgeType::Simple);
  CHECK(g.phase(b) == Phase::pi());
  const auto in = g.add_input();
  g.connect(in, a, EdgeType::Simple);
  CHECK_THROWS_AS(g.connect(in, b, EdgeType::Simple), std::logic_error);
  CHECK_NOTHROW(g.check_invariants());
}

TEST_CASE("connect matches the tensor of an explicit parallel-edge contraction") {
  Xoshiro256 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    ZxGraph g = testing::random_nonzero_diagram(rng, 1, 1, 3, 0.5);
    ZxGraph twice = g;
    const auto spiders = std::vector<VertexId>{1, 2, 3};
    const auto u = spiders[rng.below(3)];
    auto v = spiders[rng.below(3)];
    const auto t = rng.uniform() < 0.5 ? EdgeType::Simple : EdgeType::Hadamard;
    // Splitting an edge with a phase-free spider of the same colour as u gives
    // a genuine parallel path; connect must agree with it.
    const auto mid = g.add_vertex(g.kind(u));
    g.connect(u, mid, EdgeType::Simple);
    g.connect(mid, v, t);
    twice.connect(u, v, t);
    CHECK(same_map(g, twice));
  }
}

TEST_CASE("translation of single gates matches the simulator") {
  for (int k = 0; k <= static_cast<int>(GateKind::SWAP); ++k) {
    const auto kind = static_cast<GateKind>(k);
    Circuit c(2);
    const auto param = gate_is_parametric(kind) ? std::optional<Phase>(Phase(3, 8)) : std::nullopt;
    if (gate_arity(kind) == 1) {
      c.add(kind, {1}, param);
    } else {
      c.add(kind, {1, 0}, param);
    }
    INFO(gate_name(kind));
    CHECK(equal_up_to_scalar(zx_to_tensor(circuit_to_zx(c)), circuit_unitary(c), kTol));
  }
}

TEST_CASE("CX translation layout") {
  Circuit c(2);
  c.add(GateKind::CX, {0, 1});
  const ZxGraph g = circuit_to_zx(c);
  CHECK(g.inputs() == std::vector<VertexId>{0, 1});
  CHECK(g.num_spiders() == 2);
  CHECK(g.kind(2) == VertexKind::Z);
  CHECK(g.kind(3) == VertexKind::X);
  CHECK(g.edge_type(2, 3) == EdgeType::Simple);
  Eigen::MatrixXcd cx = Eigen::MatrixXcd::Zero(4, 4);
  cx(0, 0) = cx(2, 2) = cx(3, 1) = cx(1, 3) = 1;
  CHECK(equal_up_to_scalar(zx_to_tensor(g), cx, 1e-12));
}

TEST_CASE("translation of random circuits matches the simulator") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Circuit c = build_random(3, 4, seed);
    CHECK(equal_up_to_scalar(zx_to_tensor(circuit_to_zx(c)), circuit_unitary(c), kTol));
  }
}

TEST_CASE("to_graph_like preserves the map") {
  Xoshiro256 rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    const ZxGraph g = random_case(rng, false);
    const ZxGraph gl = to_graph_like(g);
    CHECK(is_graph_like(gl));
    CHECK(same_map(g, gl));
  }
}

TEST_CASE("each rule preserves the map on random diagrams") {
  Xoshiro256 rng(2024);
  std::map<std::string, int> fired;
  for (int trial = 0; trial < 300; ++trial) {
    const ZxGraph start = random_case(rng, trial % 2 == 0);
    const auto before = zx_to_tensor(start);

    for (const auto& [v, vert] : start.vertices()) {
      if (vert.kind != VertexKind::X) continue;
      ZxGraph g = start;
      rules::color_change(g, v);
      CHECK(equal_up_to_scalar(zx_to_tensor(g), before, kTol));
      ++fired["color_change"];
      break;
    }
    if (auto m = rules::match_fusion(start)) {
      ZxGraph g = start;
      rules::fuse(g, m->first, m->second);
      CHECK(equal_up_to_scalar(zx_to_tensor(g), before, kTol));
      ++fired["fusion"];
    }

    const ZxGraph gl = to_graph_like(start);
    if (auto m = rules::match_identity(gl)) {
      ZxGraph g = gl;
      rules::remove_identity(g, *m);
      CHECK(equal_up_to_scalar(zx_to_tensor(g), before, kTol));
      ++fired["identity"];
    }
    if (auto m = rules::match_local_complement(gl)) {
      ZxGraph g = gl;
      rules::local_complement(g, *m);
      CHECK(equal_up_to_scalar(zx_to_tensor(g), before, kTol));
      ++fired["local_complement"];
    }
    if (auto m = rules::match_pivot(gl)) {
      ZxGraph g = gl;
      rules::pivot(g, m->first, m->second);
      CHECK(equal_up_to_scalar(zx_to_tensor(g), before, kTol));
      ++fired["pivot"];
    }
    if (auto m = rules::match_pivot_gadget(gl)) {
      ZxGraph g = gl;
      rules::pivot_gadget(g, m->first, m->second);
      CHECK(equal_up_to_scalar(zx_to_tensor(g), before, kTol));
      ++fired["pivot_gadget"];
    }
    if (auto m = rules::match_gadget_fusion(gl)) {
      ZxGraph g = gl;
      rules::fuse_gadgets(g, m->first, m->second);
      CHECK(equal_up_to_scalar(zx_to_tensor(g), before, kTol));
      ++fired["gadget_fusion"];
    }
  }
  for (const char* rule : {"color_change", "fusion", "identity", "local_complement", "pivot", "pivot_gadget"}) {
    INFO(rule);
    CHECK(fired[rule] > 0);
  }
}

TEST_CASE("full_reduce steps preserve the map and strictly decrease the measure") {
  Xoshiro256 rng(77);
  std::map<std::string, int> fired;
  int diagrams = 0;
  auto run = [&](const ZxGraph& start) {
    const auto before = zx_to_tensor(start);
    ReductionMeasure last = reduction_measure(start);
    bool sound = true, decreasing = true;
    const ZxGraph out = full_reduce(start, [&](const RewriteStep& step) {
      ++fired[std::string(step.rule)];
      if (step.rule == "scalar_removal") return;
      const auto m = reduction_measure(step.after);
      decreasing &= m < last;
      last = m;
      sound &= equal_up_to_scalar(zx_to_tensor(step.after), before, kTol);
    });
    CHECK(sound);
    CHECK(decreasing);
    CHECK(equal_up_to_scalar(zx_to_tensor(out), before, kTol));
    CHECK(is_graph_like(out));
    CHECK_NOTHROW(out.check_invariants());
    ++diagrams;
  };
  for (int trial = 0; trial < 200; ++trial) run(random_case(rng, trial % 3 == 0));
  for (std::uint64_t seed = 0; seed < 100; ++seed) run(circuit_to_zx(testing::random_clifford_t(3, 14, seed)));
  for (std::uint64_t seed = 0; seed < 50; ++seed) run(circuit_to_zx(build_random(4, 4, seed)));
  CHECK(diagrams == 350);
  for (const char* rule : {"color_change", "fusion", "identity", "local_complement", "pivot", "pivot_gadget",
                           "gadget_fusion"}) {
    INFO(rule);
    CHECK(fired[rule] > 0);
  }
}

TEST_CASE("full_reduce is idempotent and deterministic") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const ZxGraph g = circuit_to_zx(build_random(4, 5, seed));
    const ZxGraph once = full_reduce(g);
    CHECK(full_reduce(once) == once);
    CHECK(dump(full_reduce(g)) == dump(once));
  }
}

TEST_CASE("equivalent gate sequences reduce to the same diagram") {
  Circuit ss(1), z(1);
  ss.add(GateKind::S, {0}).add(GateKind::S, {0});
  z.add(GateKind::Z, {0});
  const ZxGraph rss = full_reduce(circuit_to_zx(ss));
  const ZxGraph rz = full_reduce(circuit_to_zx(z));
  CHECK(rss.num_spiders() == 1);
  CHECK(rz.num_spiders() == 1);
  CHECK(equal_up_to_scalar(zx_to_tensor(rss), zx_to_tensor(rz), 1e-12));
  for (const auto* r : {&rss, &rz}) {
    const auto v = r->neighbors(r->inputs()[0]).begin()->first;
    CHECK(r->phase(v) == Phase::pi());
    CHECK(r->neighbors(v).contains(r->outputs()[0]));
  }

  Circuit cxcx(2);
  cxcx.add(GateKind::CX, {0, 1}).add(GateKind::CX, {0, 1});
  const ZxGraph r = full_reduce(circuit_to_zx(cxcx));
  CHECK(r.num_spiders() == 0);
  CHECK(r.edge_type(r.inputs()[0], r.outputs()[0]) == EdgeType::Simple);
  CHECK(r.edge_type(r.inputs()[1], r.outputs()[1]) == EdgeType::Simple);
  CHECK(r.num_edges() == 2);
}

TEST_CASE("dump format") {
  Circuit c(1);
  c.add(GateKind::T, {0});
  const std::string d = dump(circuit_to_zx(c));
  CHECK(d == "inputs 0\noutputs 2\nv 0 B 0/1\nv 1 Z 1/4\nv 2 B 0/1\ne 0 1 S\ne 1 2 S\n");
}
