#include "qcache/zx.hpp"

namespace qcache::zx {
namespace {

class WireBuilder {
 public:
  explicit WireBuilder(int n_qubits) : last_(static_cast<std::size_t>(n_qubits)), pending_(last_.size(), EdgeType::Simple) {
    for (auto& v : last_) v = graph_.add_input();
  }

  VertexId spider(int q, VertexKind kind, Phase phase) {
    const auto w = static_cast<std::size_t>(q);
    const VertexId v = graph_.add_vertex(kind, phase);
    graph_.add_edge(last_[w], v, pending_[w]);
    last_[w] = v;
    pending_[w] = EdgeType::Simple;
    return v;
  }

  void hadamard(int q) {
    auto& p = pending_[static_cast<std::size_t>(q)];
    p = toggle(p);
  }

  void cx(int control, int target) {
    const VertexId c = spider(control, VertexKind::Z, {});
    const VertexId t = spider(target, VertexKind::X, {});
    graph_.add_edge(c, t, EdgeType::Simple);
  }

  void cz(int a, int b) {
    const VertexId u = spider(a, VertexKind::Z, {});
    const VertexId v = spider(b, VertexKind::Z, {});
    graph_.add_edge(u, v, EdgeType::Hadamard);
  }

  ZxGraph finish() && {
    for (std::size_t w = 0; w < last_.size(); ++w) {
      const VertexId out = graph_.add_output();
      graph_.add_edge(last_[w], out, pending_[w]);
    }
    return std::move(graph_);
  }

 private:
  ZxGraph graph_;
  std::vector<VertexId> last_;
  std::vector<EdgeType> pending_;
};

}  // namespace

ZxGraph circuit_to_zx(const Circuit& c) {
  WireBuilder b(c.n_qubits());
  const Phase pi = Phase::pi();
  const Phase half = Phase::half_pi();
  const Phase quarter = Phase::quarter_pi();
  for (const auto& g : c.gates()) {
    const int q = g.qubits[0];
    switch (g.kind) {
      case GateKind::H: b.hadamard(q); break;
      case GateKind::X: b.spider(q, VertexKind::X, pi); break;
      case GateKind::Y:
        b.spider(q, VertexKind::Z, pi);
        b.spider(q, VertexKind::X, pi);
        break;
      case GateKind::Z: b.spider(q, VertexKind::Z, pi); break;
      case GateKind::S: b.spider(q, VertexKind::Z, half); break;
      case GateKind::Sdg: b.spider(q, VertexKind::Z, -half); break;
      case GateKind::T: b.spider(q, VertexKind::Z, quarter); break;
      case GateKind::Tdg: b.spider(q, VertexKind::Z, -quarter); break;
      case GateKind::RX: b.spider(q, VertexKind::X, *g.param); break;
      case GateKind::RY:
        b.spider(q, VertexKind::Z, -half);
        b.spider(q, VertexKind::X, *g.param);
        b.spider(q, VertexKind::Z, half);
        break;
      case GateKind::RZ: b.spider(q, VertexKind::Z, *g.param); break;
      case GateKind::CX: b.cx(q, g.qubits[1]); break;
      case GateKind::CZ: b.cz(q, g.qubits[1]); break;
      case GateKind::RZZ:
        b.cx(q, g.qubits[1]);
        b.spider(g.qubits[1], VertexKind::Z, *g.param);
        b.cx(q, g.qubits[1]);
        break;
      case GateKind::SWAP:
        b.cx(q, g.qubits[1]);
        b.cx(g.qubits[1], q);
        b.cx(q, g.qubits[1]);
        break;
    }
  }
  return std::move(b).finish();
}

}  // namespace qcache::zx
