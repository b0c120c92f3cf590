#include "qcache/sim.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qcache {
namespace {

using cplx = std::complex<double>;
constexpr cplx kI{0.0, 1.0};

Eigen::Matrix2cd one_qubit_matrix(const Gate& g) {
  Eigen::Matrix2cd m;
  const double r = 1.0 / std::numbers::sqrt2;
  switch (g.kind) {
    case GateKind::H: m << r, r, r, -r; break;
    case GateKind::X: m << 0, 1, 1, 0; break;
    case GateKind::Y: m << 0, -kI, kI, 0; break;
    case GateKind::Z: m << 1, 0, 0, -1; break;
    case GateKind::S: m << 1, 0, 0, kI; break;
    case GateKind::Sdg: m << 1, 0, 0, -kI; break;
    case GateKind::T: m << 1, 0, 0, std::polar(1.0, std::numbers::pi / 4); break;
    case GateKind::Tdg: m << 1, 0, 0, std::polar(1.0, -std::numbers::pi / 4); break;
    case GateKind::RX: {
      const double t = g.param->radians() / 2;
      m << std::cos(t), -kI * std::sin(t), -kI * std::sin(t), std::cos(t);
      break;
    }
    case GateKind::RY: {
      const double t = g.param->radians() / 2;
      m << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
      break;
    }
    case GateKind::RZ: {
      const double t = g.param->radians() / 2;
      m << std::polar(1.0, -t), 0, 0, std::polar(1.0, t);
      break;
    }
    default: throw std::logic_error("not a single-qubit gate");
  }
  return m;
}

Eigen::Matrix4cd two_qubit_matrix(const Gate& g) {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  switch (g.kind) {
    case GateKind::CX:
      // Control is qubits[0] (bit 0 of the local index).
      m(0, 0) = m(2, 2) = 1;
      m(3, 1) = m(1, 3) = 1;
      break;
    case GateKind::CZ:
      m.diagonal() << 1, 1, 1, -1;
      break;
    case GateKind::RZZ: {
      const double t = g.param->radians() / 2;
      m.diagonal() << std::polar(1.0, -t), std::polar(1.0, t), std::polar(1.0, t), std::polar(1.0, -t);
      break;
    }
    case GateKind::SWAP:
      m(0, 0) = m(3, 3) = 1;
      m(1, 2) = m(2, 1) = 1;
      break;
    default: throw std::logic_error("not a two-qubit gate");
  }
  return m;
}

}  // namespace

Statevector Statevector::zero(int n_qubits) {
  Statevector sv;
  sv.n_qubits = n_qubits;
  sv.amplitudes = AmplitudeVector<double>::Zero(Eigen::Index{1} << n_qubits);
  sv.amplitudes[0] = 1.0;
  return sv;
}

Eigen::MatrixXcd gate_matrix(const Gate& gate) {
  if (gate_arity(gate.kind) == 1) return one_qubit_matrix(gate);
  return two_qubit_matrix(gate);
}

void apply_gate(Statevector& sv, const Gate& gate) {
  if (gate_arity(gate.kind) == 1) {
    apply_1q<double>(sv.amplitudes, gate.qubits[0], one_qubit_matrix(gate));
  } else {
    apply_2q<double>(sv.amplitudes, gate.qubits[0], gate.qubits[1], two_qubit_matrix(gate));
  }
}

Statevector simulate(const Circuit& c) {
  if (c.n_qubits() > kMaxSimQubits) {
    throw std::length_error("simulate: " + std::to_string(c.n_qubits()) + " qubits exceeds the limit of " +
                            std::to_string(kMaxSimQubits));
  }
  auto sv = Statevector::zero(c.n_qubits());
  for (const auto& g : c.gates()) apply_gate(sv, g);
  return sv;
}

Eigen::MatrixXcd circuit_unitary(const Circuit& c) {
  if (c.n_qubits() > 10) throw std::length_error("circuit_unitary: at most 10 qubits");
  const Eigen::Index dim = Eigen::Index{1} << c.n_qubits();
  Eigen::MatrixXcd u(dim, dim);
  for (Eigen::Index col = 0; col < dim; ++col) {
    Statevector sv{c.n_qubits(), AmplitudeVector<double>::Zero(dim)};
    sv.amplitudes[col] = 1.0;
    for (const auto& g : c.gates()) apply_gate(sv, g);
    u.col(col) = sv.amplitudes;
  }
  return u;
}

PauliString parse_pauli_string(const std::string& text) {
  PauliString out;
  auto letter = [](char ch) -> Pauli {
    switch (std::toupper(static_cast<unsigned char>(ch))) {
      case 'I': return Pauli::I;
      case 'X': return Pauli::X;
      case 'Y': return Pauli::Y;
      case 'Z': return Pauli::Z;
      default: throw std::invalid_argument(std::string("unknown Pauli '") + ch + "'");
    }
  };
  const bool sparse = text.find_first_of("0123456789") != std::string::npos;
  if (!sparse) {
    for (std::size_t q = 0; q < text.size(); ++q) {
      if (std::isspace(static_cast<unsigned char>(text[q]))) continue;
      const Pauli p = letter(text[q]);
      if (p != Pauli::I) out[static_cast<int>(q)] = p;
    }
    return out;
  }
  std::size_t i = 0;
  while (i < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    const Pauli p = letter(text[i++]);
    std::size_t j = i;
    while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
    if (j == i) throw std::invalid_argument("Pauli term without a qubit index in '" + text + "'");
    const int q = std::stoi(text.substr(i, j - i));
    if (out.contains(q)) throw std::invalid_argument("qubit " + std::to_string(q) + " repeated in '" + text + "'");
    if (p != Pauli::I) out[q] = p;
    i = j;
  }
  return out;
}

std::string to_string(const PauliString& p) {
  std::string out;
  for (const auto& [q, op] : p) {
    if (!out.empty()) out += ' ';
    out += "IXYZ"[static_cast<int>(op)];
    out += std::to_string(q);
  }
  return out.empty() ? "I" : out;
}

double expectation_pauli(const Statevector& sv, const PauliString& paulis) {
  std::uint64_t flip = 0, sign = 0;
  int n_y = 0;
  for (const auto& [q, p] : paulis) {
    if (q < 0 || q >= sv.n_qubits) throw std::out_of_range("Pauli on qubit " + std::to_string(q) + " out of range");
    const std::uint64_t bit = std::uint64_t{1} << q;
    if (p == Pauli::X || p == Pauli::Y) flip |= bit;
    if (p == Pauli::Z || p == Pauli::Y) sign |= bit;
    if (p == Pauli::Y) ++n_y;
  }
  // Y = i X Z, so P|b> = i^{#Y} (-1)^{popcount(b & sign)} |b ^ flip>.
  static constexpr cplx kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const cplx global = kIPow[n_y % 4];
  const auto& psi = sv.amplitudes;
  cplx acc = 0.0;
  for (Eigen::Index b = 0; b < psi.size(); ++b) {
    const auto ub = static_cast<std::uint64_t>(b);
    const double s = (std::popcount(ub & sign) & 1) ? -1.0 : 1.0;
    acc += std::conj(psi[static_cast<Eigen::Index>(ub ^ flip)]) * (s * psi[b]);
  }
  return (global * acc).real();
}

double maxcut_energy(const Statevector& sv, const MaxCutGraph& g) {
  if (sv.n_qubits != g.n_vertices) throw std::invalid_argument("maxcut_energy: qubit count differs from vertex count");
  double energy = 0.0;
  for (Eigen::Index b = 0; b < sv.amplitudes.size(); ++b) {
    const double p = std::norm(sv.amplitudes[b]);
    if (p == 0.0) continue;
    int cut = 0;
    for (auto [u, v] : g.edges) cut += ((b >> u) ^ (b >> v)) & 1;
    energy += p * cut;
  }
  return energy;
}

std::vector<std::uint8_t> serialize_amplitudes(const Statevector& sv) {
  std::vector<std::uint8_t> out;
  out.reserve(static_cast<std::size_t>(sv.amplitudes.size()) * 16);
  auto put = [&out](double d) {
    const auto bits = std::bit_cast<std::uint64_t>(d);
    for (int k = 0; k < 8; ++k) out.push_back(static_cast<std::uint8_t>(bits >> (8 * k)));
  };
  for (const auto& a : sv.amplitudes) {
    put(a.real());
    put(a.imag());
  }
  return out;
}

Statevector deserialize_amplitudes(std::span<const std::uint8_t> bytes) {
  const std::size_t count = bytes.size() / 16;
  if (bytes.size() % 16 != 0 || count == 0 || !std::has_single_bit(count)) {
    throw std::invalid_argument("statevector payload must hold 2^n complex doubles");
  }
  auto get = [&bytes](std::size_t off) {
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) bits |= std::uint64_t{bytes[off + static_cast<std::size_t>(k)]} << (8 * k);
    return std::bit_cast<double>(bits);
  };
  Statevector sv;
  sv.n_qubits = std::countr_zero(count);
  sv.amplitudes.resize(static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) sv.amplitudes[static_cast<Eigen::Index>(i)] = cplx{get(16 * i), get(16 * i + 8)};
  return sv;
}

}  // namespace qcache
