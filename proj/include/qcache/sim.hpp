#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcache/circuit.hpp"

namespace qcache {

template <typename Scalar>
using AmplitudeVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

/// Dense pure state. Amplitude index bit q is qubit q (little-endian).
struct Statevector {
  int n_qubits = 0;
  AmplitudeVector<double> amplitudes;

  /// |0...0> on n qubits.
  static Statevector zero(int n_qubits);
};

/// Largest register simulate() accepts.
inline constexpr int kMaxSimQubits = 20;

/// 2x2 or 4x4 gate matrix. Two-qubit matrices are indexed by
/// b(qubits[0]) + 2 * b(qubits[1]).
Eigen::MatrixXcd gate_matrix(const Gate& gate);

/// In-place stride kernels, O(2^n) per call.
template <typename Scalar>
void apply_1q(AmplitudeVector<Scalar>& psi, int q, const Eigen::Matrix<std::complex<Scalar>, 2, 2>& u) {
  const Eigen::Index stride = Eigen::Index{1} << q;
  const Eigen::Index size = psi.size();
  for (Eigen::Index base = 0; base < size; base += 2 * stride) {
    for (Eigen::Index i = base; i < base + stride; ++i) {
      const auto a0 = psi[i], a1 = psi[i + stride];
      psi[i] = u(0, 0) * a0 + u(0, 1) * a1;
      psi[i + stride] = u(1, 0) * a0 + u(1, 1) * a1;
    }
  }
}

template <typename Scalar>
void apply_2q(AmplitudeVector<Scalar>& psi, int q0, int q1, const Eigen::Matrix<std::complex<Scalar>, 4, 4>& u) {
  const Eigen::Index m0 = Eigen::Index{1} << q0, m1 = Eigen::Index{1} << q1;
  const Eigen::Index size = psi.size();
  for (Eigen::Index i = 0; i < size; ++i) {
    if ((i & m0) || (i & m1)) continue;
    const Eigen::Index idx[4] = {i, i | m0, i | m1, i | m0 | m1};
    std::complex<Scalar> in[4];
    for (int k = 0; k < 4; ++k) in[k] = psi[idx[k]];
    for (int r = 0; r < 4; ++r) {
      psi[idx[r]] = u(r, 0) * in[0] + u(r, 1) * in[1] + u(r, 2) * in[2] + u(r, 3) * in[3];
    }
  }
}

void apply_gate(Statevector& sv, const Gate& gate);

/// Applies every gate to |0...0>. Throws std::length_error above kMaxSimQubits.
Statevector simulate(const Circuit& c);

/// Columns are the images of the computational basis states (n <= 10).
Eigen::MatrixXcd circuit_unitary(const Circuit& c);

enum class Pauli : std::uint8_t { I, X, Y, Z };
using PauliString = std::map<int, Pauli>;

/// Parses "Z0 X3" or a dense string like "ZIIX" (character i acts on qubit i).
PauliString parse_pauli_string(const std::string& text);
std::string to_string(const PauliString& p);

/// <psi|P|psi>. Throws std::out_of_range for invalid qubits.
double expectation_pauli(const Statevector& sv, const PauliString& paulis);

/// Sum over edges of (1 - <Z_i Z_j>) / 2.
double maxcut_energy(const Statevector& sv, const MaxCutGraph& g);

/// Little-endian IEEE-754 doubles, (re, im) interleaved: 16 * 2^n bytes.
std::vector<std::uint8_t> serialize_amplitudes(const Statevector& sv);
Statevector deserialize_amplitudes(std::span<const std::uint8_t> bytes);

}  // namespace qcache
