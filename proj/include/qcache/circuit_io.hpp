#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "qcache/circuit.hpp"

namespace qcache {

/// Parse failure carrying the 1-based line it occurred on.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Native text format:
///
///     qubits 2
///     H 0
///     RZ 1 1/4
///     CX 0,1
///
/// One gate per line, phases as reduced `numerator/denominator` multiples
/// of pi. Blank lines and `#` comments are ignored.
std::string to_text(const Circuit& circuit);
Circuit parse_text(std::string_view text);

/// Minimal OpenQASM 2 importer: a single qreg and the gates h, x, y, z, s,
/// sdg, t, tdg, rx, ry, rz, cx, cz, swap. Angles may use pi, numbers and
/// + - * / with parentheses. barrier and creg are ignored.
Circuit parse_qasm(std::string_view text);

/// Dispatches on content: files whose first statement is OPENQASM go to the
/// QASM importer, everything else to the native parser.
Circuit load_circuit(const std::filesystem::path& path);

}  // namespace qcache
