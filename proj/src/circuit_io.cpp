#include "qcache/circuit_io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <vector>

namespace qcache {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    if (end == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t begin = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > begin) out.push_back(s.substr(begin, i - begin));
  }
  return out;
}

std::optional<int> to_int(std::string_view s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

// Recursive-descent evaluator for QASM angle expressions.
class AngleParser {
 public:
  explicit AngleParser(std::string_view s) : s_(s) {}

  std::optional<double> parse() {
    auto v = expr();
    skip();
    if (!v || pos_ != s_.size()) return std::nullopt;
    return v;
  }

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  std::optional<double> expr() {
    auto lhs = term();
    while (lhs) {
      if (eat('+')) {
        auto r = term();
        if (!r) return std::nullopt;
        *lhs += *r;
      } else if (eat('-')) {
        auto r = term();
        if (!r) return std::nullopt;
        *lhs -= *r;
      } else {
        break;
      }
    }
    return lhs;
  }
  std::optional<double> term() {
    auto lhs = unary();
    while (lhs) {
      if (eat('*')) {
        auto r = unary();
        if (!r) return std::nullopt;
        *lhs *= *r;
      } else if (eat('/')) {
        auto r = unary();
        if (!r || *r == 0.0) return std::nullopt;
        *lhs /= *r;
      } else {
        break;
      }
    }
    return lhs;
  }
  std::optional<double> unary() {
    if (eat('-')) {
      auto v = unary();
      if (v) *v = -*v;
      return v;
    }
    if (eat('+')) return unary();
    return primary();
  }
  std::optional<double> primary() {
    skip();
    if (eat('(')) {
      auto v = expr();
      if (!v || !eat(')')) return std::nullopt;
      return v;
    }
    if (s_.substr(pos_, 2) == "pi") {
      pos_ += 2;
      return std::numbers::pi;
    }
    const std::size_t begin = pos_;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
                                s_[pos_] == 'e' || s_[pos_] == 'E' ||
                                ((s_[pos_] == '-' || s_[pos_] == '+') && pos_ > begin &&
                                 (s_[pos_ - 1] == 'e' || s_[pos_ - 1] == 'E')))) {
      ++pos_;
    }
    if (pos_ == begin) return std::nullopt;
    try {
      return std::stod(std::string(s_.substr(begin, pos_ - begin)));
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string to_text(const Circuit& circuit) {
  std::ostringstream out;
  out << "qubits " << circuit.n_qubits() << '\n';
  for (const auto& g : circuit.gates()) {
    out << gate_name(g.kind) << ' ' << g.qubits[0];
    if (g.qubits.size() > 1) out << ',' << g.qubits[1];
    if (g.param) out << ' ' << g.param->to_string();
    out << '\n';
  }
  return out.str();
}

Circuit parse_text(std::string_view text) {
  std::optional<Circuit> circuit;
  int line_no = 0;
  for (auto raw : split_lines(text)) {
    ++line_no;
    auto line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto tokens = split_ws(line);
    if (!circuit) {
      if (tokens.size() != 2 || tokens[0] != "qubits") throw ParseError(line_no, "expected header 'qubits N'");
      const auto n = to_int(tokens[1]);
      if (!n || *n <= 0) throw ParseError(line_no, "invalid qubit count '" + std::string(tokens[1]) + "'");
      circuit.emplace(*n);
      continue;
    }
    if (tokens.size() < 2 || tokens.size() > 3) throw ParseError(line_no, "expected 'GATE q0[,q1] [num/den]'");
    const auto kind = gate_from_name(tokens[0]);
    if (!kind) throw ParseError(line_no, "unknown gate '" + std::string(tokens[0]) + "'");
    std::vector<int> qubits;
    std::string_view operands = tokens[1];
    while (true) {
      const auto comma = operands.find(',');
      const auto q = to_int(operands.substr(0, comma));
      if (!q) throw ParseError(line_no, "invalid qubit operand '" + std::string(tokens[1]) + "'");
      qubits.push_back(*q);
      if (comma == std::string_view::npos) break;
      operands.remove_prefix(comma + 1);
    }
    std::optional<Phase> param;
    try {
      if (tokens.size() == 3) param = Phase::parse(std::string(tokens[2]));
      circuit->add(*kind, std::move(qubits), param);
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, e.what());
    }
  }
  if (!circuit) throw ParseError(line_no, "missing header 'qubits N'");
  return std::move(*circuit);
}

Circuit parse_qasm(std::string_view text) {
  std::optional<Circuit> circuit;
  std::string reg;
  int line_no = 0;
  for (auto raw : split_lines(text)) {
    ++line_no;
    auto line = raw;
    if (auto c = line.find("//"); c != std::string_view::npos) line = line.substr(0, c);
    // Statements are ';'-terminated; we accept several per line.
    std::size_t start = 0;
    while (start < line.size()) {
      auto end = line.find(';', start);
      if (end == std::string_view::npos) {
        if (!trim(line.substr(start)).empty()) throw ParseError(line_no, "missing ';'");
        break;
      }
      const auto stmt = trim(line.substr(start, end - start));
      start = end + 1;
      if (stmt.empty()) continue;
      if (stmt.starts_with("OPENQASM") || stmt.starts_with("include") || stmt.starts_with("creg") ||
          stmt.starts_with("barrier")) {
        continue;
      }
      if (stmt.starts_with("qreg")) {
        if (circuit) throw ParseError(line_no, "only a single qreg is supported");
        const auto open = stmt.find('['), close = stmt.find(']');
        if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
          throw ParseError(line_no, "malformed qreg");
        }
        reg = std::string(trim(stmt.substr(4, open - 4)));
        const auto n = to_int(trim(stmt.substr(open + 1, close - open - 1)));
        if (!n || *n <= 0) throw ParseError(line_no, "invalid qreg size");
        circuit.emplace(*n);
        continue;
      }
      if (!circuit) throw ParseError(line_no, "gate before qreg declaration");

      std::size_t name_end = 0;
      while (name_end < stmt.size() && (std::isalnum(static_cast<unsigned char>(stmt[name_end])) || stmt[name_end] == '_')) {
        ++name_end;
      }
      const std::string name(stmt.substr(0, name_end));
      auto rest = trim(stmt.substr(name_end));
      std::optional<double> angle;
      if (!rest.empty() && rest.front() == '(') {
        int depth = 0;
        std::size_t match = std::string_view::npos;
        for (std::size_t i = 0; i < rest.size(); ++i) {
          if (rest[i] == '(') ++depth;
          if (rest[i] == ')' && --depth == 0) {
            match = i;
            break;
          }
        }
        if (match == std::string_view::npos) throw ParseError(line_no, "unbalanced parenthesis");
        angle = AngleParser(rest.substr(1, match - 1)).parse();
        if (!angle) throw ParseError(line_no, "cannot evaluate angle '" + std::string(rest.substr(1, match - 1)) + "'");
        rest = trim(rest.substr(match + 1));
      }
      static const std::vector<std::pair<std::string, GateKind>> kQasmNames{
          {"h", GateKind::H},     {"x", GateKind::X},   {"y", GateKind::Y},   {"z", GateKind::Z},
          {"s", GateKind::S},     {"sdg", GateKind::Sdg}, {"t", GateKind::T}, {"tdg", GateKind::Tdg},
          {"rx", GateKind::RX},   {"ry", GateKind::RY}, {"rz", GateKind::RZ}, {"cx", GateKind::CX},
          {"cz", GateKind::CZ},   {"swap", GateKind::SWAP}};
      std::optional<GateKind> kind;
      for (const auto& [n, k] : kQasmNames) {
        if (n == name) kind = k;
      }
      if (!kind) throw ParseError(line_no, "unsupported QASM statement '" + name + "'");

      std::vector<int> qubits;
      for (std::size_t pos = 0; pos <= rest.size();) {
        auto comma = rest.find(',', pos);
        auto operand = trim(rest.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
        const auto open = operand.find('['), close = operand.find(']');
        if (open == std::string_view::npos || close == std::string_view::npos || trim(operand.substr(0, open)) != reg) {
          throw ParseError(line_no, "malformed operand '" + std::string(operand) + "'");
        }
        const auto q = to_int(trim(operand.substr(open + 1, close - open - 1)));
        if (!q) throw ParseError(line_no, "invalid qubit index");
        qubits.push_back(*q);
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
      }
      try {
        std::optional<Phase> param;
        if (angle) param = quantize_phase(*angle);
        circuit->add(*kind, std::move(qubits), param);
      } catch (const std::invalid_argument& e) {
        throw ParseError(line_no, e.what());
      }
    }
  }
  if (!circuit) throw ParseError(line_no, "missing qreg declaration");
  return std::move(*circuit);
}

Circuit load_circuit(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open circuit file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  for (auto raw : split_lines(text)) {
    auto line = trim(raw);
    if (line.empty() || line.starts_with("//") || line.starts_with("#")) continue;
    if (line.starts_with("OPENQASM")) return parse_qasm(text);
    break;
  }
  return parse_text(text);
}

}  // namespace qcache
