#include "qcache/phase.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qcache {
namespace {

constexpr std::int64_t kFullTurn = 2 * Phase::kQuantaPerPi;

std::int64_t wrap(std::int64_t quanta) {
  std::int64_t r = quanta % kFullTurn;
  if (r <= -Phase::kQuantaPerPi) r += kFullTurn;
  if (r > Phase::kQuantaPerPi) r -= kFullTurn;
  return r;
}

std::int64_t parse_int(std::string_view s, const std::string& whole) {
  std::int64_t v = 0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw std::invalid_argument("malformed phase '" + whole + "'");
  }
  return v;
}

}  // namespace

Phase::Phase(std::int64_t numerator, std::int64_t denominator) {
  if (denominator <= 0 || denominator > kQuantaPerPi || !std::has_single_bit(static_cast<std::uint64_t>(denominator))) {
    throw std::invalid_argument("phase denominator must be a positive divisor of 2^20");
  }
  // Reduce the numerator first so the multiplication cannot overflow.
  const std::int64_t reduced = numerator % (2 * denominator);
  quanta_ = wrap(reduced * (kQuantaPerPi / denominator));
}

Phase Phase::from_quanta(std::int64_t quanta) {
  Phase p;
  p.quanta_ = wrap(quanta);
  return p;
}

std::int64_t Phase::numerator() const {
  return quanta_ / (kQuantaPerPi / denominator());
}

std::int64_t Phase::denominator() const {
  if (quanta_ == 0) return 1;
  const auto mag = static_cast<std::uint64_t>(quanta_ < 0 ? -quanta_ : quanta_);
  const int shift = std::min(std::countr_zero(mag), kResolutionBits);
  return kQuantaPerPi >> shift;
}

double Phase::radians() const {
  return static_cast<double>(quanta_) * std::numbers::pi / static_cast<double>(kQuantaPerPi);
}

std::string Phase::to_string() const {
  return std::to_string(numerator()) + "/" + std::to_string(denominator());
}

Phase Phase::parse(const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) return Phase(parse_int(text, text), 1);
  const std::string_view view(text);
  return Phase(parse_int(view.substr(0, slash), text), parse_int(view.substr(slash + 1), text));
}

Phase quantize_phase(double theta) {
  if (!std::isfinite(theta)) throw std::invalid_argument("cannot quantize a non-finite angle");
  // Reduce first so that huge angles do not lose the quantum in rounding.
  const double turns = std::remainder(theta, 2.0 * std::numbers::pi);
  const double quanta = std::nearbyint(turns / std::numbers::pi * static_cast<double>(Phase::kQuantaPerPi));
  return Phase::from_quanta(static_cast<std::int64_t>(quanta));
}

}  // namespace qcache
