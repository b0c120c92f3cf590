#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace qcache {

/// Rational multiple of pi with a power-of-two denominator dividing 2^20.
///
/// Stored internally as an integer count of quanta (pi / 2^20), normalized
/// into (-2^20, 2^20], so addition is exact and wraps modulo 2*pi.
class Phase {
 public:
  static constexpr int kResolutionBits = 20;
  static constexpr std::int64_t kQuantaPerPi = std::int64_t{1} << kResolutionBits;

  constexpr Phase() = default;

  /// numerator/denominator * pi. Throws std::invalid_argument unless the
  /// denominator is a positive divisor of 2^20.
  Phase(std::int64_t numerator, std::int64_t denominator);

  static Phase from_quanta(std::int64_t quanta);

  std::int64_t quanta() const { return quanta_; }
  std::int64_t numerator() const;
  std::int64_t denominator() const;

  /// Value in radians, in (-pi, pi].
  double radians() const;

  bool is_zero() const { return quanta_ == 0; }
  /// Multiple of pi (0 or pi).
  bool is_pauli() const { return quanta_ % kQuantaPerPi == 0; }
  /// Multiple of pi/2.
  bool is_clifford() const { return quanta_ % (kQuantaPerPi / 2) == 0; }
  /// Exactly +pi/2 or -pi/2.
  bool is_proper_clifford() const { return quanta_ == kQuantaPerPi / 2 || quanta_ == -kQuantaPerPi / 2; }

  Phase operator+(Phase other) const { return from_quanta(quanta_ + other.quanta_); }
  Phase operator-(Phase other) const { return from_quanta(quanta_ - other.quanta_); }
  Phase operator-() const { return from_quanta(-quanta_); }
  Phase& operator+=(Phase other) { return *this = *this + other; }
  Phase& operator-=(Phase other) { return *this = *this - other; }
  Phase times(std::int64_t k) const { return from_quanta(quanta_ * k); }

  auto operator<=>(const Phase&) const = default;

  /// "num/den", e.g. "1/4", "-1/2", "0/1", "1/1".
  std::string to_string() const;
  /// Parses "num/den" or a bare integer "num".
  static Phase parse(const std::string& text);

  static Phase pi() { return from_quanta(kQuantaPerPi); }
  static Phase half_pi() { return from_quanta(kQuantaPerPi / 2); }
  static Phase quarter_pi() { return from_quanta(kQuantaPerPi / 4); }

 private:
  std::int64_t quanta_ = 0;
};

/// Nearest multiple of pi/2^20, wrapped into (-pi, pi]. Throws
/// std::invalid_argument for non-finite input.
Phase quantize_phase(double theta);

}  // namespace qcache
