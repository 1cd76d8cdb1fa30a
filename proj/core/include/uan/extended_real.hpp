#pragma once

#include <compare>
#include <limits>

namespace uan {

/// A value in (-inf, +inf]. Only +inf is representable as non-finite;
/// min ignores +inf unless every operand is infinite.
class ExtendedReal {
 public:
  constexpr ExtendedReal() = default;
  constexpr ExtendedReal(double v) : value_(v), infinite_(false) {}  // NOLINT

  static constexpr ExtendedReal infinity() {
    ExtendedReal r;
    r.infinite_ = true;
    return r;
  }

  constexpr bool is_finite() const { return !infinite_; }
  constexpr bool is_infinite() const { return infinite_; }

  /// Finite payload; +inf maps to std::numeric_limits<double>::infinity().
  constexpr double value() const {
    return infinite_ ? std::numeric_limits<double>::infinity() : value_;
  }

  friend constexpr ExtendedReal operator+(ExtendedReal a, double b) {
    return a.infinite_ ? a : ExtendedReal(a.value_ + b);
  }
  friend constexpr ExtendedReal operator+(ExtendedReal a, ExtendedReal b) {
    return (a.infinite_ || b.infinite_) ? infinity() : ExtendedReal(a.value_ + b.value_);
  }

  friend constexpr bool operator==(ExtendedReal a, ExtendedReal b) {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
  }
  friend constexpr std::partial_ordering operator<=>(ExtendedReal a, ExtendedReal b) {
    if (a.infinite_ || b.infinite_) {
      return static_cast<int>(a.infinite_) <=> static_cast<int>(b.infinite_);
    }
    return a.value_ <=> b.value_;
  }

 private:
  double value_ = 0.0;
  bool infinite_ = false;
};

constexpr ExtendedReal min(ExtendedReal a, ExtendedReal b) { return b < a ? b : a; }

}  // namespace uan
