#pragma once

#include <cmath>
#include <limits>
#include <ostream>

#include "rkl/error.hpp"

namespace rkl {

/// A real number stored as mantissa * e^exponent_offset.
///
/// |mantissa| is kept in [e^-1/2, e^1/2] (or is exactly zero), so products of
/// values like I_t(e^u) K_t(e^v) never leave the double range even when the
/// represented number does.
class ScaledValue {
 public:
  constexpr ScaledValue() = default;

  /// Normalizes an arbitrary (mantissa, offset) pair.
  static ScaledValue from_parts(double mantissa, double exponent_offset) {
    ScaledValue out;
    if (mantissa == 0.0) return out;
    const double shift = std::nearbyint(std::log(std::abs(mantissa)));
    out.mantissa_ = mantissa * std::exp(-shift);
    out.offset_ = exponent_offset + shift;
    return out;
  }

  static ScaledValue from_double(double value) { return from_parts(value, 0.0); }

  /// sign * e^log_abs
  static ScaledValue from_log(double log_abs, double sign = 1.0) {
    ScaledValue out;
    if (sign == 0.0 || log_abs == -std::numeric_limits<double>::infinity()) return out;
    const double shift = std::nearbyint(log_abs);
    out.mantissa_ = std::copysign(std::exp(log_abs - shift), sign);
    out.offset_ = shift;
    return out;
  }

  double mantissa() const { return mantissa_; }
  double exponent_offset() const { return offset_; }
  bool is_zero() const { return mantissa_ == 0.0; }
  double sign() const { return mantissa_ > 0.0 ? 1.0 : (mantissa_ < 0.0 ? -1.0 : 0.0); }

  /// log|value|; -inf for zero.
  double log_abs() const {
    if (mantissa_ == 0.0) return -std::numeric_limits<double>::infinity();
    return std::log(std::abs(mantissa_)) + offset_;
  }

  /// Plain double. Underflow rounds to zero; overflow throws.
  double to_double() const {
    if (mantissa_ == 0.0) return 0.0;
    const double value = mantissa_ * std::exp(offset_);
    if (!std::isfinite(value)) {
      throw OverflowError("ScaledValue::to_double: value exceeds double range");
    }
    return value;
  }

  friend ScaledValue operator*(const ScaledValue& a, const ScaledValue& b) {
    return from_parts(a.mantissa_ * b.mantissa_, a.offset_ + b.offset_);
  }
  friend ScaledValue operator/(const ScaledValue& a, const ScaledValue& b) {
    if (b.mantissa_ == 0.0) throw DomainError("ScaledValue: division by zero");
    return from_parts(a.mantissa_ / b.mantissa_, a.offset_ - b.offset_);
  }
  friend ScaledValue operator+(const ScaledValue& a, const ScaledValue& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    const double top = std::max(a.offset_, b.offset_);
    return from_parts(a.mantissa_ * std::exp(a.offset_ - top) +
                          b.mantissa_ * std::exp(b.offset_ - top),
                      top);
  }
  ScaledValue operator-() const {
    ScaledValue out = *this;
    out.mantissa_ = -out.mantissa_;
    return out;
  }
  friend ScaledValue operator-(const ScaledValue& a, const ScaledValue& b) { return a + (-b); }

  ScaledValue scaled_by(double factor) const { return from_parts(mantissa_ * factor, offset_); }

  friend std::ostream& operator<<(std::ostream& os, const ScaledValue& v) {
    return os << v.mantissa_ << "*e^" << v.offset_;
  }

 private:
  double mantissa_ = 0.0;
  double offset_ = 0.0;
};

/// Value plus an estimate of its relative accuracy.
struct EvalResult {
  ScaledValue value;
  double rel_err_estimate = 0.0;

  /// Absolute error bound as a plain real; 0 on underflow, +inf on overflow.
  double abs_err_estimate() const {
    const double mag = std::exp(value.log_abs());
    return rel_err_estimate * mag;
  }
  double to_double() const { return value.to_double(); }
};

}  // namespace rkl
