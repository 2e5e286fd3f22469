// rational.hpp : exact constants for formulas, intervals and distances
//
// Values are kept as arbitrary-precision rationals so that "0.3" stays
// exactly 3/10 through parsing, assembly and printing.

#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace cityspec {

class Rational {
 public:
  using value_type = boost::multiprecision::cpp_rational;

  Rational() = default;
  Rational(long long v) : value_(v) {}  // NOLINT(google-explicit-constructor)
  explicit Rational(value_type v) : value_(std::move(v)) {}
  Rational(long long num, long long den);

  // Accepts "12", "-3", "0.25", "1/3", "+7". Returns nullopt otherwise.
  static std::optional<Rational> parse(std::string_view text);

  // Terminating decimals print as decimals ("0.3"), everything else as "p/q".
  std::string to_string() const;
  double to_double() const;

  bool is_integer() const;
  const value_type& value() const { return value_; }

  friend Rational operator+(const Rational& a, const Rational& b) { return Rational(a.value_ + b.value_); }
  friend Rational operator-(const Rational& a, const Rational& b) { return Rational(a.value_ - b.value_); }
  friend Rational operator*(const Rational& a, const Rational& b) { return Rational(a.value_ * b.value_); }
  friend Rational operator/(const Rational& a, const Rational& b) { return Rational(a.value_ / b.value_); }

  friend bool operator==(const Rational& a, const Rational& b) { return a.value_ == b.value_; }
  friend bool operator!=(const Rational& a, const Rational& b) { return a.value_ != b.value_; }
  friend bool operator<(const Rational& a, const Rational& b) { return a.value_ < b.value_; }
  friend bool operator<=(const Rational& a, const Rational& b) { return a.value_ <= b.value_; }
  friend bool operator>(const Rational& a, const Rational& b) { return a.value_ > b.value_; }
  friend bool operator>=(const Rational& a, const Rational& b) { return a.value_ >= b.value_; }

 private:
  value_type value_{0};
};

// Upper bound of an interval: a finite rational or +infinity.
struct Bound {
  std::optional<Rational> value;  // nullopt = +inf

  static Bound infinite() { return Bound{}; }
  static Bound finite(Rational r) { return Bound{std::move(r)}; }
  bool is_infinite() const { return !value.has_value(); }

  friend bool operator==(const Bound&, const Bound&) = default;
};

}  // namespace cityspec
