#include "cityspec/rational.hpp"

#include <cctype>

namespace cityspec {

namespace mp = boost::multiprecision;

Rational::Rational(long long num, long long den) : value_(num) {
  value_ /= value_type(den);
}

std::optional<Rational> Rational::parse(std::string_view text) {
  if (text.empty()) return std::nullopt;
  bool negative = false;
  std::size_t i = 0;
  if (text[0] == '-' || text[0] == '+') {
    negative = text[0] == '-';
    ++i;
  }
  auto digits = [&](std::size_t& pos) {
    std::size_t start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    return text.substr(start, pos - start);
  };
  std::string_view whole = digits(i);
  if (whole.empty()) return std::nullopt;

  mp::cpp_int num{std::string(whole)};
  mp::cpp_int den(1);
  if (i < text.size() && text[i] == '.') {
    ++i;
    std::string_view frac = digits(i);
    if (frac.empty()) return std::nullopt;
    for (char c : frac) {
      num = num * 10 + (c - '0');
      den *= 10;
    }
  } else if (i < text.size() && text[i] == '/') {
    ++i;
    std::string_view d = digits(i);
    if (d.empty()) return std::nullopt;
    den = mp::cpp_int(std::string(d));
    if (den == 0) return std::nullopt;
  }
  if (i != text.size()) return std::nullopt;
  value_type v(num, den);
  if (negative) v = -v;
  return Rational(v);
}

std::string Rational::to_string() const {
  mp::cpp_int num = mp::numerator(value_);
  mp::cpp_int den = mp::denominator(value_);
  if (den == 1) return num.str();

  // Terminating iff den = 2^a 5^b.
  mp::cpp_int rest = den;
  int twos = 0, fives = 0;
  while (rest % 2 == 0) { rest /= 2; ++twos; }
  while (rest % 5 == 0) { rest /= 5; ++fives; }
  if (rest != 1) return num.str() + "/" + den.str();

  int places = std::max(twos, fives);
  mp::cpp_int scale = mp::pow(mp::cpp_int(10), places);
  mp::cpp_int scaled = num * (scale / den);
  bool negative = scaled < 0;
  if (negative) scaled = -scaled;
  std::string digits = scaled.str();
  if (static_cast<int>(digits.size()) <= places)
    digits.insert(0, static_cast<std::size_t>(places - static_cast<int>(digits.size()) + 1), '0');
  digits.insert(digits.size() - static_cast<std::size_t>(places), ".");
  return negative ? "-" + digits : digits;
}

double Rational::to_double() const { return value_.convert_to<double>(); }

bool Rational::is_integer() const { return mp::denominator(value_) == 1; }

}  // namespace cityspec
