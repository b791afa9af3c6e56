#include "rectpcp/rational.hpp"

#include <stdexcept>

namespace rectpcp {

namespace {

BigInt parse_int(const std::string& s) {
  if (s.empty()) throw std::invalid_argument("empty integer");
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) throw std::invalid_argument("bad integer: " + s);
  for (std::size_t k = i; k < s.size(); ++k) {
    if (s[k] < '0' || s[k] > '9') throw std::invalid_argument("bad integer: " + s);
  }
  BigInt v(s.substr(i));
  return s[0] == '-' ? BigInt(-v) : v;
}

}  // namespace

Rational parse_rational(const std::string& s) {
  if (const auto slash = s.find('/'); slash != std::string::npos) {
    const BigInt d = parse_int(s.substr(slash + 1));
    if (d == 0) throw std::invalid_argument("zero denominator: " + s);
    return Rational(parse_int(s.substr(0, slash)), d);
  }
  if (const auto dot = s.find('.'); dot != std::string::npos) {
    const std::string whole = s.substr(0, dot);
    const std::string frac = s.substr(dot + 1);
    const bool neg = !whole.empty() && whole[0] == '-';
    const BigInt w = (whole.empty() || whole == "-" || whole == "+") ? BigInt(0) : parse_int(whole);
    const BigInt f = frac.empty() ? BigInt(0) : parse_int(frac);
    BigInt den = 1;
    for (std::size_t k = 0; k < frac.size(); ++k) den *= 10;
    Rational mag = Rational(neg ? BigInt(-w) : w) + Rational(f, den);
    return neg ? Rational(-mag) : mag;
  }
  return Rational(parse_int(s));
}

}  // namespace rectpcp
