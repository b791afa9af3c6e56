#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <string>

namespace rectpcp {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Rational dyadic(const BigInt& num, unsigned log2_den) {
  return Rational(num, BigInt(1) << log2_den);
}

inline std::string to_string(const Rational& q) {
  const BigInt n = boost::multiprecision::numerator(q);
  const BigInt d = boost::multiprecision::denominator(q);
  if (d == 1) return n.str();
  return n.str() + "/" + d.str();
}

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

// Parses "a", "a/b" or a finite decimal such as "0.125".
Rational parse_rational(const std::string& s);

}  // namespace rectpcp
