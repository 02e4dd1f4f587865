#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <boost/rational.hpp>

namespace tribell {

using Rational = boost::rational<std::int64_t>;

/// Parses "p/q", "-p/q" or an integer. Throws ParseError on anything else
/// (empty input, "74//11", zero denominator, trailing junk).
Rational parse_rational(std::string_view text);

/// Canonical text form: "p/q" or "p" when q == 1.
std::string to_string(const Rational& r);

inline double to_double(const Rational& r) {
  return boost::rational_cast<double>(r);
}

/// Closest rational with denominator <= max_den, if |x - p/q| <= tol.
bool snap_rational(double x, std::int64_t max_den, double tol, Rational& out);

}  // namespace tribell
