#include "tribell/rational.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include "tribell/errors.hpp"

namespace tribell {

namespace {

std::int64_t parse_integer(std::string_view text, bool allow_sign, std::string_view whole) {
  if (text.empty()) throw ParseError("", "malformed rational '" + std::string(whole) + "'");
  if (!allow_sign && (text.front() == '-' || text.front() == '+')) {
    throw ParseError("", "malformed rational '" + std::string(whole) + "'");
  }
  if (text.front() == '+') text.remove_prefix(1);
  std::int64_t value = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ParseError("", "malformed rational '" + std::string(whole) + "'");
  }
  return value;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return Rational(parse_integer(text, true, text));
  const auto num = parse_integer(text.substr(0, slash), true, text);
  const auto den = parse_integer(text.substr(slash + 1), false, text);
  if (den == 0) throw ParseError("", "zero denominator in '" + std::string(text) + "'");
  return Rational(num, den);
}

std::string to_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

bool snap_rational(double x, std::int64_t max_den, double tol, Rational& out) {
  if (!std::isfinite(x)) return false;
  double best_err = std::numeric_limits<double>::infinity();
  for (std::int64_t q = 1; q <= max_den; ++q) {
    const double p = std::round(x * static_cast<double>(q));
    const double err = std::abs(x - p / static_cast<double>(q));
    if (err < best_err - 1e-15) {
      best_err = err;
      out = Rational(static_cast<std::int64_t>(p), q);
    }
  }
  return best_err <= tol;
}

}  // namespace tribell
