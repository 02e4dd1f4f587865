#pragma once

// Domain types for the tripartite scenario with two binary-outcome
// measurements per party: behaviors, correlators, Bell functionals and
// deterministic strategies.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "tribell/errors.hpp"
#include "tribell/rational.hpp"

namespace tribell {

inline constexpr int kParties = 3;
inline constexpr int kSettings = 2;
inline constexpr int kOutcomes = 2;
inline constexpr int kProbEntries = 64;
inline constexpr int kCorrelators = 27;  // unit + 6 singles + 12 pairs + 8 triples

inline constexpr double kNormalizationTol = 1e-9;
inline constexpr double kRangeTol = 1e-12;
inline constexpr double kSignallingTol = 1e-9;

inline constexpr char party_name(int party) { return static_cast<char>('A' + party); }

/// Flat index of p(abc|xyz); settings are the high bits, outcomes the low.
constexpr int prob_index(int a, int b, int c, int x, int y, int z) {
  return ((((x * 2 + y) * 2 + z)) << 3) | (a << 2) | (b << 1) | c;
}
constexpr int prob_index(const std::array<int, 3>& out, const std::array<int, 3>& set) {
  return prob_index(out[0], out[1], out[2], set[0], set[1], set[2]);
}

/// Index into a correlator vector. A setting of -1 means the party is absent.
constexpr int correlator_index(const std::array<int, 3>& settings) {
  return (settings[0] + 1) * 9 + (settings[1] + 1) * 3 + (settings[2] + 1);
}

template <class T>
inline constexpr bool is_exact_v = std::is_same_v<T, Rational>;

// ---------------------------------------------------------------------------
// Behavior

/// Conditional probability table p(abc|xyz). Construct through
/// from_probabilities(), which enforces range and normalization.
template <class T>
class BasicBehavior {
 public:
  using value_type = T;
  using Table = std::array<T, kProbEntries>;

  static BasicBehavior from_probabilities(std::span<const T, kProbEntries> table);
  static BasicBehavior from_probabilities(const Table& table) {
    return from_probabilities(std::span<const T, kProbEntries>(table));
  }
  static BasicBehavior uniform();

  const T& operator()(int a, int b, int c, int x, int y, int z) const {
    return p_[prob_index(a, b, c, x, y, z)];
  }
  const T& at(int index) const { return p_[index]; }
  const Table& table() const noexcept { return p_; }

  /// Marginal over the parties whose setting is -1. Their setting is taken to
  /// be 0, which is unambiguous for no-signalling behaviors.
  T marginal(const std::array<int, 3>& outcomes, const std::array<int, 3>& settings) const;

  /// Convex combination w*this + (1-w)*other.
  BasicBehavior mix(const BasicBehavior& other, const T& w) const;

 private:
  explicit BasicBehavior(const Table& t) : p_(t) {}
  Table p_{};
};

using Behavior = BasicBehavior<double>;
using ExactBehavior = BasicBehavior<Rational>;

/// Lists violated invariants instead of throwing.
std::vector<std::string> validate_probabilities(std::span<const double, kProbEntries> table);

Behavior to_floating(const ExactBehavior& exact);

// ---------------------------------------------------------------------------
// No-signalling

/// One linear equality over the 64 probability entries.
struct LinearEquality {
  std::vector<std::pair<int, int>> terms;  // (prob index, integer coefficient)
  std::string label;
};

/// All marginal-consistency equalities (84, redundant).
const std::vector<LinearEquality>& ns_equalities_full();

/// Normalization (8) followed by a non-redundant no-signalling subset (30);
/// the 38 rows are linearly independent.
const std::vector<LinearEquality>& ns_equalities_minimal();

struct SignallingReport {
  std::vector<std::string> violated;
  double max_residual = 0.0;
  bool ok() const noexcept { return violated.empty(); }
};

SignallingReport check_no_signalling(const Behavior& beh, double tol = kSignallingTol);
SignallingReport check_no_signalling(const ExactBehavior& beh);

// ---------------------------------------------------------------------------
// Correlators

/// Unit entry, single-, two- and three-body correlators E(.), indexed by
/// correlator_index().
template <class T>
struct BasicCorrelatorVector {
  std::array<T, kCorrelators> values{};

  const T& operator[](const std::array<int, 3>& settings) const {
    return values[correlator_index(settings)];
  }
  T& operator[](const std::array<int, 3>& settings) { return values[correlator_index(settings)]; }
};

using CorrelatorVector = BasicCorrelatorVector<double>;

/// Throws SignallingError when the marginals depend on traced-out settings.
template <class T>
BasicCorrelatorVector<T> correlators(const BasicBehavior<T>& beh);

// ---------------------------------------------------------------------------
// Monomials and functionals

enum class Basis { Correlator, Probability };

/// "1", "E(A0B1)", "P(010|001)", "P(AB:01|10)", ...
struct Monomial {
  enum class Kind : std::uint8_t { Unit, Correlator, Probability };
  Kind kind = Kind::Unit;
  std::array<int, 3> settings{-1, -1, -1};  // -1: party absent
  std::array<int, 3> outcomes{-1, -1, -1};  // probability kind only

  static Monomial unit() { return {}; }
  static Monomial correlator(const std::array<int, 3>& settings);
  static Monomial probability(const std::array<int, 3>& outcomes, const std::array<int, 3>& settings);

  int order() const;  // number of parties involved
  auto operator<=>(const Monomial&) const = default;
};

Monomial parse_monomial(std::string_view text);
std::string to_string(const Monomial& m);

struct Term {
  Monomial monomial;
  Rational coefficient;
};

struct BellFunctional {
  std::string id;
  Basis basis = Basis::Correlator;
  std::vector<Term> terms;
  std::optional<Rational> local_bound;
  std::string notes;
};

std::string to_string(Basis basis);

/// Throws BasisError for a correlator-basis functional on a signalling
/// behavior.
template <class T>
T functional_value(const BellFunctional& f, const BasicBehavior<T>& beh);

/// Rewrites every term over full probabilities p(abc|xyz) plus a constant.
/// Traced-out parties are expanded at setting 0. Like terms are merged and
/// zero coefficients dropped; output terms are sorted by monomial.
BellFunctional to_probability_basis(const BellFunctional& f);

/// Dense form of a probability-basis functional: value = constant + w . p.
struct DenseFunctional {
  Rational constant{0};
  std::array<Rational, kProbEntries> weights{};
};
DenseFunctional to_dense(const BellFunctional& f);

// ---------------------------------------------------------------------------
// Deterministic strategies

/// Local deterministic assignment setting -> outcome for each party.
struct DeterministicStrategy {
  std::array<std::array<int, 2>, 3> outcome{};  // [party][setting]

  /// Bits (a0 a1 b0 b1 c0 c1), a0 most significant.
  int encoding() const;
  static DeterministicStrategy from_encoding(int code);
  ExactBehavior behavior() const;
  std::string to_string() const;
};

// ---------------------------------------------------------------------------
// Template implementations

template <class T>
BasicBehavior<T> BasicBehavior<T>::from_probabilities(std::span<const T, kProbEntries> table) {
  Table t{};
  for (int i = 0; i < kProbEntries; ++i) t[i] = table[i];
  if constexpr (is_exact_v<T>) {
    for (int i = 0; i < kProbEntries; ++i) {
      if (t[i] < T(0) || t[i] > T(1)) {
        throw RangeError("probability entry " + std::to_string(i) + " = " + tribell::to_string(t[i]) +
                         " outside [0,1]");
      }
    }
    for (int s = 0; s < 8; ++s) {
      T sum(0);
      for (int o = 0; o < 8; ++o) sum += t[(s << 3) | o];
      if (sum != T(1)) {
        throw NormalizationError("settings slice " + std::to_string(s) + " sums to " + tribell::to_string(sum));
      }
    }
  } else {
    for (int i = 0; i < kProbEntries; ++i) {
      if (!std::isfinite(t[i])) throw RangeError("probability entry " + std::to_string(i) + " is not finite");
      if (t[i] < -kRangeTol || t[i] > 1.0 + kRangeTol) {
        throw RangeError("probability entry " + std::to_string(i) + " = " + std::to_string(t[i]) +
                         " outside [0,1]");
      }
    }
    for (int s = 0; s < 8; ++s) {
      double sum = 0.0;
      for (int o = 0; o < 8; ++o) sum += t[(s << 3) | o];
      if (std::abs(sum - 1.0) > kNormalizationTol) {
        throw NormalizationError("settings slice " + std::to_string(s) + " sums to " + std::to_string(sum));
      }
    }
  }
  return BasicBehavior(t);
}

template <class T>
BasicBehavior<T> BasicBehavior<T>::uniform() {
  Table t{};
  t.fill(T(1) / T(8));
  return BasicBehavior(t);
}

template <class T>
T BasicBehavior<T>::marginal(const std::array<int, 3>& outcomes, const std::array<int, 3>& settings) const {
  T sum(0);
  std::array<int, 3> out{};
  std::array<int, 3> set{};
  for (int code = 0; code < 8; ++code) {
    bool keep = true;
    for (int party = 0; party < 3; ++party) {
      const int o = (code >> (2 - party)) & 1;
      if (settings[party] >= 0) {
        if (o != outcomes[party]) keep = false;
        set[party] = settings[party];
      } else {
        set[party] = 0;
      }
      out[party] = o;
    }
    if (keep) sum += p_[prob_index(out, set)];
  }
  return sum;
}

template <class T>
BasicBehavior<T> BasicBehavior<T>::mix(const BasicBehavior& other, const T& w) const {
  Table t{};
  for (int i = 0; i < kProbEntries; ++i) t[i] = w * p_[i] + (T(1) - w) * other.p_[i];
  return BasicBehavior(t);
}

template <class T>
BasicCorrelatorVector<T> correlators(const BasicBehavior<T>& beh) {
  if constexpr (is_exact_v<T>) {
    const auto report = check_no_signalling(beh);
    if (!report.ok()) throw SignallingError("behavior is signalling: " + report.violated.front());
  } else {
    const auto report = check_no_signalling(beh);
    if (!report.ok()) {
      throw SignallingError("behavior is signalling (max residual " + std::to_string(report.max_residual) +
                            "): " + report.violated.front());
    }
  }
  BasicCorrelatorVector<T> cv;
  for (int sa = -1; sa < 2; ++sa) {
    for (int sb = -1; sb < 2; ++sb) {
      for (int sc = -1; sc < 2; ++sc) {
        const std::array<int, 3> settings{sa, sb, sc};
        T value(0);
        for (int code = 0; code < 8; ++code) {
          const std::array<int, 3> out{(code >> 2) & 1, (code >> 1) & 1, code & 1};
          std::array<int, 3> set{};
          int sign = 1;
          for (int party = 0; party < 3; ++party) {
            set[party] = settings[party] < 0 ? 0 : settings[party];
            if (settings[party] >= 0 && out[party] == 1) sign = -sign;
          }
          const T& p = beh.at(prob_index(out, set));
          if (sign > 0) {
            value += p;
          } else {
            value -= p;
          }
        }
        cv[settings] = value;
      }
    }
  }
  return cv;
}

template <class T>
T functional_value(const BellFunctional& f, const BasicBehavior<T>& beh) {
  if (f.basis == Basis::Correlator) {
    const auto report = check_no_signalling(beh);
    if (!report.ok()) {
      throw BasisError("correlator-basis functional '" + f.id + "' applied to a signalling behavior");
    }
  }
  const DenseFunctional dense = to_dense(f);
  T value;
  if constexpr (is_exact_v<T>) {
    value = dense.constant;
    for (int i = 0; i < kProbEntries; ++i) value += dense.weights[i] * beh.at(i);
  } else {
    value = to_double(dense.constant);
    for (int i = 0; i < kProbEntries; ++i) value += to_double(dense.weights[i]) * beh.at(i);
  }
  return value;
}

}  // namespace tribell
