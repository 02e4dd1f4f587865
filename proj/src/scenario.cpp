#include "tribell/scenario.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace tribell {

std::vector<std::string> validate_probabilities(std::span<const double, kProbEntries> table) {
  std::vector<std::string> problems;
  for (int i = 0; i < kProbEntries; ++i) {
    if (!std::isfinite(table[i])) {
      problems.push_back("entry " + std::to_string(i) + " not finite");
    } else if (table[i] < -kRangeTol || table[i] > 1.0 + kRangeTol) {
      problems.push_back("entry " + std::to_string(i) + " out of range");
    }
  }
  for (int s = 0; s < 8; ++s) {
    double sum = 0.0;
    for (int o = 0; o < 8; ++o) sum += table[(s << 3) | o];
    if (!(std::abs(sum - 1.0) <= kNormalizationTol)) {
      problems.push_back("settings slice " + std::to_string(s) + " not normalized");
    }
  }
  return problems;
}

Behavior to_floating(const ExactBehavior& exact) {
  Behavior::Table t{};
  for (int i = 0; i < kProbEntries; ++i) t[i] = to_double(exact.at(i));
  return Behavior::from_probabilities(t);
}

// ---------------------------------------------------------------------------
// No-signalling equalities

namespace {

std::string settings_label(const std::array<int, 3>& s) {
  std::string out;
  for (int v : s) out += v < 0 ? '*' : static_cast<char>('0' + v);
  return out;
}

// Coefficients of the marginal over parties with settings[p] < 0, using the
// given settings for those parties.
void add_marginal(std::map<int, int>& acc, const std::array<int, 3>& outcomes, const std::array<int, 3>& kept,
                  const std::array<int, 3>& traced_settings, int sign) {
  for (int code = 0; code < 8; ++code) {
    std::array<int, 3> out{};
    std::array<int, 3> set{};
    bool keep = true;
    for (int p = 0; p < 3; ++p) {
      const int o = (code >> (2 - p)) & 1;
      out[p] = o;
      if (kept[p] >= 0) {
        set[p] = kept[p];
        if (o != outcomes[p]) keep = false;
      } else {
        set[p] = traced_settings[p];
      }
    }
    if (keep) acc[prob_index(out, set)] += sign;
  }
}

LinearEquality make_equality(const std::map<int, int>& acc, std::string label) {
  LinearEquality eq;
  eq.label = std::move(label);
  for (auto [idx, coef] : acc) {
    if (coef != 0) eq.terms.emplace_back(idx, coef);
  }
  return eq;
}

std::vector<LinearEquality> build_full() {
  std::vector<LinearEquality> eqs;
  // Two-party marginals independent of the third party's setting.
  for (int traced = 2; traced >= 0; --traced) {
    const int p = traced == 0 ? 1 : 0;
    const int q = traced == 2 ? 1 : 2;
    for (int sp = 0; sp < 2; ++sp) {
      for (int sq = 0; sq < 2; ++sq) {
        for (int op = 0; op < 2; ++op) {
          for (int oq = 0; oq < 2; ++oq) {
            std::array<int, 3> kept{-1, -1, -1};
            std::array<int, 3> outcomes{0, 0, 0};
            kept[p] = sp;
            kept[q] = sq;
            outcomes[p] = op;
            outcomes[q] = oq;
            std::map<int, int> acc;
            std::array<int, 3> t0{0, 0, 0};
            std::array<int, 3> t1{0, 0, 0};
            t1[traced] = 1;
            add_marginal(acc, outcomes, kept, t0, +1);
            add_marginal(acc, outcomes, kept, t1, -1);
            std::ostringstream label;
            label << "p_" << party_name(p) << party_name(q) << "(" << op << oq << "|" << sp << sq << ") depends on "
                  << party_name(traced) << "'s setting";
            eqs.push_back(make_equality(acc, label.str()));
          }
        }
      }
    }
  }
  // One-party marginals independent of the other two settings.
  for (int p = 0; p < 3; ++p) {
    for (int sp = 0; sp < 2; ++sp) {
      for (int op = 0; op < 2; ++op) {
        for (int other = 1; other < 4; ++other) {
          std::array<int, 3> kept{-1, -1, -1};
          std::array<int, 3> outcomes{0, 0, 0};
          kept[p] = sp;
          outcomes[p] = op;
          std::array<int, 3> t1{0, 0, 0};
          int bit = 1;
          for (int r = 0; r < 3; ++r) {
            if (r == p) continue;
            t1[r] = (other & bit) ? 1 : 0;
            bit <<= 1;
          }
          std::map<int, int> acc;
          add_marginal(acc, outcomes, kept, {0, 0, 0}, +1);
          add_marginal(acc, outcomes, kept, t1, -1);
          std::ostringstream label;
          label << "p_" << party_name(p) << "(" << op << "|" << sp << ") differs between settings "
                << settings_label({t1[0], t1[1], t1[2]}) << " and 000 of the other parties";
          eqs.push_back(make_equality(acc, label.str()));
        }
      }
    }
  }
  return eqs;
}

// Greedy exact row reduction: keeps rows that increase the rank.
std::vector<LinearEquality> select_independent(const std::vector<LinearEquality>& rows) {
  std::vector<std::array<Rational, kProbEntries>> basis;
  std::vector<int> pivots;
  std::vector<LinearEquality> kept;
  for (const auto& eq : rows) {
    std::array<Rational, kProbEntries> v{};
    for (auto [idx, coef] : eq.terms) v[idx] += Rational(coef);
    for (std::size_t k = 0; k < basis.size(); ++k) {
      const int piv = pivots[k];
      if (v[piv] != Rational(0)) {
        const Rational factor = v[piv] / basis[k][piv];
        for (int i = 0; i < kProbEntries; ++i) v[i] -= factor * basis[k][i];
      }
    }
    const auto it = std::find_if(v.begin(), v.end(), [](const Rational& r) { return r != Rational(0); });
    if (it == v.end()) continue;
    pivots.push_back(static_cast<int>(it - v.begin()));
    basis.push_back(v);
    kept.push_back(eq);
  }
  return kept;
}

std::vector<LinearEquality> build_minimal() {
  std::vector<LinearEquality> rows;
  for (int s = 0; s < 8; ++s) {
    LinearEquality eq;
    for (int o = 0; o < 8; ++o) eq.terms.emplace_back((s << 3) | o, 1);
    eq.label = "normalization of settings slice " + std::to_string(s);
    rows.push_back(eq);
  }
  const auto& full = ns_equalities_full();
  rows.insert(rows.end(), full.begin(), full.end());
  return select_independent(rows);
}

}  // namespace

const std::vector<LinearEquality>& ns_equalities_full() {
  static const std::vector<LinearEquality> eqs = build_full();
  return eqs;
}

const std::vector<LinearEquality>& ns_equalities_minimal() {
  static const std::vector<LinearEquality> eqs = build_minimal();
  return eqs;
}

SignallingReport check_no_signalling(const Behavior& beh, double tol) {
  SignallingReport report;
  for (const auto& eq : ns_equalities_full()) {
    double r = 0.0;
    for (auto [idx, coef] : eq.terms) r += coef * beh.at(idx);
    r = std::abs(r);
    report.max_residual = std::max(report.max_residual, r);
    if (r > tol) report.violated.push_back(eq.label);
  }
  return report;
}

SignallingReport check_no_signalling(const ExactBehavior& beh) {
  SignallingReport report;
  for (const auto& eq : ns_equalities_full()) {
    Rational r(0);
    for (auto [idx, coef] : eq.terms) r += Rational(coef) * beh.at(idx);
    if (r != Rational(0)) {
      report.violated.push_back(eq.label);
      report.max_residual = std::max(report.max_residual, std::abs(to_double(r)));
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Monomials

Monomial Monomial::correlator(const std::array<int, 3>& settings) {
  Monomial m;
  m.kind = Kind::Correlator;
  m.settings = settings;
  if (m.order() == 0) m.kind = Kind::Unit;
  return m;
}

Monomial Monomial::probability(const std::array<int, 3>& outcomes, const std::array<int, 3>& settings) {
  Monomial m;
  m.kind = Kind::Probability;
  m.settings = settings;
  for (int p = 0; p < 3; ++p) m.outcomes[p] = settings[p] < 0 ? -1 : outcomes[p];
  if (m.order() == 0) m = Monomial{};
  return m;
}

int Monomial::order() const {
  return static_cast<int>(std::count_if(settings.begin(), settings.end(), [](int s) { return s >= 0; }));
}

namespace {

[[noreturn]] void bad_monomial(std::string_view text, const std::string& why) {
  throw ParseError("", "malformed monomial '" + std::string(text) + "': " + why);
}

int parse_bit(char ch, std::string_view text) {
  if (ch != '0' && ch != '1') bad_monomial(text, "expected 0 or 1");
  return ch - '0';
}

}  // namespace

Monomial parse_monomial(std::string_view text) {
  if (text == "1") return Monomial::unit();
  if (text.size() < 4 || text[1] != '(' || text.back() != ')') bad_monomial(text, "expected 1, E(...) or P(...)");
  const std::string_view body = text.substr(2, text.size() - 3);
  if (text[0] == 'E') {
    if (body.empty() || body.size() % 2 != 0) bad_monomial(text, "expected party/setting pairs");
    std::array<int, 3> settings{-1, -1, -1};
    int last = -1;
    for (std::size_t i = 0; i < body.size(); i += 2) {
      const int party = body[i] - 'A';
      if (party < 0 || party > 2) bad_monomial(text, "unknown party");
      if (party <= last) bad_monomial(text, "parties must appear once, in order A,B,C");
      last = party;
      settings[party] = parse_bit(body[i + 1], text);
    }
    return Monomial::correlator(settings);
  }
  if (text[0] == 'P') {
    const auto bar = body.find('|');
    if (bar == std::string_view::npos) bad_monomial(text, "missing '|'");
    std::string_view left = body.substr(0, bar);
    const std::string_view right = body.substr(bar + 1);
    std::vector<int> parties;
    const auto colon = left.find(':');
    if (colon == std::string_view::npos) {
      parties = {0, 1, 2};
    } else {
      const auto names = left.substr(0, colon);
      left = left.substr(colon + 1);
      int last = -1;
      for (char ch : names) {
        const int party = ch - 'A';
        if (party < 0 || party > 2) bad_monomial(text, "unknown party");
        if (party <= last) bad_monomial(text, "parties must appear once, in order A,B,C");
        last = party;
        parties.push_back(party);
      }
      if (parties.empty()) bad_monomial(text, "no parties");
    }
    if (left.size() != parties.size() || right.size() != parties.size()) {
      bad_monomial(text, "outcome/setting count does not match parties");
    }
    std::array<int, 3> out{-1, -1, -1};
    std::array<int, 3> set{-1, -1, -1};
    for (std::size_t k = 0; k < parties.size(); ++k) {
      out[parties[k]] = parse_bit(left[k], text);
      set[parties[k]] = parse_bit(right[k], text);
    }
    return Monomial::probability(out, set);
  }
  bad_monomial(text, "expected 1, E(...) or P(...)");
}

std::string to_string(const Monomial& m) {
  switch (m.kind) {
    case Monomial::Kind::Unit:
      return "1";
    case Monomial::Kind::Correlator: {
      std::string s = "E(";
      for (int p = 0; p < 3; ++p) {
        if (m.settings[p] >= 0) {
          s += party_name(p);
          s += static_cast<char>('0' + m.settings[p]);
        }
      }
      return s + ")";
    }
    case Monomial::Kind::Probability: {
      std::string names;
      std::string outs;
      std::string sets;
      for (int p = 0; p < 3; ++p) {
        if (m.settings[p] >= 0) {
          names += party_name(p);
          outs += static_cast<char>('0' + m.outcomes[p]);
          sets += static_cast<char>('0' + m.settings[p]);
        }
      }
      if (names.size() == 3) return "P(" + outs + "|" + sets + ")";
      return "P(" + names + ":" + outs + "|" + sets + ")";
    }
  }
  return "?";
}

std::string to_string(Basis basis) { return basis == Basis::Correlator ? "correlator" : "probability"; }

// ---------------------------------------------------------------------------
// Basis conversion

namespace {

// Adds coef * monomial, expanded over full probabilities, into `weights`.
void expand_into(const Monomial& m, const Rational& coef, DenseFunctional& out) {
  if (m.kind == Monomial::Kind::Unit) {
    out.constant += coef;
    return;
  }
  for (int code = 0; code < 8; ++code) {
    const std::array<int, 3> o{(code >> 2) & 1, (code >> 1) & 1, code & 1};
    std::array<int, 3> set{};
    int sign = 1;
    bool keep = true;
    for (int p = 0; p < 3; ++p) {
      set[p] = m.settings[p] < 0 ? 0 : m.settings[p];
      if (m.settings[p] < 0) continue;
      if (m.kind == Monomial::Kind::Correlator) {
        if (o[p] == 1) sign = -sign;
      } else if (o[p] != m.outcomes[p]) {
        keep = false;
      }
    }
    if (keep) out.weights[prob_index(o, set)] += sign > 0 ? coef : -coef;
  }
}

}  // namespace

DenseFunctional to_dense(const BellFunctional& f) {
  DenseFunctional dense;
  for (const auto& term : f.terms) expand_into(term.monomial, term.coefficient, dense);
  return dense;
}

BellFunctional to_probability_basis(const BellFunctional& f) {
  const DenseFunctional dense = to_dense(f);
  BellFunctional out;
  out.id = f.id;
  out.basis = Basis::Probability;
  out.local_bound = f.local_bound;
  out.notes = f.notes;
  if (dense.constant != Rational(0)) out.terms.push_back({Monomial::unit(), dense.constant});
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      for (int z = 0; z < 2; ++z) {
        for (int code = 0; code < 8; ++code) {
          const std::array<int, 3> o{(code >> 2) & 1, (code >> 1) & 1, code & 1};
          const std::array<int, 3> s{x, y, z};
          const Rational& w = dense.weights[prob_index(o, s)];
          if (w != Rational(0)) out.terms.push_back({Monomial::probability(o, s), w});
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Deterministic strategies

int DeterministicStrategy::encoding() const {
  int code = 0;
  for (int p = 0; p < 3; ++p) {
    for (int s = 0; s < 2; ++s) code = (code << 1) | outcome[p][s];
  }
  return code;
}

DeterministicStrategy DeterministicStrategy::from_encoding(int code) {
  DeterministicStrategy d;
  for (int p = 2; p >= 0; --p) {
    for (int s = 1; s >= 0; --s) {
      d.outcome[p][s] = code & 1;
      code >>= 1;
    }
  }
  return d;
}

ExactBehavior DeterministicStrategy::behavior() const {
  ExactBehavior::Table t{};
  for (auto& v : t) v = Rational(0);
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      for (int z = 0; z < 2; ++z) {
        t[prob_index(outcome[0][x], outcome[1][y], outcome[2][z], x, y, z)] = Rational(1);
      }
    }
  }
  return ExactBehavior::from_probabilities(t);
}

std::string DeterministicStrategy::to_string() const {
  std::string s;
  for (int p = 0; p < 3; ++p) {
    s += party_name(p);
    s += ':';
    s += static_cast<char>('0' + outcome[p][0]);
    s += static_cast<char>('0' + outcome[p][1]);
    if (p < 2) s += ' ';
  }
  return s;
}

}  // namespace tribell
