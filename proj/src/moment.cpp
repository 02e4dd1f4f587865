#include "tribell/moment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include "tribell/errors.hpp"

namespace tribell {

// ---------------------------------------------------------------------------
// Generating sets

std::string GeneratingSet::descriptor() const {
  return (family == SetFamily::Npa ? "npa(" : "local(") + std::to_string(level) + ")";
}

namespace {

std::vector<LocalWord> alternating_words(int max_length) {
  std::vector<LocalWord> out{LocalWord{}};
  for (int len = 1; len <= max_length; ++len) {
    for (int first = 0; first < 2; ++first) {
      out.push_back({static_cast<std::uint8_t>(len), static_cast<std::uint8_t>(first)});
    }
  }
  return out;
}

}  // namespace

GeneratingSet npa_set(int level) {
  if (level < 1 || level > kMaxNpaLevel) {
    throw UnsupportedLevel("npa level " + std::to_string(level) + " is not supported (1.." +
                           std::to_string(kMaxNpaLevel) + ")");
  }
  GeneratingSet set;
  set.family = SetFamily::Npa;
  set.level = level;

  // All raw words up to the level, reduced; a reduced word may be shorter
  // than its raw form and is then kept at its reduced length.
  std::vector<Projector> letters;
  for (int p = 0; p < 3; ++p) {
    for (int s = 0; s < 2; ++s) letters.push_back({p, s});
  }
  std::vector<CanonicalWord> found;
  std::vector<Word> frontier{Word{}};
  for (int len = 0; len <= level; ++len) {
    std::vector<Word> next;
    for (const auto& w : frontier) {
      const CanonicalWord r = reduce(w);
      if (r.length() == len &&
          std::find(found.begin(), found.end(), r) == found.end()) {
        found.push_back(r);
      }
      if (len < level) {
        for (const auto& l : letters) {
          Word x = w;
          x.push_back(l);
          next.push_back(std::move(x));
        }
      }
    }
    frontier = std::move(next);
  }
  // Identity, then by length; within a length, single-party-block words
  // after cross-party words, each group lexicographic.
  auto parties_used = [](const CanonicalWord& w) {
    int n = 0;
    for (const auto& p : w.parts) n += p.length > 0 ? 1 : 0;
    return n;
  };
  std::stable_sort(found.begin(), found.end(), [&](const CanonicalWord& a, const CanonicalWord& b) {
    if (a.length() != b.length()) return a.length() < b.length();
    if (parties_used(a) != parties_used(b)) return parties_used(a) > parties_used(b);
    return word_less(a, b);
  });
  set.words = std::move(found);
  return set;
}

GeneratingSet local_level_set(int level) {
  if (level < 1 || level > kMaxLocalLevel) {
    throw UnsupportedLevel("local level " + std::to_string(level) + " is not supported (1.." +
                           std::to_string(kMaxLocalLevel) + ")");
  }
  GeneratingSet set;
  set.family = SetFamily::LocalLevel;
  set.level = level;
  set.local_words = alternating_words(level);
  const auto& lw = set.local_words;
  set.words.reserve(lw.size() * lw.size() * lw.size());
  for (const auto& a : lw) {
    for (const auto& b : lw) {
      for (const auto& c : lw) set.words.push_back(CanonicalWord{{a, b, c}});
    }
  }
  return set;
}

GeneratingSet generating_set(SetFamily family, int level) {
  return family == SetFamily::Npa ? npa_set(level) : local_level_set(level);
}

GeneratingSet parse_set(const std::string& tag) {
  std::string t;
  for (char ch : tag) {
    if (!std::isspace(static_cast<unsigned char>(ch))) t += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  }
  if (t == "aq") return local_level_set(1);
  auto level_of = [&](const std::string& prefix) -> int {
    std::string rest = t.substr(prefix.size());
    if (rest.size() >= 2 && rest.front() == '(' && rest.back() == ')') rest = rest.substr(1, rest.size() - 2);
    if (rest.empty() || !std::all_of(rest.begin(), rest.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      throw ParseError("set", "malformed set tag '" + tag + "'");
    }
    return std::stoi(rest);
  };
  if (t.rfind("npa", 0) == 0) return npa_set(level_of("npa"));
  if (t.rfind("local", 0) == 0) return local_level_set(level_of("local"));
  throw ParseError("set", "unknown set tag '" + tag + "'");
}

// ---------------------------------------------------------------------------
// Moment classes and blocks

MomentClasses::MomentClasses() {
  words_.push_back(CanonicalWord{});
  index_.emplace(CanonicalWord{}.code(), 0);
}

MomentRef MomentClasses::intern(const CanonicalWord& w) {
  const MomentKey key = canonicalize(w);
  const auto [it, inserted] = index_.emplace(key.word.code(), static_cast<int>(words_.size()));
  if (inserted) words_.push_back(key.word);
  // A palindromic word is its own conjugate.
  return {it->second, key.conjugated && !key.word.palindromic()};
}

int MomentClasses::find(const CanonicalWord& canonical) const {
  const auto it = index_.find(canonicalize(canonical).word.code());
  return it == index_.end() ? -1 : it->second;
}

const MomentRef& HermitianBlock::at(int i, int j) const {
  // Row-major upper triangle offset.
  const std::size_t off = static_cast<std::size_t>(i) * dim - static_cast<std::size_t>(i) * (i - 1) / 2;
  return entries[off + (j - i)];
}

std::string ppt_tag(PartyMask subset) {
  std::string s = "T_";
  for (int p = 0; p < 3; ++p) {
    if (subset & (1u << p)) s += party_name(p);
  }
  return s;
}

PartyMask parse_ppt(const std::string& text) {
  PartyMask mask = 0;
  std::string token;
  auto flush = [&]() {
    std::string t;
    for (char c : token) {
      if (!std::isspace(static_cast<unsigned char>(c))) t += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    token.clear();
    if (t.empty()) return;
    if (t == "ALL") {
      mask |= 7u;
    } else if (t.size() == 1 && t[0] >= 'A' && t[0] <= 'C') {
      mask |= 1u << (t[0] - 'A');
    } else if (t.size() == 3 && t[0] == 'T' && t[1] == '_' && t[2] >= 'A' && t[2] <= 'C') {
      mask |= 1u << (t[2] - 'A');
    } else {
      throw ParseError("ppt", "unknown partial transpose tag '" + t + "'");
    }
  };
  for (char c : text) {
    if (c == ',') {
      flush();
    } else {
      token += c;
    }
  }
  flush();
  return mask;
}

namespace {

CanonicalWord adjoint_times(const CanonicalWord& u, const CanonicalWord& v) {
  CanonicalWord w;
  for (int p = 0; p < 3; ++p) w.parts[p] = local_adjoint_product(u.parts[p], v.parts[p]);
  return w;
}

HermitianBlock make_block(const GeneratingSet& set, PartyMask subset, MomentClasses& classes) {
  HermitianBlock blk;
  blk.dim = set.size();
  blk.tag = subset == 0 ? "base" : ppt_tag(subset);
  const int n = blk.dim;
  blk.entries.reserve(static_cast<std::size_t>(n) * (n + 1) / 2);
  const int l = static_cast<int>(set.local_words.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      if (subset == 0) {
        blk.entries.push_back(classes.intern(adjoint_times(set.words[i], set.words[j])));
        continue;
      }
      std::array<int, 3> ii{i / (l * l), (i / l) % l, i % l};
      std::array<int, 3> jj{j / (l * l), (j / l) % l, j % l};
      CanonicalWord w;
      for (int p = 0; p < 3; ++p) {
        if (subset & (1u << p)) std::swap(ii[p], jj[p]);
        w.parts[p] = local_adjoint_product(set.local_words[ii[p]], set.local_words[jj[p]]);
      }
      blk.entries.push_back(classes.intern(w));
    }
  }
  return blk;
}

}  // namespace

HermitianBlock moment_block(const GeneratingSet& set, MomentClasses& classes) { return make_block(set, 0, classes); }

HermitianBlock ppt_block(const GeneratingSet& set, PartyMask subset, MomentClasses& classes) {
  if (!set.product_structured()) {
    throw StructureError("partial transposition needs a party-product generating set; " + set.descriptor() +
                         " has none");
  }
  if (subset == 0 || subset >= 7) throw StructureError("partial transpose subset must be nonempty and proper");
  return make_block(set, subset, classes);
}

MomentCensus moment_census(const GeneratingSet& set) {
  MomentCensus census;
  census.set_size = set.size();
  MomentClasses classes;
  const int n = set.size();
  if (set.product_structured()) {
    // Per-party products are tabulated once.
    const int l = static_cast<int>(set.local_words.size());
    std::vector<LocalWord> table(static_cast<std::size_t>(l) * l);
    for (int a = 0; a < l; ++a) {
      for (int b = 0; b < l; ++b) table[a * l + b] = local_adjoint_product(set.local_words[a], set.local_words[b]);
    }
    for (int i = 0; i < n; ++i) {
      const int ia = i / (l * l);
      const int ib = (i / l) % l;
      const int ic = i % l;
      for (int j = i; j < n; ++j) {
        const CanonicalWord w{{table[ia * l + j / (l * l)], table[ib * l + (j / l) % l], table[ic * l + j % l]}};
        classes.intern(w);
      }
    }
  } else {
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) classes.intern(adjoint_times(set.words[i], set.words[j]));
    }
  }
  census.classes = classes.size();
  for (int c = 0; c < classes.size(); ++c) {
    if (classes.word(c).palindromic()) {
      ++census.real_classes;
    } else {
      ++census.complex_classes;
    }
  }
  return census;
}

// ---------------------------------------------------------------------------
// Behavior linkage

CanonicalWord behavior_word(const std::array<int, 3>& settings) {
  CanonicalWord w;
  for (int p = 0; p < 3; ++p) {
    if (settings[p] >= 0) w.parts[p] = {1, static_cast<std::uint8_t>(settings[p])};
  }
  return w;
}

BehaviorLinkage behavior_constraints(const MomentClasses& classes) {
  BehaviorLinkage link;
  for (int idx = 0; idx < kProbEntries; ++idx) {
    const std::array<int, 3> out{(idx >> 2) & 1, (idx >> 1) & 1, idx & 1};
    const std::array<int, 3> set{(idx >> 5) & 1, (idx >> 4) & 1, (idx >> 3) & 1};
    // Pi_1 = 1 - Pi_0: parties with outcome 0 always keep their projector,
    // outcome-1 parties contribute either 1 or -Pi_0.
    for (int u = 0; u < 8; ++u) {
      bool ok = true;
      int sign = 1;
      std::array<int, 3> settings{-1, -1, -1};
      for (int p = 0; p < 3; ++p) {
        const bool in = (u >> p) & 1;
        if (out[p] == 0 && !in) ok = false;
        if (in) {
          settings[p] = set[p];
          if (out[p] == 1) sign = -sign;
        }
      }
      if (!ok) continue;
      const CanonicalWord w = behavior_word(settings);
      const int cls = classes.find(w);
      if (cls < 0) {
        throw IncompleteSet("moment <" + to_string(w) + "> needed for p(" + std::to_string(out[0]) +
                            std::to_string(out[1]) + std::to_string(out[2]) + "|" + std::to_string(set[0]) +
                            std::to_string(set[1]) + std::to_string(set[2]) + ") is not in the moment matrix");
      }
      link.terms[idx].emplace_back(cls, sign);
    }
  }
  return link;
}

BehaviorLinkage behavior_constraints(const GeneratingSet& set) {
  MomentClasses classes;
  moment_block(set, classes);
  return behavior_constraints(classes);
}

// ---------------------------------------------------------------------------
// Assembly

sdp::LmiBlock realify(const HermitianBlock& block, const std::vector<int>& re_var, const std::vector<int>& im_var,
                      bool doubled, int margin_var) {
  const int n = block.dim;
  sdp::LmiBlock out;
  out.dim = doubled ? 2 * n : n;
  std::map<int, sdp::SparseSymmetric> coef;
  auto put = [&](int var, int r, int c, double v) {
    if (var < 0) {
      out.constant.push_back({r, c, v});
    } else {
      coef[var].push_back({r, c, v});
    }
  };
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const MomentRef& ref = block.at(i, j);
      put(re_var[ref.cls], i, j, 1.0);
      if (!doubled) continue;
      put(re_var[ref.cls], n + i, n + j, 1.0);
      const int im = im_var[ref.cls];
      if (im >= 0 && i != j) {
        // H_ij = x + i*s*y; the lower-left copy holds Im H at (n+i, j) and
        // (n+j, i) = -Im H_ij.
        const double s = ref.conjugated ? -1.0 : 1.0;
        put(im, j, n + i, s);
        put(im, i, n + j, -s);
      }
    }
  }
  if (margin_var >= 0) {
    for (int i = 0; i < out.dim; ++i) coef[margin_var].push_back({i, i, -1.0});
  }
  for (auto& [var, m] : coef) out.coefficients.emplace_back(var, std::move(m));
  return out;
}

bool MomentProblem::requires_override() const {
  return set.family == SetFamily::LocalLevel && set.level > kMaxSolvableLocalLevel;
}

std::string MomentProblem::descriptor() const {
  std::string d = set.descriptor();
  for (int p = 0; p < 3; ++p) {
    if (ppt & (1u << p)) d += std::string("+") + ppt_tag(1u << p);
  }
  if (complex_moments) d += "+complex";
  return d;
}

double MomentProblem::moment(int cls, const Eigen::VectorXd& y) const {
  return re_var[cls] < 0 ? 1.0 : y(re_var[cls]);
}

Behavior MomentProblem::behavior(const Eigen::VectorXd& y) const {
  Behavior::Table t{};
  for (int i = 0; i < kProbEntries; ++i) {
    double v = 0.0;
    for (const auto& [cls, coef] : linkage.terms[i]) v += coef * moment(cls, y);
    if (v < -1e-7 || v > 1.0 + 1e-7) {
      throw SolverError("moment point gives probability " + std::to_string(v) + " at entry " + std::to_string(i));
    }
    t[i] = std::clamp(v, 0.0, 1.0);
  }
  // Renormalize away the clipping so the table passes the 1e-9 gate.
  for (int s = 0; s < 8; ++s) {
    double sum = 0.0;
    for (int o = 0; o < 8; ++o) sum += t[(s << 3) | o];
    for (int o = 0; o < 8; ++o) t[(s << 3) | o] /= sum;
  }
  return Behavior::from_probabilities(t);
}

MomentProblem assemble(const GeneratingSet& set, const BellFunctional& objective, const AssembleOptions& options) {
  MomentProblem mp;
  mp.set = set;
  mp.ppt = options.ppt;
  mp.complex_moments = options.complex_moments;
  mp.membership = options.membership.has_value();
  if (options.ppt != 0 && !set.product_structured()) {
    throw StructureError("partial transposition needs a party-product generating set; " + set.descriptor() +
                         " has none");
  }
  if (options.ppt >= 8) throw StructureError("partial transpose mask out of range");

  mp.blocks.push_back(moment_block(set, mp.classes));
  for (int p = 0; p < 3; ++p) {
    if (options.ppt & (1u << p)) mp.blocks.push_back(ppt_block(set, 1u << p, mp.classes));
  }
  const int matrix_classes = mp.classes.size();

  // Sets without three-body moments (npa(1)) get them as extra scalars,
  // constrained only through positivity of the probabilities.
  bool incomplete = false;
  try {
    mp.linkage = behavior_constraints(mp.classes);
  } catch (const IncompleteSet&) {
    incomplete = true;
  }
  if (incomplete) {
    for (int u = 1; u < 8; ++u) {
      std::array<int, 3> settings{-1, -1, -1};
      for (int s = 0; s < 8; ++s) {
        for (int p = 0; p < 3; ++p) settings[p] = (u >> p) & 1 ? (s >> p) & 1 : -1;
        mp.classes.intern(behavior_word(settings));
      }
    }
    mp.extra_classes = mp.classes.size() - matrix_classes;
    mp.linkage = behavior_constraints(mp.classes);
  }

  // Variables: real parts of every non-identity class, then imaginary parts.
  const int nc = mp.classes.size();
  mp.re_var.assign(nc, -1);
  mp.im_var.assign(nc, -1);
  int nv = 0;
  for (int c = 1; c < nc; ++c) mp.re_var[c] = nv++;
  if (options.complex_moments) {
    for (int c = 1; c < nc; ++c) {
      if (!mp.classes.word(c).palindromic()) mp.im_var[c] = nv++;
    }
  }
  if (mp.membership) mp.margin_var = nv++;

  auto& sdp = mp.sdp;
  sdp.num_vars = nv;
  for (const auto& blk : mp.blocks) {
    sdp.blocks.push_back(realify(blk, mp.re_var, mp.im_var, options.complex_moments, mp.margin_var));
  }
  // The behavior is a probability table. Sets whose matrix contains every
  // one-projector-per-party product enforce p >= 0 on the diagonal; below
  // npa(3) the 64 probabilities are constrained separately.
  const bool explicit_positivity = incomplete || (set.family == SetFamily::Npa && set.level < 3);
  if (explicit_positivity) {
    for (int i = 0; i < kProbEntries; ++i) {
      sdp::LmiBlock b;
      b.dim = 1;
      std::map<int, double> coef;
      for (const auto& [cls, k] : mp.linkage.terms[i]) {
        if (mp.re_var[cls] < 0) {
          b.constant.push_back({0, 0, static_cast<double>(k)});
        } else {
          coef[mp.re_var[cls]] += k;
        }
      }
      if (mp.margin_var >= 0) coef[mp.margin_var] -= 1.0;
      for (const auto& [var, v] : coef) {
        if (v != 0.0) b.coefficients.push_back({var, {{0, 0, v}}});
      }
      sdp.blocks.push_back(std::move(b));
    }
  }

  sdp.objective = Eigen::VectorXd::Zero(nv);
  sdp.objective_constant = 0.0;
  Eigen::VectorXd y0(nv);
  // Moments of the maximally mixed point: 2^-length of the reduced word.
  for (int c = 1; c < nc; ++c) y0(mp.re_var[c]) = std::ldexp(1.0, -mp.classes.word(c).length());
  for (int c = 1; c < nc; ++c) {
    if (mp.im_var[c] >= 0) y0(mp.im_var[c]) = 0.0;
  }

  if (mp.membership) {
    const Behavior& beh = *options.membership;
    const auto report = check_no_signalling(beh);
    if (!report.ok()) throw SignallingError("membership behavior is signalling: " + report.violated.front());
    sdp.objective(mp.margin_var) = 1.0;
    std::vector<std::pair<int, double>> pins;
    for (int u = 1; u < 8; ++u) {
      for (int s = 0; s < 8; ++s) {
        std::array<int, 3> settings{-1, -1, -1};
        std::array<int, 3> outcomes{-1, -1, -1};
        for (int p = 0; p < 3; ++p) {
          if ((u >> p) & 1) {
            settings[p] = (s >> p) & 1;
            outcomes[p] = 0;
          }
        }
        const int cls = mp.classes.find(behavior_word(settings));
        const int var = mp.re_var[cls];
        if (std::any_of(pins.begin(), pins.end(), [&](const auto& pin) { return pin.first == var; })) continue;
        pins.emplace_back(var, beh.marginal(outcomes, settings));
      }
    }
    sdp.eq_matrix = Eigen::MatrixXd::Zero(static_cast<int>(pins.size()), nv);
    sdp.eq_rhs = Eigen::VectorXd::Zero(static_cast<int>(pins.size()));
    for (std::size_t k = 0; k < pins.size(); ++k) {
      sdp.eq_matrix(static_cast<int>(k), pins[k].first) = 1.0;
      sdp.eq_rhs(static_cast<int>(k)) = pins[k].second;
      y0(pins[k].first) = pins[k].second;
    }
    // Start with a margin strictly below the smallest eigenvalue.
    double lmin = 0.0;
    y0(mp.margin_var) = 0.0;
    for (const auto& b : sdp.blocks) {
      const Eigen::MatrixXd f = sdp::evaluate_block(b, y0);
      lmin = std::min(lmin, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(f, Eigen::EigenvaluesOnly).eigenvalues()(0));
    }
    y0(mp.margin_var) = lmin - 1.0;
  } else {
    sdp.eq_matrix = Eigen::MatrixXd::Zero(0, nv);
    sdp.eq_rhs = Eigen::VectorXd::Zero(0);
    const DenseFunctional dense = to_dense(objective);
    sdp.objective_constant = to_double(dense.constant);
    for (int i = 0; i < kProbEntries; ++i) {
      const double w = to_double(dense.weights[i]);
      if (w == 0.0) continue;
      for (const auto& [cls, k] : mp.linkage.terms[i]) {
        if (mp.re_var[cls] < 0) {
          sdp.objective_constant += w * k;
        } else {
          sdp.objective(mp.re_var[cls]) += w * k;
        }
      }
    }
  }
  sdp.initial_y = y0;
  return mp;
}

sdp::Solution solve(const MomentProblem& problem, const sdp::SolverConfig& config) {
  if (problem.requires_override() && !config.allow_large) {
    throw UnsupportedLevel("solving " + problem.descriptor() + " needs the large-problem override");
  }
  return sdp::solve(problem.sdp, config);
}

MembershipResult membership(const GeneratingSet& set, const Behavior& behavior, PartyMask ppt,
                            const sdp::SolverConfig& config) {
  MembershipResult res;
  const auto report = check_no_signalling(behavior);
  if (!report.ok()) {
    res.member = false;
    res.margin = -std::numeric_limits<double>::infinity();
    res.reason = "signalling: " + report.violated.front();
    return res;
  }
  AssembleOptions opt;
  opt.ppt = ppt;
  opt.membership = behavior;
  const MomentProblem mp = assemble(set, BellFunctional{}, opt);
  res.solution = solve(mp, config);
  res.margin = res.solution.value;
  if (res.solution.status != sdp::Status::Optimal) {
    throw SolverError("membership solve for " + mp.descriptor() + " ended with status " +
                      sdp::to_string(res.solution.status));
  }
  res.member = res.margin >= -kMembershipTol;
  res.reason = res.member ? "feasible" : "smallest eigenvalue margin " + std::to_string(res.margin);
  return res;
}

}  // namespace tribell
