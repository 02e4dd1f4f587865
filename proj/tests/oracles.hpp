#pragma once

// Independent reference implementations shared by the unit tests and the
// acceptance binary.

#include <algorithm>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tribell/sdp.hpp"
#include "tribell/words.hpp"

namespace tribell::testing {

// Applies single rewrite steps (swap adjacent projectors of different parties
// into A<B<C order, merge adjacent equal projectors) until none applies.
inline Word brute_normalize(Word w) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
      if (w[i] == w[i + 1]) {
        w.erase(w.begin() + static_cast<long>(i) + 1);
        changed = true;
        break;
      }
      if (w[i].party > w[i + 1].party) {
        std::swap(w[i], w[i + 1]);
        changed = true;
        break;
      }
    }
  }
  return w;
}

inline Word random_word(std::mt19937_64& rng, int max_len) {
  std::uniform_int_distribution<int> len(0, max_len);
  std::uniform_int_distribution<int> bit(0, 1);
  std::uniform_int_distribution<int> party(0, 2);
  Word w(len(rng));
  for (auto& p : w) p = {party(rng), bit(rng)};
  return w;
}

/// Empty when canonicalize(w) agrees with the rewrite oracle, otherwise the
/// first disagreeing field.
inline std::string canonicalization_mismatch(const Word& w) {
  const Word forward = brute_normalize(w);
  const Word backward = brute_normalize(Word(w.rbegin(), w.rend()));
  const bool reverse_smaller =
      std::lexicographical_compare(backward.begin(), backward.end(), forward.begin(), forward.end());
  const MomentKey key = canonicalize(w);
  if (reduce(w).projectors() != forward) return "reduced word";
  if (key.word.projectors() != (reverse_smaller ? backward : forward)) return "class representative";
  if (key.conjugated != reverse_smaller) return "conjugation flag";
  if (key.is_real() != (forward == backward)) return "reality";
  return {};
}

struct DenseLp {
  Eigen::MatrixXd a;  // a x <= b, x >= 0
  Eigen::VectorXd b;
  Eigen::VectorXd c;  // maximize c'x
};

inline DenseLp random_lp(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dim(2, 8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> pos(0.5, 3.0);
  const int n = dim(rng);
  const int m = dim(rng) + 1;
  DenseLp lp;
  lp.a = Eigen::MatrixXd(m, n);
  lp.b = Eigen::VectorXd(m);
  lp.c = Eigen::VectorXd(n);
  for (int i = 0; i < m - 1; ++i) {
    for (int j = 0; j < n; ++j) lp.a(i, j) = u(rng);
    lp.b(i) = pos(rng);
  }
  // Boundedness: a positive row.
  for (int j = 0; j < n; ++j) lp.a(m - 1, j) = pos(rng);
  lp.b(m - 1) = 5.0 * pos(rng);
  for (int j = 0; j < n; ++j) lp.c(j) = u(rng);
  return lp;
}

// Tableau simplex with Bland's rule; b > 0 makes the origin a feasible basis.
inline double simplex_max(const DenseLp& lp) {
  const int m = static_cast<int>(lp.a.rows());
  const int n = static_cast<int>(lp.a.cols());
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m + 1, n + m + 1);
  t.topLeftCorner(m, n) = lp.a;
  t.block(0, n, m, m).setIdentity();
  t.col(n + m).head(m) = lp.b;
  t.row(m).head(n) = -lp.c.transpose();
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = n + i;
  while (true) {
    int enter = -1;
    for (int j = 0; j < n + m; ++j) {
      if (t(m, j) < -1e-12) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;
    int leave = -1;
    double best = 0.0;
    for (int i = 0; i < m; ++i) {
      if (t(i, enter) <= 1e-12) continue;
      const double ratio = t(i, n + m) / t(i, enter);
      if (leave < 0 || ratio < best - 1e-14 || (std::abs(ratio - best) <= 1e-14 && basis[i] < basis[leave])) {
        leave = i;
        best = ratio;
      }
    }
    if (leave < 0) throw std::runtime_error("unbounded");
    t.row(leave) /= t(leave, enter);
    for (int i = 0; i <= m; ++i) {
      if (i != leave) t.row(i) -= t(i, enter) * t.row(leave);
    }
    basis[leave] = enter;
  }
  return t(m, n + m);
}

/// The LP as 1x1 blocks: x_j >= 0 and b_i - a_i x >= 0.
inline sdp::StandardForm lp_form(const DenseLp& lp) {
  const int m = static_cast<int>(lp.a.rows());
  const int n = static_cast<int>(lp.a.cols());
  sdp::StandardForm p;
  p.num_vars = n;
  p.objective = lp.c;
  for (int j = 0; j < n; ++j) {
    sdp::LmiBlock blk{1, {}, {{j, {{0, 0, 1.0}}}}};
    p.blocks.push_back(blk);
  }
  for (int i = 0; i < m; ++i) {
    sdp::LmiBlock blk{1, {{0, 0, lp.b(i)}}, {}};
    for (int j = 0; j < n; ++j) blk.coefficients.push_back({j, {{0, 0, -lp.a(i, j)}}});
    p.blocks.push_back(blk);
  }
  p.eq_matrix = Eigen::MatrixXd::Zero(0, n);
  p.eq_rhs = Eigen::VectorXd::Zero(0);
  return p;
}

}  // namespace tribell::testing
