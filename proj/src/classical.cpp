#include "tribell/classical.hpp"

#include "tribell/errors.hpp"

namespace tribell {

std::vector<DeterministicStrategy> enumerate_deterministic() {
  std::vector<DeterministicStrategy> out;
  out.reserve(64);
  for (int code = 0; code < 64; ++code) out.push_back(DeterministicStrategy::from_encoding(code));
  return out;
}

BoundResult local_bound(const BellFunctional& f) {
  const DenseFunctional dense = to_dense(f);
  BoundResult res;
  res.set = ClassicalSet::L;
  for (const auto& s : enumerate_deterministic()) {
    // A deterministic behavior puts weight 1 on exactly one outcome per
    // settings slice.
    Rational v = dense.constant;
    for (int set = 0; set < 8; ++set) {
      const std::array<int, 3> xyz{(set >> 2) & 1, (set >> 1) & 1, set & 1};
      const std::array<int, 3> out{s.outcome[0][xyz[0]], s.outcome[1][xyz[1]], s.outcome[2][xyz[2]]};
      v += dense.weights[prob_index(out, xyz)];
    }
    if (!res.exact || v > *res.exact) {
      res.exact = v;
      res.strategy = s;
    }
  }
  res.value = to_double(*res.exact);
  res.dual_value = res.value;
  return res;
}

sdp::StandardForm ns_program(const BellFunctional& f) {
  const DenseFunctional dense = to_dense(f);
  sdp::StandardForm p;
  p.num_vars = kProbEntries;
  p.objective = Eigen::VectorXd(kProbEntries);
  for (int i = 0; i < kProbEntries; ++i) p.objective(i) = to_double(dense.weights[i]);
  p.objective_constant = to_double(dense.constant);
  p.blocks.reserve(kProbEntries);
  for (int i = 0; i < kProbEntries; ++i) {
    sdp::LmiBlock b;
    b.dim = 1;
    b.coefficients.push_back({i, {{0, 0, 1.0}}});
    p.blocks.push_back(std::move(b));
  }
  const auto& eqs = ns_equalities_minimal();
  p.eq_matrix = Eigen::MatrixXd::Zero(static_cast<int>(eqs.size()), kProbEntries);
  p.eq_rhs = Eigen::VectorXd::Zero(static_cast<int>(eqs.size()));
  for (std::size_t r = 0; r < eqs.size(); ++r) {
    for (const auto& [idx, coef] : eqs[r].terms) p.eq_matrix(static_cast<int>(r), idx) += coef;
  }
  // Normalization rows come first and are the only ones with a nonzero rhs.
  for (int r = 0; r < 8; ++r) p.eq_rhs(r) = 1.0;
  p.initial_y = Eigen::VectorXd::Constant(kProbEntries, 1.0 / 8.0);
  return p;
}

BoundResult ns_bound(const BellFunctional& f, const sdp::SolverConfig& config) {
  const sdp::StandardForm p = ns_program(f);
  const sdp::Solution sol = sdp::solve(p, config);
  if (sol.status != sdp::Status::Optimal) {
    throw SolverError("no-signalling LP for '" + f.id + "' ended with status " + sdp::to_string(sol.status));
  }
  BoundResult res;
  res.set = ClassicalSet::NS;
  res.value = sol.value;
  res.dual_value = sol.dual_value;
  res.duality_gap = sol.duality_gap;
  res.iterations = sol.iterations;
  Rational snapped;
  if (snap_rational(sol.value, kSnapMaxDenominator, kSnapTolerance, snapped)) res.exact = snapped;

  Behavior::Table t{};
  for (int i = 0; i < kProbEntries; ++i) t[i] = std::max(0.0, sol.y(i));
  for (int s = 0; s < 8; ++s) {
    double sum = 0.0;
    for (int o = 0; o < 8; ++o) sum += t[(s << 3) | o];
    for (int o = 0; o < 8; ++o) t[(s << 3) | o] /= sum;
  }
  res.behavior = Behavior::from_probabilities(t);
  return res;
}

}  // namespace tribell
