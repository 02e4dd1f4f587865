#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "support.hpp"
#include "tribell/errors.hpp"
#include "tribell/moment.hpp"
#include "tribell/reference_table.hpp"
#include "tribell/sdp.hpp"

using namespace tribell::sdp;
using tribell::testing::entry;
using tribell::testing::lp_form;
using tribell::testing::random_lp;
using tribell::testing::simplex_max;

namespace {

// maximize y subject to [[1, y], [y, 1]] >= 0.
StandardForm envelope() {
  StandardForm p;
  p.num_vars = 1;
  LmiBlock b;
  b.dim = 2;
  b.constant = {{0, 0, 1.0}, {1, 1, 1.0}};
  b.coefficients.push_back({0, {{0, 1, 1.0}}});
  p.blocks.push_back(b);
  p.objective = Eigen::VectorXd::Ones(1);
  p.eq_matrix = Eigen::MatrixXd::Zero(0, 1);
  p.eq_rhs = Eigen::VectorXd::Zero(0);
  return p;
}

tribell::MomentProblem aq_problem(const std::string& id) {
  return tribell::assemble(tribell::local_level_set(1), entry(id));
}

}  // namespace

TEST(Solver, TwoByTwoEnvelope) {
  const auto p = envelope();
  const auto s = solve(p);
  ASSERT_EQ(s.status, Status::Optimal);
  EXPECT_NEAR(s.value, 1.0, 1e-8);
  EXPECT_NEAR(s.y(0), 1.0, 1e-8);
  const auto rep = certify(p, s);
  EXPECT_LE(rep.gap, 1e-10);
  EXPECT_LE(rep.equality_residual, 1e-10);
  EXPECT_LE(rep.dual_residual, 1e-10);
  EXPECT_GE(rep.min_primal_eigenvalue, -1e-10);
}

TEST(Solver, LiftedChshAtAlmostQuantumLevel) {
  const auto mp = aq_problem("sliwa-4");
  const auto s = solve(mp.sdp);
  ASSERT_EQ(s.status, Status::Optimal);
  EXPECT_NEAR(s.value, 2.0 * (2.0 * std::sqrt(2.0) - 1.0), 1e-6);
}

TEST(Solver, SeparatorAtAlmostQuantumLevel) {
  const auto s = solve(aq_problem(tribell::kSeparatorId).sdp);
  ASSERT_EQ(s.status, Status::Optimal);
  EXPECT_NEAR(s.value, 1.0232, 1e-3);
}

TEST(Certificate, MerminOptimumIsPositive) {
  const auto mp = aq_problem("sliwa-2");
  const auto s = solve(mp.sdp);
  ASSERT_EQ(s.status, Status::Optimal);
  const auto rep = certify(mp.sdp, s);
  EXPECT_GE(rep.min_primal_eigenvalue, -1e-9);
  EXPECT_GE(rep.min_dual_eigenvalue, -1e-9);
  EXPECT_LE(rep.gap, 1e-8);
}

TEST(Certificate, TamperedPointFails) {
  const auto mp = aq_problem("sliwa-2");
  auto s = solve(mp.sdp);
  ASSERT_EQ(s.status, Status::Optimal);
  s.y.array() += 1e-3;
  EXPECT_THROW(certify(mp.sdp, s), tribell::CertificationFailure);
  EXPECT_FALSE(check_certificate(mp.sdp, s).ok());
}

TEST(Solver, ObjectiveScalingKeepsArgmax) {
  auto p = envelope();
  p.objective(0) = 7.0 / 3.0;
  const auto s = solve(p);
  EXPECT_NEAR(s.value, 7.0 / 3.0, 1e-8);
  EXPECT_NEAR(s.y(0), 1.0, 1e-6);

  // Entries whose optimal behavior is unique; sliwa-4 never reads A1, so its
  // optimal face is not a point.
  for (const char* id : {"sliwa-23", "sliwa-41"}) {
    const auto mp = aq_problem(id);
    const auto base = solve(mp.sdp);
    auto scaled = mp.sdp;
    scaled.objective *= 7.0 / 3.0;
    scaled.objective_constant *= 7.0 / 3.0;
    const auto s2 = solve(scaled);
    ASSERT_EQ(s2.status, Status::Optimal);
    EXPECT_NEAR(s2.value, base.value * 7.0 / 3.0, 1e-7) << id;
    // Behavior-level argmax: the moments the objective reads.
    const auto b1 = mp.behavior(base.y);
    const auto b2 = mp.behavior(s2.y);
    for (int i = 0; i < tribell::kProbEntries; ++i) EXPECT_NEAR(b1.at(i), b2.at(i), 1e-6) << id << " " << i;
  }
}

TEST(Solver, WeakDualityOnFeasibleIterates) {
  SolverConfig cfg;
  cfg.record_trace = true;
  const auto mp = aq_problem("sliwa-23");
  const auto s = solve(mp.sdp, cfg);
  ASSERT_FALSE(s.trace.empty());
  for (const auto& r : s.trace) {
    if (r.primal_residual > 1e-9 || r.dual_residual > 1e-9) continue;
    const double scale = 1.0 + std::abs(r.primal_objective) + std::abs(r.dual_objective);
    EXPECT_LE(r.primal_objective, r.dual_objective + 1e-12 * scale);
  }
}

TEST(Solver, Deterministic) {
  const auto mp = aq_problem("sliwa-41");
  const auto a = solve(mp.sdp);
  const auto b = solve(mp.sdp);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_TRUE(a.y == b.y);
}

TEST(Solver, DimensionGate) {
  const auto mp = tribell::assemble(tribell::local_level_set(4), entry("sliwa-2"));
  SolverConfig cfg;
  cfg.max_iter = 1;
  EXPECT_THROW(solve(mp.sdp, cfg), tribell::DimensionGate);
}

TEST(Solver, LinearProgramsMatchSimplex) {
  std::mt19937_64 rng(50);
  for (int k = 0; k < 50; ++k) {
    const auto lp = random_lp(rng);
    const double expected = simplex_max(lp);
    const auto p = lp_form(lp);
    const auto s = solve(p);
    ASSERT_EQ(s.status, Status::Optimal) << k;
    EXPECT_NEAR(s.value, expected, 1e-8 * (1.0 + std::abs(expected))) << k;
    EXPECT_TRUE(check_certificate(p, s).ok()) << k;
  }
}

TEST(StandardForm, ValidateRejectsMalformed) {
  auto p = envelope();
  p.blocks[0].constant.push_back({1, 0, 1.0});
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = envelope();
  p.blocks[0].coefficients[0].first = 3;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}
