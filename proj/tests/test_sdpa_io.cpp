#include <gtest/gtest.h>

#include "support.hpp"
#include "tribell/errors.hpp"
#include "tribell/moment.hpp"
#include "tribell/sdpa_io.hpp"

using namespace tribell;
using tribell::testing::entry;

TEST(Sdpa, HeaderLayout) {
  const auto mp = assemble(local_level_set(1), entry("sliwa-2"));
  const auto text = sdp::to_sdpa(mp.sdp, "sliwa-2 over aq");
  std::istringstream is(text);
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "\" sliwa-2 over aq");
  std::getline(is, line);
  EXPECT_EQ(line.rfind("* objective constant", 0), 0u);
  std::getline(is, line);
  EXPECT_EQ(std::stoi(line), mp.sdp.num_vars);
}

TEST(Sdpa, RoundTripPreservesOptimum) {
  const auto mp = assemble(local_level_set(1), entry("sliwa-23"), {.ppt = 1u});
  ASSERT_EQ(mp.sdp.eq_matrix.rows(), 0);
  const auto back = sdp::from_sdpa(sdp::to_sdpa(mp.sdp));
  EXPECT_EQ(back.num_vars, mp.sdp.num_vars);
  EXPECT_EQ(back.blocks.size(), mp.sdp.blocks.size());
  EXPECT_DOUBLE_EQ(back.objective_constant, mp.sdp.objective_constant);
  EXPECT_EQ(sdp::to_sdpa(back), sdp::to_sdpa(mp.sdp));
  const auto a = sdp::solve(mp.sdp);
  const auto b = sdp::solve(back);
  ASSERT_EQ(b.status, sdp::Status::Optimal);
  EXPECT_NEAR(a.value, b.value, 1e-8);
  EXPECT_NEAR(b.value, 4.5, 1e-6);
}

TEST(Sdpa, EqualitiesBecomeDiagonalPairs) {
  sdp::StandardForm p;
  p.num_vars = 2;
  p.objective = Eigen::Vector2d(1.0, 0.0);
  p.blocks.push_back({1, {}, {{0, {{0, 0, 1.0}}}}});
  p.eq_matrix = Eigen::MatrixXd(1, 2);
  p.eq_matrix << 1.0, 1.0;
  p.eq_rhs = Eigen::VectorXd::Constant(1, 2.0);
  const auto back = sdp::from_sdpa(sdp::to_sdpa(p));
  ASSERT_EQ(back.blocks.size(), 3u);
  // At y = (0.5, 1.5) the pair a'y - b >= 0 and b - a'y >= 0 is tight.
  const Eigen::Vector2d y(0.5, 1.5);
  EXPECT_NEAR(sdp::evaluate_block(back.blocks[1], y)(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(sdp::evaluate_block(back.blocks[2], y)(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(sdp::evaluate_block(back.blocks[0], y)(0, 0), 0.5, 1e-15);
}

TEST(Sdpa, ParseErrorsCarryLineNumbers) {
  const std::string bad = "2\n1\n2\n1 0\n1 1 1 3 1.0\n";
  try {
    sdp::from_sdpa(bad);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.where(), "line 5");
  }
  EXPECT_THROW(sdp::from_sdpa("2\n1\n2\n1\n"), ParseError);
  EXPECT_THROW(sdp::from_sdpa(""), ParseError);
  EXPECT_THROW(sdp::from_sdpa("1\n1\n-2\n1\n1 1 1 2 1.0\n"), ParseError);
}

TEST(Sdpa, AcceptsPunctuatedHeaders) {
  const auto p = sdp::from_sdpa("* comment\n1 = m\n1\n{2}\n{1.0}\n0 1 1 1 -1\n0 1 2 2 -1\n1 1 1 2 1\n");
  const auto s = sdp::solve(p);
  ASSERT_EQ(s.status, sdp::Status::Optimal);
  EXPECT_NEAR(s.value, 1.0, 1e-8);
}
