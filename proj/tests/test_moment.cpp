#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "support.hpp"
#include "tribell/classical.hpp"
#include "tribell/errors.hpp"
#include "tribell/reference_table.hpp"
#include "tribell/moment.hpp"

using namespace tribell;
using tribell::testing::entry;

namespace {

// Hermitian entry (i, j) for any order of indices; the conjugation flag is
// dropped for real classes.
std::pair<int, bool> full_entry(const HermitianBlock& b, const MomentClasses& classes, int i, int j) {
  const MomentRef r = i <= j ? b.at(i, j) : b.at(j, i);
  bool conj = i <= j ? r.conjugated : !r.conjugated;
  if (classes.word(r.cls).palindromic()) conj = false;
  return {r.cls, conj};
}

int linked_value(const BehaviorLinkage& link, int index, const std::vector<double>& moments) {
  double v = 0.0;
  for (const auto& [cls, c] : link.terms[index]) v += c * moments[cls];
  return static_cast<int>(std::lround(v * 1e6));
}

double bound(const GeneratingSet& set, const BellFunctional& f, PartyMask ppt = 0, bool complex = false) {
  AssembleOptions opt;
  opt.ppt = ppt;
  opt.complex_moments = complex;
  const auto mp = assemble(set, f, opt);
  const auto sol = solve(mp);
  EXPECT_EQ(sol.status, sdp::Status::Optimal) << f.id << " " << mp.descriptor();
  EXPECT_TRUE(sdp::check_certificate(mp.sdp, sol).ok()) << f.id << " " << mp.descriptor();
  return sol.value;
}

}  // namespace

TEST(GeneratingSet, Sizes) {
  EXPECT_EQ(npa_set(1).size(), 7);
  EXPECT_EQ(npa_set(2).size(), 25);
  EXPECT_EQ(local_level_set(1).size(), 27);
  EXPECT_EQ(local_level_set(2).size(), 125);
  EXPECT_EQ(local_level_set(6).size(), 2197);
  for (int l = 1; l <= 6; ++l) EXPECT_EQ(local_level_set(l).size(), (2 * l + 1) * (2 * l + 1) * (2 * l + 1));
  EXPECT_THROW(npa_set(4), UnsupportedLevel);
  EXPECT_THROW(local_level_set(7), UnsupportedLevel);
  EXPECT_THROW(local_level_set(0), UnsupportedLevel);
}

TEST(GeneratingSet, NpaTwoMatchesEnumeration) {
  // Identity, singles, same-party ordered pairs and cross-party pairs.
  std::set<std::string> expected{"1"};
  std::vector<Projector> singles;
  for (int p = 0; p < 3; ++p) {
    for (int s = 0; s < 2; ++s) singles.push_back({p, s});
  }
  for (const auto& a : singles) {
    expected.insert(to_string(reduce({a})));
    for (const auto& b : singles) {
      if (a == b) continue;
      expected.insert(to_string(reduce({a, b})));
    }
  }
  std::set<std::string> got;
  for (const auto& w : npa_set(2).words) got.insert(to_string(w));
  EXPECT_EQ(got, expected);
  EXPECT_EQ(got.size(), 25u);
}

TEST(GeneratingSet, DuplicateFreeAndParsed) {
  for (const auto& set : {npa_set(1), npa_set(2), npa_set(3), local_level_set(2)}) {
    std::set<std::uint32_t> codes;
    for (const auto& w : set.words) codes.insert(w.code());
    EXPECT_EQ(static_cast<int>(codes.size()), set.size()) << set.descriptor();
  }
  EXPECT_EQ(parse_set("aq").descriptor(), "local(1)");
  EXPECT_EQ(parse_set("npa2").descriptor(), "npa(2)");
  EXPECT_EQ(parse_set("local(2)").size(), 125);
  EXPECT_THROW(parse_set("npa(x)"), ParseError);
}

TEST(Linkage, InclusionExclusionExamples) {
  const auto set = local_level_set(1);
  MomentClasses classes;
  moment_block(set, classes);
  const auto link = behavior_constraints(classes);
  const int xyz = classes.find(behavior_word({1, 0, 1}));
  const int yz = classes.find(behavior_word({-1, 0, 1}));
  ASSERT_GE(xyz, 0);
  ASSERT_GE(yz, 0);
  // p(000|101) is the three-body moment.
  EXPECT_EQ(link.terms[prob_index(0, 0, 0, 1, 0, 1)], (std::vector<std::pair<int, int>>{{xyz, 1}}));
  // p(100|101) = <B0 C1> - <A1 B0 C1>.
  auto t = link.terms[prob_index(1, 0, 0, 1, 0, 1)];
  std::sort(t.begin(), t.end());
  auto expected = std::vector<std::pair<int, int>>{{xyz, -1}, {yz, 1}};
  std::sort(expected.begin(), expected.end());
  EXPECT_EQ(t, expected);
}

TEST(Linkage, SlicesSumToIdentity) {
  // npa(1) lacks the three-body moments; assembly registers them separately.
  EXPECT_THROW(behavior_constraints(npa_set(1)), IncompleteSet);
  for (const auto& set : {npa_set(2), npa_set(3), local_level_set(1)}) {
    const auto link = behavior_constraints(set);
    for (int s = 0; s < 8; ++s) {
      std::map<int, int> sum;
      for (int o = 0; o < 8; ++o) {
        for (const auto& [cls, c] : link.terms[(s << 3) | o]) sum[cls] += c;
      }
      for (const auto& [cls, c] : sum) EXPECT_EQ(c, cls == 0 ? 1 : 0) << set.descriptor();
    }
  }
}

TEST(Linkage, UniformMomentsGiveUniformBehavior) {
  MomentClasses classes;
  moment_block(local_level_set(1), classes);
  const auto link = behavior_constraints(classes);
  std::vector<double> moments(classes.size());
  for (int c = 0; c < classes.size(); ++c) {
    int parties = 0;
    for (const auto& part : classes.word(c).parts) parties += part.length > 0;
    moments[c] = std::pow(0.5, parties);
  }
  for (int i = 0; i < kProbEntries; ++i) EXPECT_EQ(linked_value(link, i, moments), 125000);
}

TEST(Ppt, IndexSwapOnSelectedParties) {
  const auto set = local_level_set(1);
  MomentClasses classes;
  const auto base = moment_block(set, classes);
  const auto ta = ppt_block(set, 1u, classes);
  const auto tbc = ppt_block(set, 6u, classes);
  EXPECT_EQ(ta.tag, "T_A");
  EXPECT_EQ(tbc.tag, "T_BC");
  const int l = 3;
  for (int i = 0; i < 27; ++i) {
    for (int j = 0; j < 27; ++j) {
      const int ia = i / 9, ib = (i / 3) % 3, ic = i % 3;
      const int ja = j / 9, jb = (j / 3) % 3, jc = j % 3;
      const int ip = (ja * l + ib) * l + ic;
      const int jp = (ia * l + jb) * l + jc;
      EXPECT_EQ(full_entry(ta, classes, i, j), full_entry(base, classes, ip, jp)) << i << "," << j;
      EXPECT_EQ(full_entry(tbc, classes, i, j), full_entry(ta, classes, j, i)) << i << "," << j;
    }
  }
}

TEST(Ppt, RejectsNonProductAndTrivialSubsets) {
  MomentClasses classes;
  EXPECT_THROW(ppt_block(npa_set(2), 1u, classes), StructureError);
  EXPECT_THROW(ppt_block(local_level_set(1), 0u, classes), StructureError);
  EXPECT_THROW(ppt_block(local_level_set(1), 7u, classes), StructureError);
  EXPECT_EQ(parse_ppt("all"), 7u);
  EXPECT_EQ(parse_ppt("A,C"), 5u);
  EXPECT_THROW(parse_ppt("D"), ParseError);
}

TEST(Realify, ComplexEnvelope) {
  // [[1, z], [conj(z), 1]] with z = x + i y is PSD iff x^2 + y^2 <= 1.
  HermitianBlock h;
  h.dim = 2;
  h.entries = {{0, false}, {1, false}, {0, false}};
  const std::vector<int> re{-1, 0};
  const std::vector<int> im{-1, 1};
  const auto blk = realify(h, re, im, true);
  EXPECT_EQ(blk.dim, 4);
  auto min_eig = [&](double x, double y) {
    Eigen::VectorXd v(2);
    v << x, y;
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sdp::evaluate_block(blk, v)).eigenvalues().minCoeff();
  };
  EXPECT_GE(min_eig(0.6, 0.8), -1e-12);
  EXPECT_LT(min_eig(0.6, 0.81), 0.0);
  EXPECT_GE(min_eig(-0.3, 0.2), 0.0);
  const auto real_only = realify(h, re, im, false);
  EXPECT_EQ(real_only.dim, 2);
}

TEST(Assemble, BlockLayout) {
  AssembleOptions opt;
  opt.ppt = 7u;
  const auto mp = assemble(local_level_set(1), entry("sliwa-23"), opt);
  EXPECT_EQ(mp.sdp.blocks.size(), 4u);
  for (const auto& b : mp.sdp.blocks) EXPECT_EQ(b.dim, 27);
  opt.complex_moments = true;
  const auto cx = assemble(local_level_set(1), entry("sliwa-23"), opt);
  for (const auto& b : cx.sdp.blocks) EXPECT_EQ(b.dim, 54);
  EXPECT_THROW(assemble(npa_set(2), entry("sliwa-23"), opt), StructureError);
  EXPECT_GT(assemble(npa_set(1), entry("sliwa-23")).extra_classes, 0);
}

TEST(Assemble, LevelSixIsGated) {
  const auto mp = assemble(local_level_set(6), entry("sliwa-1"));
  EXPECT_TRUE(mp.requires_override());
  EXPECT_THROW(solve(mp), UnsupportedLevel);
}

TEST(Bounds, AlmostQuantumExamples) {
  EXPECT_NEAR(bound(local_level_set(1), entry("sliwa-2")), 4.0, 1e-6);
  EXPECT_NEAR(bound(local_level_set(1), entry("sliwa-23"), 1u), 4.5, 1e-6);
  EXPECT_NEAR(bound(local_level_set(1), entry("sliwa-4")), 2.0 * (2.0 * std::sqrt(2.0) - 1.0), 1e-6);
  EXPECT_GE(bound(npa_set(1), entry("sliwa-4")), 3.6568);
}

TEST(Bounds, SeparatorAtNpaTwo) { EXPECT_NEAR(bound(npa_set(2), entry(kSeparatorId)), 0.9724, 1e-3); }

TEST(Bounds, RealAndComplexMomentsAgree) {
  for (const char* id : {"sliwa-2", "sliwa-23", "sliwa-41"}) {
    EXPECT_NEAR(bound(local_level_set(1), entry(id)), bound(local_level_set(1), entry(id), 0, true), 1e-6) << id;
    EXPECT_NEAR(bound(local_level_set(1), entry(id), 1u), bound(local_level_set(1), entry(id), 1u, true), 1e-6) << id;
  }
}

TEST(Membership, DeterministicAndUniformAreMembers) {
  for (int code : {0, 17, 42, 63}) {
    const auto beh = to_floating(DeterministicStrategy::from_encoding(code).behavior());
    EXPECT_TRUE(membership(local_level_set(1), beh).member) << code;
    EXPECT_TRUE(membership(npa_set(2), beh).member) << code;
    EXPECT_TRUE(membership(local_level_set(1), beh, 7u).member) << code;
  }
  EXPECT_TRUE(membership(local_level_set(1), Behavior::uniform()).member);
}

TEST(Membership, RejectsSignallingAndSuperQuantum) {
  Behavior::Table t{};
  t.fill(1.0 / 8.0);
  t[prob_index(0, 0, 0, 0, 0, 1)] += 0.05;
  t[prob_index(1, 0, 0, 0, 0, 1)] -= 0.05;
  EXPECT_FALSE(membership(local_level_set(1), Behavior::from_probabilities(t)).member);
  // The no-signalling optimizer of GYNI is outside every quantum relaxation.
  const auto ns = ns_bound(entry("sliwa-10"));
  const auto res = membership(local_level_set(1), *ns.behavior);
  EXPECT_FALSE(res.member);
  EXPECT_LT(res.margin, 0.0);
}

TEST(Membership, BoundOptimizerIsMember) {
  const auto mp = assemble(local_level_set(1), entry("sliwa-23"));
  const auto sol = solve(mp);
  ASSERT_EQ(sol.status, sdp::Status::Optimal);
  const auto beh = mp.behavior(sol.y);
  const auto res = membership(local_level_set(1), beh);
  EXPECT_GE(res.margin, -kMembershipTol);
  EXPECT_TRUE(res.member);
}

TEST(Census, CountsMatchExplicitBlock) {
  for (const auto& set : {npa_set(2), local_level_set(1), local_level_set(2)}) {
    MomentClasses classes;
    moment_block(set, classes);
    const auto census = moment_census(set);
    EXPECT_EQ(census.set_size, set.size());
    EXPECT_EQ(census.classes, classes.size()) << set.descriptor();
    int real = 0;
    for (int c = 0; c < classes.size(); ++c) real += classes.word(c).palindromic();
    EXPECT_EQ(census.real_classes, real);
    EXPECT_EQ(census.complex_classes, classes.size() - real);
  }
}
