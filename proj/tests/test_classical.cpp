#include <gtest/gtest.h>

#include <set>

#include "support.hpp"
#include "tribell/classical.hpp"
#include "tribell/reference_table.hpp"

using namespace tribell;
using tribell::testing::entry;
using tribell::testing::shipped_catalog;

TEST(Deterministic, SixtyFourDistinctNoSignallingVertices) {
  const auto all = enumerate_deterministic();
  ASSERT_EQ(all.size(), 64u);
  std::set<ExactBehavior::Table> tables;
  for (const auto& s : all) {
    const auto b = s.behavior();
    tables.insert(b.table());
    EXPECT_TRUE(check_no_signalling(b).ok());
  }
  EXPECT_EQ(tables.size(), 64u);
}

TEST(LocalBound, KnownValues) {
  EXPECT_EQ(*local_bound(entry("sliwa-2")).exact, Rational(2));
  EXPECT_EQ(*local_bound(entry("sliwa-23")).exact, Rational(4));
  EXPECT_EQ(*local_bound(entry(kSeparatorId)).exact, Rational(30, 31));
}

TEST(LocalBound, ArgmaxReproducesValueAndBreaksTiesLow) {
  for (const auto& f : shipped_catalog()) {
    const auto r = local_bound(f);
    ASSERT_TRUE(r.strategy);
    EXPECT_EQ(functional_value(f, r.strategy->behavior()), *r.exact) << f.id;
    for (int code = 0; code < r.strategy->encoding(); ++code) {
      EXPECT_LT(functional_value(f, DeterministicStrategy::from_encoding(code).behavior()), *r.exact) << f.id;
    }
  }
  BellFunctional constant;
  constant.terms.push_back({Monomial::unit(), Rational(1)});
  EXPECT_EQ(local_bound(constant).strategy->encoding(), 0);
}

TEST(NsBound, KnownValues) {
  const auto mermin = ns_bound(entry("sliwa-2"));
  EXPECT_NEAR(mermin.value, 4.0, 1e-8);
  const auto gyni = ns_bound(entry("sliwa-10"));
  ASSERT_TRUE(gyni.exact);
  EXPECT_EQ(*gyni.exact, Rational(20, 3));
  EXPECT_EQ(*ns_bound(entry("sliwa-41")).exact, Rational(15));
  const auto trivial = ns_bound(entry("sliwa-1"));
  EXPECT_EQ(*trivial.exact, Rational(1));
  EXPECT_EQ(*local_bound(entry("sliwa-1")).exact, Rational(1));
}

TEST(NsBound, OptimizerIsCertifiedNoSignallingPoint) {
  for (const auto& f : shipped_catalog()) {
    const auto r = ns_bound(f);
    ASSERT_TRUE(r.behavior) << f.id;
    EXPECT_TRUE(check_no_signalling(*r.behavior).ok()) << f.id;
    EXPECT_NEAR(functional_value(f, *r.behavior), r.value, 1e-8) << f.id;
    EXPECT_NEAR(r.value, r.dual_value, 1e-8 * (1 + std::abs(r.value))) << f.id;
    EXPECT_LE(local_bound(f).value, r.value + 1e-8) << f.id;
  }
}

TEST(NsBound, ProgramHasLpShape) {
  const auto p = ns_program(entry("sliwa-23"));
  EXPECT_EQ(p.num_vars, 64);
  EXPECT_EQ(p.blocks.size(), 64u);
  for (const auto& b : p.blocks) EXPECT_EQ(b.dim, 1);
  EXPECT_EQ(p.eq_matrix.rows(), 38);
}
