#include <gtest/gtest.h>

#include "support.hpp"
#include "tribell/catalog.hpp"
#include "tribell/classical.hpp"
#include "tribell/errors.hpp"
#include "tribell/reference_table.hpp"

using namespace tribell;
using tribell::testing::entry;
using tribell::testing::shipped_catalog;

TEST(Catalog, ShipsAllRepresentativesAndExtras) {
  const auto& cat = shipped_catalog();
  for (int row = 1; row <= 46; ++row) {
    EXPECT_NO_THROW(find_functional(cat, "sliwa-" + std::to_string(row))) << row;
  }
  EXPECT_NO_THROW(find_functional(cat, kSeparatorId));
  EXPECT_NO_THROW(find_functional(cat, kBisepWitnessId));
  EXPECT_THROW(find_functional(cat, "sliwa-47"), KeyMismatch);
}

// Transcription gate: every stored bound is the exact vertex maximum.
TEST(Catalog, StoredBoundsMatchVertexMaximum) {
  for (const auto& f : shipped_catalog()) {
    ASSERT_TRUE(f.local_bound.has_value()) << f.id;
    EXPECT_EQ(*local_bound(f).exact, *f.local_bound) << f.id;
  }
}

TEST(Catalog, DeterministicVerticesRespectEveryBound) {
  for (const auto& f : shipped_catalog()) {
    for (const auto& s : enumerate_deterministic()) EXPECT_LE(functional_value(f, s.behavior()), *f.local_bound) << f.id;
  }
}

TEST(Catalog, SeparatorCoefficientsAreExact) {
  const auto& f = entry(kSeparatorId);
  EXPECT_EQ(f.basis, Basis::Probability);
  EXPECT_EQ(*f.local_bound, Rational(30, 31));
  auto coef = [&](const std::string& mon) {
    const auto m = parse_monomial(mon);
    for (const auto& t : f.terms) {
      if (t.monomial == m) return t.coefficient;
    }
    return Rational(0);
  };
  EXPECT_EQ(coef("P(B:0|0)"), Rational(30, 31));
  EXPECT_EQ(coef("P(C:0|1)"), Rational(-167, 9));
  EXPECT_EQ(coef("P(AC:00|00)"), Rational(-74, 11));
  EXPECT_EQ(coef("P(AB:00|10)"), Rational(174, 11));
  EXPECT_EQ(coef("P(AB:00|11)"), Rational(244, 23));
  EXPECT_EQ(coef("P(BC:00|11)"), Rational(0));
}

TEST(Catalog, ParsesMinimalEntry) {
  const auto cat = parse_catalog(R"j([{"id": "t", "basis": "correlator", "bound": "4",
      "terms": [{"mon": "E(A0)", "coef": "1"}, {"mon": "E(A0B0)", "coef": "-1/2"}]}])j");
  ASSERT_EQ(cat.size(), 1u);
  EXPECT_EQ(cat[0].terms[1].coefficient, Rational(-1, 2));
  EXPECT_EQ(*cat[0].local_bound, Rational(4));
}

TEST(Catalog, MalformedRationalNamesField) {
  try {
    parse_catalog(R"j([{"id": "t", "basis": "probability", "terms": [{"mon": "P(A:0|0)", "coef": "74//11"}]}])j");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(e.where().find("terms[0]"), std::string::npos) << e.where();
  }
}

TEST(Catalog, RejectsStructuralErrors) {
  EXPECT_THROW(parse_catalog("{}"), ParseError);
  EXPECT_THROW(parse_catalog("[{\"id\": \"t\",\n \"basis\": }]"), ParseError);
  EXPECT_THROW(parse_catalog(R"j([{"id": "t", "basis": "moments", "terms": []}])j"), ParseError);
  EXPECT_THROW(parse_catalog(R"j([{"id": "t", "basis": "correlator", "terms": [{"mon": "P(A:0|0)", "coef": "1"}]}])j"),
               ParseError);
  EXPECT_THROW(parse_catalog(R"j([{"id": "t", "basis": "correlator"}])j"), ParseError);
  EXPECT_THROW(parse_catalog(R"j([{"id": "a", "basis": "correlator", "terms": []},
                                 {"id": "a", "basis": "correlator", "terms": []}])j"),
               DuplicateIdError);
}

TEST(Catalog, SyntaxErrorReportsLine) {
  try {
    parse_catalog("[\n{\"id\": \"t\",\n\"basis\": ,\n}]");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.where(), "line 3");
  }
}

TEST(Catalog, SerializationRoundTrips) {
  const auto& cat = shipped_catalog();
  const auto text = catalog_to_json(cat);
  const auto back = parse_catalog(text);
  ASSERT_EQ(back.size(), cat.size());
  EXPECT_EQ(catalog_to_json(back), text);
  EXPECT_EQ(catalog_hash(back), catalog_hash(cat));
  EXPECT_EQ(catalog_hash(cat).size(), 16u);
  auto changed = cat;
  changed[0].terms[0].coefficient += Rational(1);
  EXPECT_NE(catalog_hash(changed), catalog_hash(cat));
}
