#include <gtest/gtest.h>

#include <random>

#include <nlohmann/json.hpp>

#include "support.hpp"
#include "tribell/errors.hpp"
#include "tribell/reference_table.hpp"
#include "tribell/seesaw.hpp"

using namespace tribell;
using tribell::testing::entry;

namespace {

const double kTwoSqrtTwo = 2.0 * std::sqrt(2.0);

// Setting 0 measures X, setting 1 measures Y on every party.
Observables pauli_xy() {
  const auto o = LocalObservable::from_bloch(Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 1, 0));
  return {o, o, o};
}

// (|000> + i|111>) / sqrt(2).
State8 phased_ghz() {
  State8 s = State8::Zero();
  s(0) = 1.0 / std::sqrt(2.0);
  s(7) = Complex(0.0, 1.0 / std::sqrt(2.0));
  return s;
}

Eigen::Vector3d random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::Vector3d v(g(rng), g(rng), g(rng));
  return v.normalized();
}

State8 random_state(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  State8 s;
  for (int i = 0; i < 8; ++i) s(i) = Complex(g(rng), g(rng));
  return s.normalized();
}

SeesawConfig quick(int restarts = 50) {
  SeesawConfig cfg;
  cfg.restarts = restarts;
  return cfg;
}

}  // namespace

TEST(Observable, InvolutionAndProjectors) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 20; ++k) {
    const auto o = LocalObservable::from_bloch(random_unit(rng), random_unit(rng));
    for (int x = 0; x < 2; ++x) {
      EXPECT_LT((o.op[x] * o.op[x] - Qubit::Identity()).norm(), 1e-12);
      for (int a = 0; a < 2; ++a) {
        const Qubit p = o.projector(x, a);
        EXPECT_LT((p * p - p).norm(), 1e-12);
      }
      EXPECT_LT((o.projector(x, 0) + o.projector(x, 1) - Qubit::Identity()).norm(), 1e-12);
      EXPECT_NEAR(o.bloch(x).norm(), 1.0, 1e-12);
    }
  }
}

TEST(BellOperator, MerminWithPauliMeasurements) {
  const Operator8 b = bell_operator(entry("sliwa-2"), pauli_xy());
  EXPECT_LT((b - b.adjoint()).norm(), 1e-12);
  Eigen::SelfAdjointEigenSolver<Operator8> es(b);
  EXPECT_NEAR(es.eigenvalues()(7), 4.0, 1e-12);
  const State8 ghz = phased_ghz();
  EXPECT_NEAR(std::abs(ghz.dot(es.eigenvectors().col(7))), 1.0, 1e-12);

  QuantumModel m;
  m.state = ghz;
  m.observables = pauli_xy();
  const auto cv = correlators(m.behavior());
  EXPECT_NEAR((cv[{0, 0, 1}]), 1.0, 1e-12);
  EXPECT_NEAR((cv[{0, 1, 0}]), 1.0, 1e-12);
  EXPECT_NEAR((cv[{1, 0, 0}]), 1.0, 1e-12);
  EXPECT_NEAR((cv[{1, 1, 1}]), -1.0, 1e-12);
}

TEST(BellOperator, ConstantFunctionalIsIdentity) {
  BellFunctional one;
  one.terms.push_back({Monomial::unit(), Rational(1)});
  EXPECT_LT((bell_operator(one, pauli_xy()) - Operator8::Identity()).norm(), 1e-14);
}

TEST(BellOperator, ExpectationMatchesBornRule) {
  std::mt19937_64 rng(9);
  for (const char* id : {"sliwa-2", "sliwa-23", "sliwa-41", kSeparatorId.c_str()}) {
    for (int k = 0; k < 100; ++k) {
      QuantumModel m;
      m.state = random_state(rng);
      for (auto& o : m.observables) o = LocalObservable::from_bloch(random_unit(rng), random_unit(rng));
      const double direct = m.state.dot(bell_operator(entry(id), m.observables) * m.state).real();
      EXPECT_NEAR(direct, functional_value(entry(id), m.behavior()), 1e-12) << id;
    }
  }
}

TEST(Seesaw, KnownQuantumMaxima) {
  const auto mermin = seesaw_max(entry("sliwa-2"), quick());
  EXPECT_NEAR(mermin.value, 4.0, 1e-6);
  EXPECT_NEAR(seesaw_max(entry("sliwa-23"), quick()).value, 4.6847, 1e-3);
  EXPECT_NEAR(seesaw_max(entry("sliwa-41"), quick()).value, 10.3677, 1e-3);
  EXPECT_NEAR(seesaw_max(entry("sliwa-4"), quick()).value, 2.0 * (kTwoSqrtTwo - 1.0), 1e-6);
}

TEST(Seesaw, ModelReproducesValue) {
  const auto r = seesaw_max(entry("sliwa-23"), quick(20));
  EXPECT_NEAR(r.model.state.norm(), 1.0, 1e-12);
  EXPECT_NEAR(functional_value(entry("sliwa-23"), r.model.behavior()), r.value, 1e-9);
  nlohmann::json j = r.model;
  const auto back = j.get<QuantumModel>();
  EXPECT_NEAR(functional_value(entry("sliwa-23"), back.behavior()), r.value, 1e-9);
}

TEST(Seesaw, AscentIsMonotone) {
  SeesawConfig cfg = quick(30);
  cfg.record_trace = true;
  for (const auto& f : tribell::testing::shipped_catalog()) {
    const auto r = seesaw_max(f, cfg);
    EXPECT_EQ(r.monotonicity_violations, 0) << f.id;
    for (std::size_t k = 1; k < r.trace.size(); ++k) {
      EXPECT_GE(r.trace[k], r.trace[k - 1] - 1e-12 * (1.0 + std::abs(r.trace[k - 1]))) << f.id;
    }
  }
}

TEST(Seesaw, Reproducible) {
  const auto a = seesaw_max(entry("sliwa-41"), quick(10));
  const auto b = seesaw_max(entry("sliwa-41"), quick(10));
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.best_restart, b.best_restart);
  auto other = quick(10);
  other.seed = 99;
  EXPECT_NEAR(seesaw_max(entry("sliwa-41"), other).value, a.value, 5e-3);
}

TEST(Biseparable, WitnessBoundOnEveryCut) {
  for (auto cut : {Bipartition::A_BC, Bipartition::B_AC, Bipartition::C_AB}) {
    const auto r = seesaw_bisep(entry("sliwa-7"), cut, quick());
    EXPECT_NEAR(r.value, 2.0 * kTwoSqrtTwo, 1e-3) << to_string(cut);
    ASSERT_TRUE(r.model.product.has_value());
    EXPECT_EQ(*r.model.product, cut);
    EXPECT_EQ(r.monotonicity_violations, 0);
  }
}

TEST(Biseparable, KnownCuts) {
  EXPECT_NEAR(seesaw_bisep(entry("sliwa-23"), Bipartition::A_BC, quick()).value, 4.5, 1e-3);
  EXPECT_NEAR(seesaw_bisep(entry("sliwa-4"), Bipartition::B_AC, quick()).value, 2.0, 1e-3);
}

TEST(Biseparable, ProductStateFactorizes) {
  const auto r = seesaw_bisep(entry("sliwa-23"), Bipartition::B_AC, quick(5));
  // Reshape so that the lone party indexes rows: rank one means a product.
  Eigen::Matrix<Complex, 2, 4> m;
  for (int i = 0; i < 8; ++i) {
    const int a = (i >> 2) & 1, b = (i >> 1) & 1, c = i & 1;
    m(b, a * 2 + c) = r.model.state(i);
  }
  Eigen::JacobiSVD<Eigen::Matrix<Complex, 2, 4>> svd(m);
  EXPECT_LT(svd.singularValues()(1), 1e-12);
}

TEST(Biseparable, NeverAboveGeneric) {
  for (const char* id : {"sliwa-2", "sliwa-7", "sliwa-23", "sliwa-41"}) {
    const double generic = seesaw_max(entry(id), quick()).value;
    for (auto cut : {Bipartition::A_BC, Bipartition::B_AC, Bipartition::C_AB}) {
      EXPECT_LE(seesaw_bisep(entry(id), cut, quick(20)).value, generic + 1e-9) << id << " " << to_string(cut);
    }
  }
}

TEST(Bipartition, TextRoundTrip) {
  for (auto cut : {Bipartition::A_BC, Bipartition::B_AC, Bipartition::C_AB}) EXPECT_EQ(parse_bipartition(to_string(cut)), cut);
  EXPECT_THROW(parse_bipartition("AB|C"), ParseError);
}
