#pragma once

// Shared fixtures for the test binaries.

#include <random>
#include <vector>

#include "tribell/catalog.hpp"
#include "tribell/classical.hpp"
#include "tribell/scenario.hpp"

namespace tribell::testing {

inline const std::vector<BellFunctional>& shipped_catalog() {
  static const auto catalog = load_catalog(default_catalog_path());
  return catalog;
}

inline const BellFunctional& entry(const std::string& id) { return find_functional(shipped_catalog(), id); }

/// Functional with independent random integer weights on the 64 probabilities.
inline BellFunctional random_probability_functional(std::mt19937_64& rng, int range = 5) {
  std::uniform_int_distribution<int> coef(-range, range);
  BellFunctional f;
  f.id = "random";
  f.basis = Basis::Probability;
  for (int i = 0; i < kProbEntries; ++i) {
    const int c = coef(rng);
    if (c == 0) continue;
    const int set = i >> 3;
    const std::array<int, 3> s{(set >> 2) & 1, (set >> 1) & 1, set & 1};
    const std::array<int, 3> o{(i >> 2) & 1, (i >> 1) & 1, i & 1};
    f.terms.push_back({Monomial::probability(o, s), Rational(c)});
  }
  return f;
}

/// No-signalling points: optimizers of random LPs over the no-signalling
/// polytope, mixed with random deterministic vertices.
class NsSampler {
 public:
  explicit NsSampler(std::uint64_t seed, int lp_vertices = 12) : rng_(seed) {
    for (int k = 0; k < lp_vertices; ++k) vertices_.push_back(*ns_bound(random_probability_functional(rng_)).behavior);
    for (const auto& s : enumerate_deterministic()) vertices_.push_back(to_floating(s.behavior()));
  }

  Behavior sample() {
    std::uniform_int_distribution<std::size_t> pick(0, vertices_.size() - 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Behavior b = vertices_[pick(rng_)];
    for (int k = 0; k < 3; ++k) b = b.mix(vertices_[pick(rng_)], u(rng_));
    return b;
  }

  const std::vector<Behavior>& vertices() const { return vertices_; }

 private:
  std::mt19937_64 rng_;
  std::vector<Behavior> vertices_;
};

}  // namespace tribell::testing
