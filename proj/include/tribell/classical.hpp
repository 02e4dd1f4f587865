#pragma once

// Local-polytope bounds by vertex enumeration and no-signalling bounds by LP.

#include <optional>
#include <vector>

#include "tribell/scenario.hpp"
#include "tribell/sdp.hpp"

namespace tribell {

enum class ClassicalSet { L, NS };

struct BoundResult {
  ClassicalSet set = ClassicalSet::L;
  double value = 0.0;
  /// Exact maximum (local bound) or the snapped small-denominator rational
  /// (no-signalling bound, when within the snapping tolerance).
  std::optional<Rational> exact;
  std::optional<DeterministicStrategy> strategy;  // L
  std::optional<Behavior> behavior;               // NS
  double dual_value = 0.0;                        // NS: LP dual objective
  double duality_gap = 0.0;
  int iterations = 0;
};

/// The 64 deterministic strategies in encoding order.
std::vector<DeterministicStrategy> enumerate_deterministic();

/// Exact maximum over the deterministic strategies; ties go to the smallest
/// encoding.
BoundResult local_bound(const BellFunctional& f);

inline constexpr int kSnapMaxDenominator = 64;
inline constexpr double kSnapTolerance = 1e-7;

/// Maximum over the no-signalling polytope. Throws SolverError unless the LP
/// reaches Optimal.
BoundResult ns_bound(const BellFunctional& f, const sdp::SolverConfig& config = {});

/// The LP itself: 64 nonnegative probabilities, normalization and the
/// minimal no-signalling equalities, maximizing f.
sdp::StandardForm ns_program(const BellFunctional& f);

}  // namespace tribell
