#pragma once

// Quantum lower bounds by alternating optimization over three-qubit pure
// states and local projective measurements.

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "tribell/scenario.hpp"

namespace tribell {

using Complex = std::complex<double>;
using Qubit = Eigen::Matrix2cd;
using Operator8 = Eigen::Matrix<Complex, 8, 8>;
using State8 = Eigen::Matrix<Complex, 8, 1>;

/// Two-outcome observables of one party, one Hermitian involution per
/// setting. Outcome 0 is the +1 eigenspace.
struct LocalObservable {
  std::array<Qubit, 2> op{Qubit::Identity(), Qubit::Identity()};

  static LocalObservable from_bloch(const Eigen::Vector3d& n0, const Eigen::Vector3d& n1);
  Qubit projector(int setting, int outcome) const;
  /// Traceless part as a Bloch vector (zero for +-identity).
  Eigen::Vector3d bloch(int setting) const;
};

using Observables = std::array<LocalObservable, 3>;

enum class Bipartition { A_BC, B_AC, C_AB };
std::string to_string(Bipartition b);
/// "A|BC", "B|AC", "C|AB".
Bipartition parse_bipartition(const std::string& text);
/// The party split off by the bipartition.
inline int lone_party(Bipartition b) { return static_cast<int>(b); }

struct QuantumModel {
  State8 state = State8::Zero();
  Observables observables;
  /// Set for biseparable models: the state equals lone (x) rest in the
  /// party order of the bipartition.
  std::optional<Bipartition> product;
  Eigen::Vector2cd lone_factor = Eigen::Vector2cd::Zero();
  Eigen::Vector4cd rest_factor = Eigen::Vector4cd::Zero();

  /// Born-rule table.
  Behavior behavior() const;
};

void to_json(nlohmann::json& j, const QuantumModel& m);
void from_json(const nlohmann::json& j, QuantumModel& m);

/// Operator whose expectation in any state equals the functional evaluated
/// on the Born-rule behavior of that state.
Operator8 bell_operator(const BellFunctional& f, const Observables& observables);

struct SeesawConfig {
  int restarts = 200;
  double tol = 1e-10;
  int max_sweeps = 500;
  std::uint64_t seed = 1;
  bool record_trace = false;
};

struct SeesawResult {
  double value = 0.0;
  QuantumModel model;
  int best_restart = -1;
  long total_sweeps = 0;
  /// Sweeps whose value dropped by more than 1e-12 (relative); always 0 for
  /// a correct ascent.
  int monotonicity_violations = 0;
  /// Per-sweep values of the best restart when tracing.
  std::vector<double> trace;
};

SeesawResult seesaw_max(const BellFunctional& f, const SeesawConfig& config = {});
SeesawResult seesaw_bisep(const BellFunctional& f, Bipartition cut, const SeesawConfig& config = {});

/// Normalizes the global phase: the first amplitude with modulus above
/// 1e-12 becomes real and positive.
template <class Vec>
void fix_phase(Vec& v) {
  for (int i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-12) {
      v *= std::conj(v(i)) / std::abs(v(i));
      v(i) = Complex(std::abs(v(i)), 0.0);
      return;
    }
  }
}

}  // namespace tribell
