#pragma once

// Dense primal-dual interior-point solver for small block SDPs.
//
// Problem form (all blocks real symmetric):
//
//     maximize    c'y + c0
//     subject to  F0_b + sum_i y_i F_i_b  >= 0   for every block b
//                 A y = b                        (optional)
//
// Dual: minimize sum_b tr(F0_b Z_b) + c0 subject to
//       sum_b tr(F_i_b Z_b) + c_i = (A' lambda)_i, Z_b >= 0.
//
// LPs are the special case of 1x1 blocks.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tribell::sdp {

/// Upper-triangle entry (row <= col) of a symmetric matrix.
struct Entry {
  int row = 0;
  int col = 0;
  double value = 0.0;
};
using SparseSymmetric = std::vector<Entry>;

struct LmiBlock {
  int dim = 0;
  SparseSymmetric constant;
  /// (variable index, coefficient matrix); variables absent here do not
  /// enter the block.
  std::vector<std::pair<int, SparseSymmetric>> coefficients;
};

struct StandardForm {
  int num_vars = 0;
  std::vector<LmiBlock> blocks;
  Eigen::VectorXd objective;
  double objective_constant = 0.0;
  Eigen::MatrixXd eq_matrix;  // rows = number of equalities (may be 0)
  Eigen::VectorXd eq_rhs;
  std::optional<Eigen::VectorXd> initial_y;

  int total_dimension() const;
  /// Throws std::invalid_argument on malformed data.
  void validate() const;
};

struct SolverConfig {
  double gap_tol = 1e-9;
  double feas_tol = 1e-9;
  /// Residual level at which a stalled run still counts as solved.
  double accept_tol = 1e-8;
  int max_iter = 200;
  int max_total_dim = 600;
  bool allow_large = false;
  bool record_trace = false;
};

enum class Status { Optimal, MaxIterations, NumericalTrouble, PrimalInfeasible, DualInfeasible };

std::string to_string(Status status);

struct Residuals {
  double primal = 0.0;  // relative norm of F(y) - S
  double dual = 0.0;    // relative norm of the dual equality residual
  double gap = 0.0;     // relative objective gap
};

struct IterationRecord {
  double primal_objective;
  double dual_objective;
  double primal_residual;
  double dual_residual;
  double mu;
};

struct Solution {
  double value = 0.0;       // primal objective, c'y + c0
  double dual_value = 0.0;  // dual objective
  Eigen::VectorXd y;
  std::vector<Eigen::MatrixXd> dual_blocks;
  double duality_gap = 0.0;  // |dual - primal| / (1 + |primal| + |dual|)
  Status status = Status::NumericalTrouble;
  int iterations = 0;
  Residuals residuals;
  std::vector<IterationRecord> trace;
};

/// Throws DimensionGate when the total block dimension exceeds the gate and
/// allow_large is not set. Solver failures are reported through status.
Solution solve(const StandardForm& problem, const SolverConfig& config = {});

struct CertificateReport {
  double min_primal_eigenvalue = 0.0;
  double min_dual_eigenvalue = 0.0;
  double equality_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  double tolerance = 0.0;
  std::vector<std::string> failures;
  bool ok() const { return failures.empty(); }
};

/// Re-derives feasibility and the gap from (y, Z) by dense reconstruction and
/// full eigendecomposition. Throws CertificationFailure listing the failing
/// checks.
CertificateReport certify(const StandardForm& problem, const Solution& solution, double tol = 1e-8);

/// Same checks without throwing.
CertificateReport check_certificate(const StandardForm& problem, const Solution& solution, double tol = 1e-8);

/// Dense F0 + sum y_i F_i for one block.
Eigen::MatrixXd evaluate_block(const LmiBlock& block, const Eigen::VectorXd& y);

}  // namespace tribell::sdp
