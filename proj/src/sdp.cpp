#include "tribell/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "tribell/errors.hpp"

namespace tribell::sdp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string to_string(Status status) {
  switch (status) {
    case Status::Optimal:
      return "Optimal";
    case Status::MaxIterations:
      return "MaxIterations";
    case Status::NumericalTrouble:
      return "NumericalTrouble";
    case Status::PrimalInfeasible:
      return "PrimalInfeasible";
    case Status::DualInfeasible:
      return "DualInfeasible";
  }
  return "?";
}

int StandardForm::total_dimension() const {
  int total = 0;
  for (const auto& b : blocks) total += b.dim;
  return total;
}

void StandardForm::validate() const {
  if (num_vars < 1) throw std::invalid_argument("standard form needs at least one variable");
  if (objective.size() != num_vars) throw std::invalid_argument("objective size mismatch");
  if (eq_matrix.rows() != eq_rhs.size()) throw std::invalid_argument("equality rhs size mismatch");
  if (eq_matrix.rows() > 0 && eq_matrix.cols() != num_vars) {
    throw std::invalid_argument("equality matrix column count mismatch");
  }
  if (initial_y && initial_y->size() != num_vars) throw std::invalid_argument("initial point size mismatch");
  auto check = [](const SparseSymmetric& m, int dim) {
    for (const auto& e : m) {
      if (e.row < 0 || e.col < e.row || e.col >= dim) {
        throw std::invalid_argument("entry outside the upper triangle of its block");
      }
      if (!std::isfinite(e.value)) throw std::invalid_argument("non-finite block entry");
    }
  };
  for (const auto& b : blocks) {
    if (b.dim < 1) throw std::invalid_argument("block dimension must be positive");
    check(b.constant, b.dim);
    for (const auto& [var, m] : b.coefficients) {
      if (var < 0 || var >= num_vars) throw std::invalid_argument("block references unknown variable");
      check(m, b.dim);
    }
  }
}

namespace {

void add_sparse(MatrixXd& dst, const SparseSymmetric& m, double scale) {
  for (const auto& e : m) {
    dst(e.row, e.col) += scale * e.value;
    if (e.row != e.col) dst(e.col, e.row) += scale * e.value;
  }
}

double trace_product(const SparseSymmetric& m, const MatrixXd& x) {
  double s = 0.0;
  for (const auto& e : m) {
    if (e.row == e.col) {
      s += e.value * x(e.row, e.row);
    } else {
      s += e.value * (x(e.row, e.col) + x(e.col, e.row));
    }
  }
  return s;
}

// Same, reading only the lower triangle of a symmetric x.
double trace_product_lower(const SparseSymmetric& m, const MatrixXd& x) {
  double s = 0.0;
  for (const auto& e : m) {
    if (e.row == e.col) {
      s += e.value * x(e.row, e.row);
    } else {
      s += 2.0 * e.value * x(std::max(e.row, e.col), std::min(e.row, e.col));
    }
  }
  return s;
}

// Problem with equalities substituted away: y = offset + basis * t.
struct Reduced {
  int m = 0;
  std::vector<LmiBlock> blocks;
  VectorXd c;
  double c0 = 0.0;
  VectorXd offset;
  MatrixXd basis;  // num_vars x m
  std::vector<int> free_cols;
  bool infeasible = false;
};

Reduced reduce(const StandardForm& p) {
  Reduced r;
  const int n = p.num_vars;
  const int rows = static_cast<int>(p.eq_matrix.rows());
  if (rows == 0) {
    r.m = n;
    r.blocks = p.blocks;
    r.c = p.objective;
    r.c0 = p.objective_constant;
    r.offset = VectorXd::Zero(n);
    r.basis = MatrixXd::Identity(n, n);
    r.free_cols.resize(n);
    std::iota(r.free_cols.begin(), r.free_cols.end(), 0);
    return r;
  }

  // Reduced row echelon form with partial pivoting.
  MatrixXd a = p.eq_matrix;
  VectorXd b = p.eq_rhs;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double tol = 1e-11 * scale;
  std::vector<int> pivot_cols;
  int row = 0;
  for (int col = 0; col < n && row < rows; ++col) {
    int best = row;
    for (int i = row + 1; i < rows; ++i) {
      if (std::abs(a(i, col)) > std::abs(a(best, col))) best = i;
    }
    if (std::abs(a(best, col)) <= tol) continue;
    a.row(row).swap(a.row(best));
    std::swap(b(row), b(best));
    const double piv = a(row, col);
    a.row(row) /= piv;
    b(row) /= piv;
    for (int i = 0; i < rows; ++i) {
      if (i == row || a(i, col) == 0.0) continue;
      const double f = a(i, col);
      a.row(i) -= f * a.row(row);
      b(i) -= f * b(row);
    }
    pivot_cols.push_back(col);
    ++row;
  }
  for (int i = row; i < rows; ++i) {
    if (std::abs(b(i)) > 1e-9 * std::max(1.0, b.cwiseAbs().maxCoeff())) r.infeasible = true;
  }

  std::vector<bool> is_pivot(n, false);
  for (int c : pivot_cols) is_pivot[c] = true;
  std::vector<int>& free_cols = r.free_cols;
  for (int c = 0; c < n; ++c) {
    if (!is_pivot[c]) free_cols.push_back(c);
  }
  r.m = static_cast<int>(free_cols.size());
  r.offset = VectorXd::Zero(n);
  r.basis = MatrixXd::Zero(n, r.m);
  for (std::size_t k = 0; k < pivot_cols.size(); ++k) r.offset(pivot_cols[k]) = b(static_cast<int>(k));
  for (int j = 0; j < r.m; ++j) {
    r.basis(free_cols[j], j) = 1.0;
    for (std::size_t k = 0; k < pivot_cols.size(); ++k) {
      const double v = -a(static_cast<int>(k), free_cols[j]);
      if (std::abs(v) > 1e-15) r.basis(pivot_cols[k], j) = v;
    }
  }

  r.c = r.basis.transpose() * p.objective;
  r.c0 = p.objective_constant + p.objective.dot(r.offset);

  for (const auto& blk : p.blocks) {
    LmiBlock nb;
    nb.dim = blk.dim;
    std::map<std::pair<int, int>, double> constant;
    for (const auto& e : blk.constant) constant[{e.row, e.col}] += e.value;
    std::map<int, std::map<std::pair<int, int>, double>> coefs;
    for (const auto& [var, mat] : blk.coefficients) {
      if (r.offset(var) != 0.0) {
        for (const auto& e : mat) constant[{e.row, e.col}] += r.offset(var) * e.value;
      }
      for (int j = 0; j < r.m; ++j) {
        const double w = r.basis(var, j);
        if (w == 0.0) continue;
        auto& dst = coefs[j];
        for (const auto& e : mat) dst[{e.row, e.col}] += w * e.value;
      }
    }
    for (const auto& [rc, v] : constant) {
      if (v != 0.0) nb.constant.push_back({rc.first, rc.second, v});
    }
    for (const auto& [j, mat] : coefs) {
      SparseSymmetric s;
      for (const auto& [rc, v] : mat) {
        if (std::abs(v) > 1e-15) s.push_back({rc.first, rc.second, v});
      }
      if (!s.empty()) nb.coefficients.emplace_back(j, std::move(s));
    }
    r.blocks.push_back(std::move(nb));
  }
  return r;
}

MatrixXd assemble(const LmiBlock& blk, const VectorXd& y) {
  MatrixXd f = MatrixXd::Zero(blk.dim, blk.dim);
  add_sparse(f, blk.constant, 1.0);
  for (const auto& [var, m] : blk.coefficients) {
    if (y(var) != 0.0) add_sparse(f, m, y(var));
  }
  return f;
}

MatrixXd assemble_linear(const LmiBlock& blk, const VectorXd& dy) {
  MatrixXd f = MatrixXd::Zero(blk.dim, blk.dim);
  for (const auto& [var, m] : blk.coefficients) {
    if (dy(var) != 0.0) add_sparse(f, m, dy(var));
  }
  return f;
}

// Largest alpha with X + alpha*dX >= 0, given the Cholesky factor of X.
double max_step(const Eigen::LLT<MatrixXd>& chol, const MatrixXd& dx) {
  const MatrixXd l = chol.matrixL();
  MatrixXd t = l.triangularView<Eigen::Lower>().solve(dx);
  t = l.triangularView<Eigen::Lower>().solve(t.transpose()).transpose();
  t = 0.5 * (t + t.transpose());
  const double lmin = Eigen::SelfAdjointEigenSolver<MatrixXd>(t, Eigen::EigenvaluesOnly).eigenvalues()(0);
  if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

// Nesterov-Todd scaling: W = G G' with W S W = Z and G' S G = G^-1 Z G^-T =
// diag(lambda).
bool nt_scaling(const MatrixXd& s, const MatrixXd& z, MatrixXd& w, MatrixXd& g, VectorXd& lambda) {
  Eigen::LLT<MatrixXd> ls(s);
  Eigen::LLT<MatrixXd> lz(z);
  if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) return false;
  const MatrixXd lsm = ls.matrixL();
  const MatrixXd lzm = lz.matrixL();
  Eigen::BDCSVD<MatrixXd> svd(lsm.transpose() * lzm, Eigen::ComputeFullU | Eigen::ComputeFullV);
  lambda = svd.singularValues();
  if (lambda.minCoeff() <= 0.0) return false;
  g = lzm * svd.matrixV() * lambda.cwiseSqrt().cwiseInverse().asDiagonal();
  w = g * g.transpose();
  return true;
}

struct BlockState {
  MatrixXd s;
  MatrixXd z;
};

struct Support {
  std::vector<int> index;
  MatrixXd compact;
};

Support make_support(const SparseSymmetric& m) {
  Support sup;
  for (const auto& e : m) {
    sup.index.push_back(e.row);
    sup.index.push_back(e.col);
  }
  std::sort(sup.index.begin(), sup.index.end());
  sup.index.erase(std::unique(sup.index.begin(), sup.index.end()), sup.index.end());
  const int k = static_cast<int>(sup.index.size());
  sup.compact = MatrixXd::Zero(k, k);
  auto pos = [&](int i) {
    return static_cast<int>(std::lower_bound(sup.index.begin(), sup.index.end(), i) - sup.index.begin());
  };
  for (const auto& e : m) {
    const int r = pos(e.row);
    const int c = pos(e.col);
    sup.compact(r, c) += e.value;
    if (r != c) sup.compact(c, r) += e.value;
  }
  return sup;
}

// Symmetric vectorization with sqrt(2) on off-diagonal entries, so that the
// Euclidean product matches tr(XY).
void vec_sym(const MatrixXd& x, double* out) {
  const int n = static_cast<int>(x.rows());
  int k = 0;
  for (int j = 0; j < n; ++j) {
    out[k++] = x(j, j);
    for (int i = j + 1; i < n; ++i) out[k++] = std::sqrt(2.0) * x(i, j);
  }
}

MatrixXd unvec_sym(const double* in, int n) {
  MatrixXd x(n, n);
  int k = 0;
  for (int j = 0; j < n; ++j) {
    x(j, j) = in[k++];
    for (int i = j + 1; i < n; ++i) x(i, j) = x(j, i) = in[k++] / std::sqrt(2.0);
  }
  return x;
}

// Columns vec(G' F_i G) stacked over blocks. The Schur matrix is A'A, so a QR
// factorization of A solves the Newton system with the square root of its
// condition number; used once the normal equations stop being accurate.
struct ScaledSystem {
  MatrixXd a;
  std::vector<int> row0;
  Eigen::HouseholderQR<MatrixXd> qr;
};

}  // namespace

Eigen::MatrixXd evaluate_block(const LmiBlock& block, const Eigen::VectorXd& y) { return assemble(block, y); }

Solution solve(const StandardForm& problem, const SolverConfig& config) {
  problem.validate();
  if (problem.total_dimension() > config.max_total_dim && !config.allow_large) {
    throw DimensionGate("total block dimension " + std::to_string(problem.total_dimension()) +
                        " exceeds the solver gate of " + std::to_string(config.max_total_dim));
  }

  const Reduced red = reduce(problem);
  Solution sol;
  if (red.infeasible) {
    sol.status = Status::PrimalInfeasible;
    sol.y = red.offset;
    return sol;
  }

  const int m = red.m;
  const int nb = static_cast<int>(red.blocks.size());
  int total_dim = 0;
  for (const auto& b : red.blocks) total_dim += b.dim;

  // Scale-dependent constants.
  double f0_norm = 0.0;
  for (const auto& b : red.blocks) {
    for (const auto& e : b.constant) f0_norm += e.value * e.value * (e.row == e.col ? 1.0 : 2.0);
  }
  f0_norm = std::sqrt(f0_norm);
  const double c_norm = red.c.norm();

  // Starting point: the supplied interior point if it is strictly feasible,
  // otherwise an infeasible start.
  VectorXd t = VectorXd::Zero(m);
  if (problem.initial_y) {
    for (int j = 0; j < m; ++j) t(j) = (*problem.initial_y)(red.free_cols[j]);
  }
  std::vector<BlockState> st(nb);
  bool feasible_start = problem.initial_y.has_value();
  for (int b = 0; b < nb && feasible_start; ++b) {
    st[b].s = assemble(red.blocks[b], t);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(st[b].s, Eigen::EigenvaluesOnly);
    if (es.eigenvalues()(0) <= 1e-10 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff())) feasible_start = false;
  }
  double max_coef = 1.0;
  for (const auto& b : red.blocks) {
    for (const auto& [var, mat] : b.coefficients) {
      for (const auto& e : mat) max_coef = std::max(max_coef, std::abs(e.value));
    }
  }
  const double zeta = std::max(1.0, 10.0 * (1.0 + red.c.cwiseAbs().maxCoeff()) / max_coef);
  if (!feasible_start) {
    t = VectorXd::Zero(m);
    const double xi = std::max(10.0, 10.0 * (1.0 + f0_norm));
    for (int b = 0; b < nb; ++b) st[b].s = xi * MatrixXd::Identity(red.blocks[b].dim, red.blocks[b].dim);
  }
  for (int b = 0; b < nb; ++b) st[b].z = zeta * MatrixXd::Identity(red.blocks[b].dim, red.blocks[b].dim);

  // Gram matrix tr(F_i F_j), used to keep dual steps on the dual affine set.
  MatrixXd gram = MatrixXd::Zero(m, m);
  for (const auto& blk : red.blocks) {
    for (const auto& [vi, mi] : blk.coefficients) {
      MatrixXd fi = MatrixXd::Zero(blk.dim, blk.dim);
      add_sparse(fi, mi, 1.0);
      for (const auto& [vj, mj] : blk.coefficients) gram(vi, vj) += trace_product(mj, fi);
    }
  }
  const Eigen::LDLT<MatrixXd> gram_ldlt(gram);

  // Each coefficient restricted to the rows and columns it touches.
  std::vector<std::vector<Support>> support(nb);
  for (int b = 0; b < nb; ++b) {
    for (const auto& [var, mat] : red.blocks[b].coefficients) support[b].push_back(make_support(mat));
  }

  std::vector<MatrixXd> rp(nb);
  VectorXd rd(m);
  auto evaluate = [&](double& pobj, double& dobj, double& pinf, double& dinf, double& mu) {
    pobj = red.c.dot(t) + red.c0;
    dobj = red.c0;
    double rp_norm = 0.0;
    mu = 0.0;
    rd = red.c;
    for (int b = 0; b < nb; ++b) {
      const auto& blk = red.blocks[b];
      rp[b] = assemble(blk, t) - st[b].s;
      rp_norm += rp[b].squaredNorm();
      dobj += trace_product(blk.constant, st[b].z);
      for (const auto& [var, mat] : blk.coefficients) rd(var) += trace_product(mat, st[b].z);
      mu += (st[b].s.cwiseProduct(st[b].z)).sum();
    }
    mu /= total_dim;
    pinf = std::sqrt(rp_norm) / (1.0 + f0_norm);
    dinf = rd.norm() / (1.0 + c_norm);
  };

  double pobj = 0;
  double dobj = 0;
  double pinf = 0;
  double dinf = 0;
  double mu = 0;
  sol.status = Status::MaxIterations;
  int stalls = 0;
  double best_merit = std::numeric_limits<double>::infinity();
  int best_iter = 0;
  VectorXd best_t = t;
  std::vector<BlockState> best_st = st;
  auto converged = [&](double rel_gap) {
    return rel_gap <= config.gap_tol && pinf <= config.feas_tol && dinf <= config.feas_tol;
  };
  for (int iter = 0; iter <= config.max_iter; ++iter) {
    evaluate(pobj, dobj, pinf, dinf, mu);
    const double rel_gap = std::abs(dobj - pobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    if (config.record_trace) sol.trace.push_back({pobj, dobj, pinf, dinf, mu});
    sol.iterations = iter;
    if (converged(rel_gap)) {
      sol.status = Status::Optimal;
      break;
    }
    const double merit = std::max({rel_gap, pinf, dinf});
    if (merit < best_merit) {
      best_merit = merit;
      best_iter = iter;
      best_t = t;
      best_st = st;
    }
    // Stagnation once the accept level is reached ends the run early.
    if (best_merit <= config.accept_tol && iter - best_iter >= 8) break;
    if (iter == config.max_iter) break;
    if (t.size() > 0 && t.cwiseAbs().maxCoeff() > 1e10) {
      sol.status = Status::DualInfeasible;
      break;
    }
    double z_max = 0.0;
    for (const auto& s : st) z_max = std::max(z_max, s.z.cwiseAbs().maxCoeff());
    if (z_max > 1e12) {
      sol.status = Status::PrimalInfeasible;
      break;
    }

    // Scaling and the Schur complement.
    std::vector<MatrixXd> w(nb);
    std::vector<MatrixXd> gs(nb);
    std::vector<VectorXd> lam(nb);
    std::vector<Eigen::LLT<MatrixXd>> s_chol(nb);
    std::vector<Eigen::LLT<MatrixXd>> z_chol(nb);
    bool trouble = false;
    for (int b = 0; b < nb && !trouble; ++b) {
      s_chol[b].compute(st[b].s);
      z_chol[b].compute(st[b].z);
      if (s_chol[b].info() != Eigen::Success || z_chol[b].info() != Eigen::Success ||
          !nt_scaling(st[b].s, st[b].z, w[b], gs[b], lam[b])) {
        trouble = true;
      }
    }
    if (trouble) {
      sol.status = Status::NumericalTrouble;
      break;
    }

    MatrixXd schur = MatrixXd::Zero(m, m);
    VectorXd rhs_const = rd;  // rd - tr(F W Rp W)
    for (int b = 0; b < nb; ++b) {
      const auto& blk = red.blocks[b];
      const MatrixXd& wb = w[b];
      const MatrixXd wrw = wb * rp[b] * wb;
      for (const auto& [var, mat] : blk.coefficients) rhs_const(var) -= trace_product(mat, wrw);
      const int n = blk.dim;
      MatrixXd g(n, n);
      MatrixXd wi;
      for (std::size_t l = 0; l < blk.coefficients.size(); ++l) {
        const int vl = blk.coefficients[l].first;
        // W F_l W through the support of F_l: two small products instead of
        // one outer product per entry.
        const auto& sup = support[b][l];
        const int k = static_cast<int>(sup.index.size());
        wi.resize(n, k);
        for (int j = 0; j < k; ++j) wi.col(j) = wb.col(sup.index[j]);
        g.triangularView<Eigen::Lower>() = (wi * sup.compact) * wi.transpose();
        for (const auto& [vk, mk] : blk.coefficients) {
          if (vk < vl) continue;
          const double v = trace_product_lower(mk, g);
          schur(vk, vl) += v;
          if (vk != vl) schur(vl, vk) += v;
        }
      }
    }

    Eigen::LLT<MatrixXd> schur_chol(schur);
    bool use_qr = schur_chol.info() != Eigen::Success;
    ScaledSystem scaled;
    auto build_scaled = [&] {
      int rows = 0;
      for (const auto& blk : red.blocks) {
        scaled.row0.push_back(rows);
        rows += blk.dim * (blk.dim + 1) / 2;
      }
      scaled.a = MatrixXd::Zero(rows, m);
      VectorXd col;
      for (int b = 0; b < nb; ++b) {
        const auto& blk = red.blocks[b];
        const int n = blk.dim;
        col.resize(n * (n + 1) / 2);
        MatrixXd gi;
        for (std::size_t l = 0; l < blk.coefficients.size(); ++l) {
          const auto& sup = support[b][l];
          const int k = static_cast<int>(sup.index.size());
          gi.resize(k, n);
          for (int j = 0; j < k; ++j) gi.row(j) = gs[b].row(sup.index[j]);
          const MatrixXd x = gi.transpose() * (sup.compact * gi);
          vec_sym(x, col.data());
          scaled.a.col(blk.coefficients[l].first).segment(scaled.row0[b], col.size()) += col;
        }
      }
      scaled.qr.compute(scaled.a);
    };

    // Search direction for a target H of dS^ + dZ^ in the scaled space
    // (dS^ = G' dS G, dZ^ = G^-1 dZ G^-T): dZ = G H G' - W dS W.
    auto direction = [&](const std::vector<MatrixXd>& h, VectorXd& dt, std::vector<MatrixXd>& ds,
                         std::vector<MatrixXd>& dz) {
      std::vector<MatrixXd> ghg(nb);
      VectorXd rhs = rhs_const;
      for (int b = 0; b < nb; ++b) {
        ghg[b] = gs[b] * h[b] * gs[b].transpose();
        for (const auto& [var, mat] : red.blocks[b].coefficients) rhs(var) += trace_product(mat, ghg[b]);
      }
      while (true) {
        if (!use_qr) {
          dt = schur_chol.solve(rhs);
          // The formed Schur matrix loses accuracy as W becomes ill-conditioned;
          // refine against the operator applied block by block.
          double res_norm = std::numeric_limits<double>::infinity();
          for (int pass = 0; pass < 5; ++pass) {
            VectorXd res = rhs;
            for (int b = 0; b < nb; ++b) {
              const MatrixXd wfw = w[b] * assemble_linear(red.blocks[b], dt) * w[b];
              for (const auto& [var, mat] : red.blocks[b].coefficients) res(var) -= trace_product(mat, wfw);
            }
            const double prev = res_norm;
            res_norm = res.norm();
            if (res_norm <= 1e-14 * (1.0 + rhs.norm()) || res_norm > 0.5 * prev) break;
            dt += schur_chol.solve(res);
          }
        }
        if (use_qr) {
          if (scaled.a.size() == 0) build_scaled();
          const auto& qr = scaled.qr;
          const int rows = static_cast<int>(scaled.a.rows());
          const auto r_factor = qr.matrixQR().topLeftCorner(m, m).triangularView<Eigen::Upper>();
          // With target = H - G' Rp G and v the minimum-norm solution of A'v = rd:
          // dZ^ = (I - QQ')target - v and A dt = QQ'target + v.
          VectorXd target(rows);
          for (int b = 0; b < nb; ++b) {
            const MatrixXd x = h[b] - gs[b].transpose() * rp[b] * gs[b];
            vec_sym(x, target.data() + scaled.row0[b]);
          }
          const VectorXd qt = qr.householderQ().adjoint() * target;
          // v = Q [u; 0].
          const VectorXd u = r_factor.transpose().solve(rd);
          dt = r_factor.solve(qt.head(m) + u);
          VectorXd perp = qt;
          perp.head(m) = -u;
          const VectorXd dz_hat = qr.householderQ() * perp;
          for (int b = 0; b < nb; ++b) {
            ds[b] = assemble_linear(red.blocks[b], dt) + rp[b];
            const MatrixXd d = gs[b] * unvec_sym(dz_hat.data() + scaled.row0[b], red.blocks[b].dim) * gs[b].transpose();
            dz[b] = 0.5 * (d + d.transpose());
          }
        } else {
          for (int b = 0; b < nb; ++b) {
            ds[b] = assemble_linear(red.blocks[b], dt) + rp[b];
            MatrixXd d = ghg[b] - w[b] * ds[b] * w[b];
            dz[b] = 0.5 * (d + d.transpose());
          }
        }
        // Rounding in W dS W leaves dZ slightly off the dual affine set. The
        // projected step is used unless the shift, which ignores the cone,
        // would cut the dual step short.
        VectorXd miss = rd;
        for (int b = 0; b < nb; ++b) {
          for (const auto& [var, mat] : red.blocks[b].coefficients) miss(var) += trace_product(mat, dz[b]);
        }
        const VectorXd shift = gram_ldlt.solve(miss);
        std::vector<MatrixXd> projected = dz;
        double raw_step = 1.0;
        double projected_step = 1.0;
        for (int b = 0; b < nb; ++b) {
          for (const auto& [var, mat] : red.blocks[b].coefficients) add_sparse(projected[b], mat, -shift(var));
          raw_step = std::min(raw_step, max_step(z_chol[b], dz[b]));
          projected_step = std::min(projected_step, max_step(z_chol[b], projected[b]));
        }
        const bool projected_ok = projected_step >= 0.5 * raw_step;
        if (projected_ok) dz = std::move(projected);
        // A miss the projection cannot absorb would show up as dual
        // infeasibility; redo the direction through the QR factorization.
        if (projected_ok || use_qr || miss.norm() <= 0.1 * config.feas_tol * (1.0 + c_norm)) break;
        use_qr = true;
      }
    };
    auto step_lengths = [&](const std::vector<MatrixXd>& ds, const std::vector<MatrixXd>& dz, double& ap, double& ad) {
      ap = std::numeric_limits<double>::infinity();
      ad = std::numeric_limits<double>::infinity();
      for (int b = 0; b < nb; ++b) {
        ap = std::min(ap, max_step(s_chol[b], ds[b]));
        ad = std::min(ad, max_step(z_chol[b], dz[b]));
      }
    };

    // Predictor: H = -Lambda.
    VectorXd dt;
    std::vector<MatrixXd> ds(nb);
    std::vector<MatrixXd> dz(nb);
    std::vector<MatrixXd> h(nb);
    for (int b = 0; b < nb; ++b) h[b] = MatrixXd((-lam[b]).asDiagonal());
    direction(h, dt, ds, dz);
    double ap = 0;
    double ad = 0;
    step_lengths(ds, dz, ap, ad);
    ap = std::min(1.0, ap);
    ad = std::min(1.0, ad);
    double mu_aff = 0.0;
    for (int b = 0; b < nb; ++b) {
      mu_aff += ((st[b].s + ap * ds[b]).cwiseProduct(st[b].z + ad * dz[b])).sum();
    }
    mu_aff /= total_dim;
    double sigma = std::pow(std::max(0.0, mu_aff) / mu, 3.0);
    sigma = std::clamp(sigma, 0.0, 1.0);
    if (pinf > config.feas_tol || dinf > config.feas_tol) sigma = std::max(sigma, 0.1);

    // Corrector with the second-order term of the affine step:
    // Lambda H + H Lambda = 2 sigma mu I - 2 Lambda^2 - (A B + B A).
    for (int b = 0; b < nb; ++b) {
      const MatrixXd a_hat = gs[b].transpose() * ds[b] * gs[b];
      const MatrixXd b_hat = h[b] - a_hat;
      MatrixXd r = -(a_hat * b_hat + b_hat * a_hat);
      const int n = static_cast<int>(lam[b].size());
      for (int i = 0; i < n; ++i) r(i, i) += 2.0 * (sigma * mu - lam[b](i) * lam[b](i));
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) r(i, j) /= lam[b](i) + lam[b](j);
      }
      h[b] = 0.5 * (r + r.transpose());
    }

    // Corrector. A second-order term that wrecks the step (tiny eigenvalue
    // pairs in Lambda) is dropped in favour of plain centering.
    const double affine_step = std::min(ap, ad);
    direction(h, dt, ds, dz);
    step_lengths(ds, dz, ap, ad);
    if (std::min(ap, ad) < 0.1 * affine_step) {
      for (int b = 0; b < nb; ++b) {
        h[b] = MatrixXd((sigma * mu * lam[b].cwiseInverse() - lam[b]).asDiagonal());
      }
      direction(h, dt, ds, dz);
      step_lengths(ds, dz, ap, ad);
    }
    ap = std::min(1.0, 0.98 * ap);
    ad = std::min(1.0, 0.98 * ad);
    if (ap < 1e-12 && ad < 1e-12) {
      if (++stalls > 3) {
        sol.status = Status::NumericalTrouble;
        break;
      }
    } else {
      stalls = 0;
    }

    t += ap * dt;
    for (int b = 0; b < nb; ++b) {
      st[b].s += ap * ds[b];
      st[b].s = 0.5 * (st[b].s + st[b].s.transpose());
      st[b].z += ad * dz[b];
      st[b].z = 0.5 * (st[b].z + st[b].z.transpose());
    }
  }

  // A run that stalls short of gap_tol falls back to its best iterate, which
  // is accepted when every residual is within accept_tol.
  if (sol.status == Status::MaxIterations || sol.status == Status::NumericalTrouble) {
    if (best_merit <= std::max(config.gap_tol, config.accept_tol)) {
      t = best_t;
      st = best_st;
      sol.status = Status::Optimal;
    }
  }

  evaluate(pobj, dobj, pinf, dinf, mu);
  sol.value = pobj;
  sol.dual_value = dobj;
  sol.y = red.offset + red.basis * t;
  sol.duality_gap = std::abs(dobj - pobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
  sol.residuals = {pinf, dinf, sol.duality_gap};
  sol.dual_blocks.reserve(nb);
  for (auto& s : st) sol.dual_blocks.push_back(std::move(s.z));
  return sol;
}

// ---------------------------------------------------------------------------
// Certification

CertificateReport check_certificate(const StandardForm& p, const Solution& s, double tol) {
  CertificateReport rep;
  rep.tolerance = tol;
  if (s.y.size() != p.num_vars || s.dual_blocks.size() != p.blocks.size()) {
    rep.failures.push_back("solution shape does not match the problem");
    return rep;
  }

  rep.min_primal_eigenvalue = std::numeric_limits<double>::infinity();
  rep.min_dual_eigenvalue = std::numeric_limits<double>::infinity();
  double dual_obj = p.objective_constant;
  VectorXd r = p.objective;
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    const auto& blk = p.blocks[b];
    MatrixXd f = MatrixXd::Zero(blk.dim, blk.dim);
    for (const auto& e : blk.constant) {
      f(e.row, e.col) += e.value;
      if (e.row != e.col) f(e.col, e.row) += e.value;
    }
    for (const auto& [var, mat] : blk.coefficients) {
      for (const auto& e : mat) {
        f(e.row, e.col) += s.y(var) * e.value;
        if (e.row != e.col) f(e.col, e.row) += s.y(var) * e.value;
      }
    }
    const MatrixXd& z = s.dual_blocks[b];
    Eigen::SelfAdjointEigenSolver<MatrixXd> ef(f, Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<MatrixXd> ez(0.5 * (z + z.transpose()), Eigen::EigenvaluesOnly);
    rep.min_primal_eigenvalue = std::min(rep.min_primal_eigenvalue, ef.eigenvalues()(0));
    rep.min_dual_eigenvalue = std::min(rep.min_dual_eigenvalue, ez.eigenvalues()(0));
    for (const auto& e : blk.constant) {
      dual_obj += e.value * (e.row == e.col ? z(e.row, e.row) : z(e.row, e.col) + z(e.col, e.row));
    }
    for (const auto& [var, mat] : blk.coefficients) {
      for (const auto& e : mat) {
        r(var) += e.value * (e.row == e.col ? z(e.row, e.row) : z(e.row, e.col) + z(e.col, e.row));
      }
    }
  }

  // Dual equality residual modulo the range of A'.
  if (p.eq_matrix.rows() > 0) {
    const MatrixXd at = p.eq_matrix.transpose();
    const VectorXd lambda = at.colPivHouseholderQr().solve(r);
    r -= at * lambda;
    dual_obj += lambda.dot(p.eq_rhs);
    rep.equality_residual = (p.eq_matrix * s.y - p.eq_rhs).cwiseAbs().maxCoeff();
  }
  rep.dual_residual = r.cwiseAbs().maxCoeff() / (1.0 + p.objective.cwiseAbs().maxCoeff());
  const double primal_obj = p.objective.dot(s.y) + p.objective_constant;
  rep.gap = std::abs(dual_obj - primal_obj) / (1.0 + std::abs(primal_obj) + std::abs(dual_obj));

  if (rep.min_primal_eigenvalue < -tol) rep.failures.push_back("primal block not PSD");
  if (rep.min_dual_eigenvalue < -tol) rep.failures.push_back("dual block not PSD");
  if (rep.equality_residual > tol) rep.failures.push_back("linear equalities violated");
  if (rep.dual_residual > tol) rep.failures.push_back("dual equality residual too large");
  if (rep.gap > tol) rep.failures.push_back("duality gap too large");
  if (std::abs(primal_obj - s.value) > tol * (1.0 + std::abs(primal_obj))) {
    rep.failures.push_back("reported value does not match c'y");
  }
  return rep;
}

CertificateReport certify(const StandardForm& p, const Solution& s, double tol) {
  CertificateReport rep = check_certificate(p, s, tol);
  if (!rep.ok()) {
    std::string msg = "certification failed:";
    for (const auto& f : rep.failures) msg += " " + f + ";";
    throw CertificationFailure(msg);
  }
  return rep;
}

}  // namespace tribell::sdp
