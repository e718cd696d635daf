#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "snl/descent.hpp"
#include "snl/model.hpp"

namespace snl {

/// Sparse symmetric matrix stored as explicit (row, col, value) entries, both
/// off-diagonal mirror entries present, so dot(Z) is a plain entrywise sum.
struct SparseSymMatrix {
  struct Entry {
    int row;
    int col;
    double value;
  };
  std::vector<Entry> entries;

  double dot(const Eigen::MatrixXd& z) const {
    double s = 0.0;
    for (const auto& e : entries) s += e.value * z(e.row, e.col);
    return s;
  }
  void add_to(Eigen::MatrixXd& z, double scale) const {
    for (const auto& e : entries) z(e.row, e.col) += scale * e.value;
  }
};

/// One edge measurement: <a, Z> should equal g at a solution. For a
/// sensor-sensor edge {i,j} the matrix touches four entries of the Y block
/// with the (+1, -1; -1, +1) pattern and g = d_ij^2; for an anchor-sensor
/// edge <a, Z> expands to a^T a - 2 a^T x_j + Y_jj with g the squared given
/// distance.
struct SdpMeasurement {
  SparseSymMatrix a;
  double g = 0.0;
  bool is_ss = false;
};

/// The SDP in measurement form: minimize sum_k |<A_k, Z> - g_k| over
/// symmetric (d+n) x (d+n) matrices with Z_{1:d,1:d} = I_d and Z PSD.
struct SdpData {
  int d = 0;
  int n = 0;
  std::vector<SdpMeasurement> measurements;  // SS edges first, then AS

  int dim_z() const { return d + n; }
};

SdpData build_sdp(const SnlProblem& p);

struct SdrOptions {
  double solver_tol = 1e-7;  // primal/dual residual target
  int max_iters = 50000;
  double rank_tol = 1e-6;    // relative to the largest eigenvalue
  // lambda for the unconnected-pair distance regularizer; 0 disables. Large
  // weights can make the SDP unbounded below (the linear reward outruns the
  // L1 measurement growth); the solver then stops at max_iters and reports
  // its residuals.
  double regularization_weight = 0.0;
  double penalty = 1.0;  // splitting penalty rho

  void validate() const;
};

/// Solution of the relaxed problem. `objective` is the measurement residual
/// sum |<A_k,Z> - g_k| (nonnegative by definition); when regularization is
/// on, the solver minimizes objective - lambda * regularizer_value, and
/// `regularizer_value` reports the regularizer's linear term so the optimized
/// total can be reconstructed.
struct SdrSolution {
  Eigen::MatrixXd z;  // (d+n) x (d+n), identity top-left block
  int d = 0;
  int n = 0;
  double objective = 0.0;
  double regularizer_value = 0.0;
  Eigen::VectorXd eigenvalues;  // ascending
  int numeric_rank = 0;         // eigenvalues > rank_tol * lambda_max
  int iters_used = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  bool converged = false;

  Eigen::MatrixXd x() const { return z.block(0, d, d, n); }
  Eigen::MatrixXd y() const { return z.block(d, d, n, n); }
};

/// First-order splitting solver: alternates an identity-block-constrained
/// quadratic step for Z (solved exactly through a Woodbury identity on the
/// measurement Gram matrix), a soft-threshold step absorbing the w+/w- slack
/// pair of each measurement (prox of |.|, mathematically equivalent to the
/// split slack formulation), a PSD-cone projection by symmetric
/// eigendecomposition, and dual updates. Deterministic.
SdrSolution solve_sdr(const SnlProblem& p, const SdrOptions& opts = {});

/// Factor of the solution: Exact when the numeric rank is <= d (then
/// Y = X^T X within tolerance and X solves the problem); otherwise the PSD
/// residual Y - X^T X is factored as X2^T X2 (negative eigenvalues clamped
/// to zero) and (X; X2) realizes every edge in dimension n + d.
struct Extraction {
  bool exact = false;
  Eigen::MatrixXd x;   // d x n
  Eigen::MatrixXd x2;  // n x n; empty when exact

  /// Stacked (d+n) x n positions (X; X2); X2 rows are zero when exact.
  Eigen::MatrixXd lifted() const;
};

Extraction extract(const SdrSolution& sol, double rank_tol = 1e-6);

struct PipelineResult {
  SdrSolution sdr;
  SensorConfig warm;  // X block columns, the d-dimensional warm start
  DescentResult result;
};

/// SDR warm start followed by smooth (b = c = 2) descent.
PipelineResult sdr_gd_pipeline(const SnlProblem& p, const SdrOptions& sdr_opts,
                               const DescentOptions& descent_opts);

std::string sdr_solution_to_json(const SdrSolution& sol);

}  // namespace snl
