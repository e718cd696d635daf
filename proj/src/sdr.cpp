#include "snl/sdr.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace snl {

void SdrOptions::validate() const {
  if (!(solver_tol > 0) || max_iters < 1 || !(rank_tol > 0) ||
      regularization_weight < 0 || !(penalty > 0))
    throw std::invalid_argument("SdrOptions: bad parameters");
}

SdpData build_sdp(const SnlProblem& p) {
  p.validate();
  SdpData sdp;
  sdp.d = p.dim;
  sdp.n = p.topology.n_sensors();
  const int d = sdp.d;

  const auto& ess = p.topology.edges_ss();
  for (size_t k = 0; k < ess.size(); ++k) {
    SdpMeasurement m;
    m.is_ss = true;
    const int i = d + ess[k].i, j = d + ess[k].j;
    m.a.entries = {{i, i, 1.0}, {i, j, -1.0}, {j, i, -1.0}, {j, j, 1.0}};
    m.g = p.dist_ss[k] * p.dist_ss[k];
    sdp.measurements.push_back(std::move(m));
  }
  const auto& eas = p.topology.edges_as();
  for (size_t k = 0; k < eas.size(); ++k) {
    SdpMeasurement m;
    m.is_ss = false;
    const auto& a = p.anchors[eas[k].anchor];
    const int j = d + eas[k].sensor;
    // (a; -e_j)(a; -e_j)^T: a a^T block, -a cross terms, +1 corner.
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c)
        if (a[r] * a[c] != 0.0) m.a.entries.push_back({r, c, a[r] * a[c]});
    for (int r = 0; r < d; ++r) {
      if (a[r] != 0.0) {
        m.a.entries.push_back({r, j, -a[r]});
        m.a.entries.push_back({j, r, -a[r]});
      }
    }
    m.a.entries.push_back({j, j, 1.0});
    m.g = p.dist_as[k] * p.dist_as[k];
    sdp.measurements.push_back(std::move(m));
  }
  return sdp;
}

namespace {

// Measurement with the top-left (identity-block) support removed; the
// constant it contributed moves into the right-hand side.
struct FreeMeasurement {
  SparseSymMatrix m;
  double g = 0.0;
};

FreeMeasurement project_measurement(const SdpMeasurement& meas, int d) {
  FreeMeasurement out;
  out.g = meas.g;
  for (const auto& e : meas.a.entries) {
    if (e.row < d && e.col < d) {
      if (e.row == e.col) out.g -= e.value;  // dotted with the fixed I_d
    } else {
      out.m.entries.push_back(e);
    }
  }
  return out;
}

double frob_dot(const SparseSymMatrix& a, const Eigen::MatrixXd& dense) {
  return a.dot(dense);
}

// Regularizer: sum over unconnected pairs of the squared-distance surrogate,
// i.e. Y_ii - 2Y_ij + Y_jj for sensor pairs and a^T a - 2 a^T x_j + Y_jj for
// anchor-sensor pairs. Returned with the top-left support already removed
// (the constant part does not move the minimizer).
SparseSymMatrix build_regularizer(const SnlProblem& p) {
  const int d = p.dim;
  const int n = p.topology.n_sensors();
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(d + n, d + n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (p.topology.has_ss(i, j)) continue;
      r(d + i, d + i) += 1.0;
      r(d + j, d + j) += 1.0;
      r(d + i, d + j) -= 1.0;
      r(d + j, d + i) -= 1.0;
    }
  }
  for (int a = 0; a < p.topology.n_anchors(); ++a) {
    for (int j = 0; j < n; ++j) {
      if (p.topology.has_as(a, j)) continue;
      r(d + j, d + j) += 1.0;
      for (int k = 0; k < d; ++k) {
        r(k, d + j) -= p.anchors[a][k];
        r(d + j, k) -= p.anchors[a][k];
      }
    }
  }
  SparseSymMatrix out;
  for (int i = 0; i < d + n; ++i)
    for (int j = 0; j < d + n; ++j)
      if (r(i, j) != 0.0) out.entries.push_back({i, j, r(i, j)});
  return out;
}

}  // namespace

SdrSolution solve_sdr(const SnlProblem& p, const SdrOptions& opts) {
  opts.validate();
  const SdpData sdp = build_sdp(p);
  const int d = sdp.d;
  const int n = sdp.n;
  const int N = d + n;
  const int m = static_cast<int>(sdp.measurements.size());
  const double rho = opts.penalty;
  const double lambda = opts.regularization_weight;

  std::vector<FreeMeasurement> fm;
  fm.reserve(m);
  for (const auto& meas : sdp.measurements)
    fm.push_back(project_measurement(meas, d));

  SparseSymMatrix reg;
  if (lambda > 0.0) reg = build_regularizer(p);

  // Gram matrix of the projected measurements; Woodbury factor I + G.
  Eigen::MatrixXd gram = Eigen::MatrixXd::Identity(m, m);
  {
    Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(N, N);
    for (int k = 0; k < m; ++k) {
      fm[k].m.add_to(scatter, 1.0);
      for (int l = k; l < m; ++l) {
        const double dot = frob_dot(fm[l].m, scatter);
        gram(k, l) += dot;
        if (l != k) gram(l, k) += dot;
      }
      fm[k].m.add_to(scatter, -1.0);
    }
  }
  Eigen::LDLT<Eigen::MatrixXd> gram_ldlt(gram);
  if (gram_ldlt.info() != Eigen::Success)
    throw std::runtime_error("solve_sdr: Gram factorization failed");

  auto apply_meas = [&](const Eigen::MatrixXd& z) {
    Eigen::VectorXd out(m);
    for (int k = 0; k < m; ++k) out[k] = fm[k].m.dot(z);
    return out;
  };
  auto scatter_meas = [&](const Eigen::VectorXd& y) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(N, N);
    for (int k = 0; k < m; ++k) fm[k].m.add_to(out, y[k]);
    return out;
  };
  auto impose_block = [&](Eigen::MatrixXd& z) {
    z.topLeftCorner(d, d) = Eigen::MatrixXd::Identity(d, d);
  };
  auto zero_block = [&](Eigen::MatrixXd& z) {
    z.topLeftCorner(d, d).setZero();
  };

  Eigen::VectorXd g_free(m);
  for (int k = 0; k < m; ++k) g_free[k] = fm[k].g;

  // Start from the anchor centroid with unit Schur slack: an interior,
  // translation-equivariant point. The splitting method selects among
  // optimal-face points partly by proximity to its start, so a neutral
  // center beats the coordinate origin.
  Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
  if (!p.anchors.empty()) {
    for (const auto& a : p.anchors) centroid += a;
    centroid /= static_cast<double>(p.anchors.size());
  }
  Eigen::MatrixXd z = Eigen::MatrixXd::Identity(N, N);
  for (int j = 0; j < n; ++j) {
    z.block(0, d + j, d, 1) = centroid;
    z.block(d + j, 0, 1, d) = centroid.transpose();
  }
  const double c2 = centroid.squaredNorm();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) z(d + i, d + j) = c2 + (i == j ? 1.0 : 0.0);
  Eigen::MatrixXd psd = z;                      // PSD copy
  Eigen::MatrixXd dual_psd = Eigen::MatrixXd::Zero(N, N);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(m); // residual copy
  Eigen::VectorXd dual_r = Eigen::VectorXd::Zero(m);

  SdrSolution sol;
  sol.d = d;
  sol.n = n;

  // Residual balancing: grow/shrink the penalty when one residual lags the
  // other by 10x, rescaling the (scaled) duals to keep them consistent.
  // Deterministic; the Woodbury factor does not depend on the penalty.
  double cur_rho = rho;
  double inv_rho = 1.0 / cur_rho;
  int iter = 0;
  for (; iter < opts.max_iters; ++iter) {
    // Z step: quadratic over the free entries, identity block held fixed.
    Eigen::MatrixXd b = psd - dual_psd + scatter_meas(g_free + r - dual_r);
    if (lambda > 0.0) reg.add_to(b, lambda * inv_rho);
    zero_block(b);
    const Eigen::VectorXd mb = apply_meas(b);
    const Eigen::VectorXd corr = gram_ldlt.solve(mb);
    z = b - scatter_meas(corr);
    impose_block(z);

    // Residual step: prox of the L1 objective (soft threshold). This is the
    // w+ - w- slack pair of the usual SDP form collapsed into one variable.
    // Over-relaxation mixes the fresh Z against the previous copies.
    const double alpha = 1.6;
    const Eigen::VectorXd mz = apply_meas(z);
    const Eigen::VectorXd relaxed_r = alpha * (mz - g_free) + (1.0 - alpha) * r;
    const Eigen::VectorXd w = relaxed_r + dual_r;
    Eigen::VectorXd r_new(m);
    for (int k = 0; k < m; ++k) {
      const double v = w[k];
      r_new[k] = v > inv_rho ? v - inv_rho : (v < -inv_rho ? v + inv_rho : 0.0);
    }

    // PSD step: eigendecompose and clamp.
    const Eigen::MatrixXd relaxed_z = alpha * z + (1.0 - alpha) * psd;
    Eigen::MatrixXd q = relaxed_z + dual_psd;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q);
    if (eig.info() != Eigen::Success)
      throw std::runtime_error("solve_sdr: eigendecomposition failed");
    const Eigen::VectorXd lam = eig.eigenvalues().cwiseMax(0.0);
    Eigen::MatrixXd psd_new =
        eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
    psd_new = 0.5 * (psd_new + psd_new.transpose());

    // Dual updates.
    dual_r += relaxed_r - r_new;
    dual_psd += relaxed_z - psd_new;

    // Stopping: absolute primal and dual residuals (desk-scale problems;
    // keeps the feasibility floor of the returned Z at the tolerance itself)
    // evaluated on the un-relaxed iterates.
    const double pri = std::sqrt((mz - g_free - r_new).squaredNorm() +
                                 (z - psd_new).squaredNorm());
    const double dua = cur_rho * std::sqrt((scatter_meas(r_new - r) +
                                            (psd_new - psd)).squaredNorm());
    r = r_new;
    psd = psd_new;
    sol.primal_residual = pri;
    sol.dual_residual = dua;
    if (pri <= opts.solver_tol && dua <= opts.solver_tol) {
      sol.converged = true;
      ++iter;
      break;
    }

    if ((iter + 1) % 25 == 0) {
      double scale = 1.0;
      if (pri > 10.0 * dua && cur_rho < 1e6)
        scale = 2.0;
      else if (dua > 10.0 * pri && cur_rho > 1e-4)
        scale = 0.5;
      if (scale != 1.0) {
        cur_rho *= scale;
        inv_rho = 1.0 / cur_rho;
        dual_r /= scale;  // keep the unscaled duals fixed
        dual_psd /= scale;
      }
    }
  }
  sol.iters_used = iter;

  z = 0.5 * (z + z.transpose());
  impose_block(z);
  sol.z = z;

  double obj = 0.0;
  for (const auto& meas : sdp.measurements)
    obj += std::abs(meas.a.dot(z) - meas.g);
  sol.objective = obj;
  if (lambda > 0.0) {
    // Report the regularizer including the constant anchor part, so the value
    // matches sum of squared-distance surrogates over unconnected pairs.
    double rv = reg.dot(z);
    for (int a = 0; a < p.topology.n_anchors(); ++a)
      for (int j = 0; j < n; ++j)
        if (!p.topology.has_as(a, j)) rv += p.anchors[a].squaredNorm();
    sol.regularizer_value = rv;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(z);
  sol.eigenvalues = eig.eigenvalues();
  const double lam_max = std::max(sol.eigenvalues.maxCoeff(), 0.0);
  sol.numeric_rank = 0;
  for (int i = 0; i < N; ++i)
    if (sol.eigenvalues[i] > opts.rank_tol * lam_max) sol.numeric_rank++;
  return sol;
}

Eigen::MatrixXd Extraction::lifted() const {
  const int d = static_cast<int>(x.rows());
  const int n = static_cast<int>(x.cols());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d + n, n);
  out.topRows(d) = x;
  if (!exact && x2.size() > 0) out.bottomRows(n) = x2;
  return out;
}

Extraction extract(const SdrSolution& sol, double rank_tol) {
  Extraction out;
  out.x = sol.x();
  const double lam_max = std::max(sol.eigenvalues.size() > 0
                                      ? sol.eigenvalues.maxCoeff()
                                      : 0.0,
                                  0.0);
  int rank = 0;
  for (int i = 0; i < sol.eigenvalues.size(); ++i)
    if (sol.eigenvalues[i] > rank_tol * lam_max) rank++;
  if (rank <= sol.d || sol.n == 0) {
    out.exact = true;
    return out;
  }
  // Factor the PSD residual Y - X^T X = X2^T X2, clamping the tiny negative
  // eigenvalues numerics can leave behind.
  const Eigen::MatrixXd residual =
      sol.y() - out.x.transpose() * out.x;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      0.5 * (residual + residual.transpose()));
  const Eigen::VectorXd lam = eig.eigenvalues().cwiseMax(0.0);
  out.x2 = lam.cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
  out.exact = false;
  return out;
}

PipelineResult sdr_gd_pipeline(const SnlProblem& p, const SdrOptions& sdr_opts,
                               const DescentOptions& descent_opts) {
  PipelineResult out;
  out.sdr = solve_sdr(p, sdr_opts);
  const Eigen::MatrixXd x = out.sdr.x();
  out.warm = SensorConfig(p.dim * out.sdr.n);
  for (int j = 0; j < out.sdr.n; ++j)
    out.warm.segment(p.dim * j, p.dim) = x.col(j);
  out.result = descend(p, LossSpec{2.0, 2.0, 0}, out.warm, descent_opts);
  return out;
}

std::string sdr_solution_to_json(const SdrSolution& sol) {
  nlohmann::ordered_json j;
  j["d"] = sol.d;
  j["n_sensors"] = sol.n;
  j["objective"] = sol.objective;
  j["regularizer_value"] = sol.regularizer_value;
  j["numeric_rank"] = sol.numeric_rank;
  j["iters_used"] = sol.iters_used;
  j["primal_residual"] = sol.primal_residual;
  j["dual_residual"] = sol.dual_residual;
  j["converged"] = sol.converged;
  nlohmann::ordered_json eigs = nlohmann::ordered_json::array();
  for (int i = 0; i < sol.eigenvalues.size(); ++i) eigs.push_back(sol.eigenvalues[i]);
  j["eigenvalues"] = eigs;
  nlohmann::ordered_json z = nlohmann::ordered_json::array();
  for (int r = 0; r < sol.z.rows(); ++r) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (int c = 0; c < sol.z.cols(); ++c) row.push_back(sol.z(r, c));
    z.push_back(row);
  }
  j["z"] = z;
  nlohmann::ordered_json x = nlohmann::ordered_json::array();
  const Eigen::MatrixXd xs = sol.x();
  for (int c = 0; c < xs.cols(); ++c) {
    nlohmann::ordered_json col = nlohmann::ordered_json::array();
    for (int r = 0; r < xs.rows(); ++r) col.push_back(xs(r, c));
    x.push_back(col);
  }
  j["x"] = x;
  return j.dump(2) + "\n";
}

}  // namespace snl
