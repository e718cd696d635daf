#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "snl/loss.hpp"

namespace snl {

enum class StepRule {
  Backtracking,  // Armijo line search; sound for smooth losses (b = c = 2)
  Diminishing,   // eta / sqrt(k); the subgradient default for c = 1
  Constant,      // fixed eta
  Polyak,        // (loss - target) / ||g||^2; for known optimal value (0 on
                 // noiseless instances); linear convergence on sharp losses
};

struct DescentOptions {
  int max_iters = 5000;
  StepRule step_rule = StepRule::Backtracking;
  double eta = 1.0;            // constant / diminishing step scale
  double armijo_alpha = 0.3;
  double armijo_beta = 0.5;
  double polyak_target = 0.0;
  double grad_tol = 1e-8;
  double loss_tol = 1e-12;
  bool keep_trace = false;
  std::uint64_t seed = 0;  // used by multistart for random starts
};

struct DescentResult {
  SensorConfig x_final;
  double loss_final = 0.0;  // always re-evaluated at x_final on return
  int iters_used = 0;
  std::vector<std::pair<int, double>> trace;  // (iter, loss) when requested
  bool converged = false;  // grad_tol or loss_tol met
  bool diverged = false;   // non-finite loss or gradient encountered
};

/// Gradient / subgradient descent from x0. With backtracking the trace is
/// non-increasing; all rules return the best point seen, so loss_final never
/// exceeds the starting loss.
DescentResult descend(const SnlProblem& p, const LossSpec& spec,
                      const SensorConfig& x0, const DescentOptions& opts);

/// Independent descents from uniform random starts in start_box (a rectangle
/// in config space, dimension D * n). Results come back in start order.
std::vector<DescentResult> multistart(const SnlProblem& p, const LossSpec& spec,
                                      int n_starts, const Rect& start_box,
                                      const DescentOptions& opts,
                                      std::uint64_t seed);

struct MinimumCluster {
  SensorConfig representative;  // lowest-loss member
  double loss = 0.0;
  int hits = 0;
};

/// Merges converged endpoints lying within pos_tol (Euclidean, config space);
/// losses are compared at loss_tol granularity. Clusters are sorted by loss.
std::vector<MinimumCluster> cluster_minima(
    const std::vector<DescentResult>& results, double pos_tol = 0.05,
    double loss_tol = 1e-6);

std::string trace_to_csv(const DescentResult& r);

}  // namespace snl
