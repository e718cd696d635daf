#include "snl/descent.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace snl {

DescentResult descend(const SnlProblem& p, const LossSpec& spec,
                      const SensorConfig& x0, const DescentOptions& opts) {
  if (opts.max_iters < 1) throw std::invalid_argument("descend: max_iters >= 1");
  if (!(opts.grad_tol > 0) || !(opts.loss_tol > 0) || !(opts.eta > 0))
    throw std::invalid_argument("descend: tolerances and eta must be positive");

  DescentResult res;
  SensorConfig x = x0;
  double f = loss_eval(p, spec, x);
  SensorConfig best_x = x;
  double best_f = f;
  double t_prev = 1.0;

  auto record = [&](int iter, double value) {
    if (opts.keep_trace) res.trace.emplace_back(iter, value);
  };
  record(0, f);

  int iter = 0;
  for (; iter < opts.max_iters; ++iter) {
    if (!std::isfinite(f)) {
      res.diverged = true;
      break;
    }
    if (f <= opts.loss_tol) {
      res.converged = true;
      break;
    }
    SensorConfig g = loss_grad(p, spec, x);
    const double gnorm = g.norm();
    if (!std::isfinite(gnorm)) {
      res.diverged = true;
      break;
    }
    if (gnorm <= opts.grad_tol) {
      res.converged = true;
      break;
    }

    double t = 0.0;
    bool stalled = false;
    switch (opts.step_rule) {
      case StepRule::Backtracking: {
        t = std::min(1.0, 2.0 * t_prev);
        const double slope = opts.armijo_alpha * gnorm * gnorm;
        bool ok = false;
        for (int bt = 0; bt < 80; ++bt) {
          const double f_new = loss_eval(p, spec, x - t * g);
          if (std::isfinite(f_new) && f_new <= f - t * slope) {
            ok = true;
            break;
          }
          t *= opts.armijo_beta;
        }
        // No Armijo progress at any representable step size: stop here.
        stalled = !ok;
        t_prev = t;
        break;
      }
      case StepRule::Diminishing:
        t = opts.eta / std::sqrt(static_cast<double>(iter + 1));
        break;
      case StepRule::Constant:
        t = opts.eta;
        break;
      case StepRule::Polyak:
        t = (f - opts.polyak_target) / (gnorm * gnorm);
        if (!(t > 0)) t = opts.grad_tol;
        break;
    }
    if (stalled) break;

    x -= t * g;
    f = loss_eval(p, spec, x);
    if (std::isfinite(f) && f < best_f) {
      best_f = f;
      best_x = x;
    }
    record(iter + 1, f);
  }
  res.iters_used = iter;
  // Backtracking is monotone, so x is the best point; the other rules may
  // wander, so return the best point seen.
  if (opts.step_rule != StepRule::Backtracking || res.diverged) {
    x = best_x;
  }
  res.x_final = x;
  res.loss_final = loss_eval(p, spec, res.x_final);
  if (!res.diverged && !res.converged) {
    // Re-check the exit tolerances at the returned point.
    if (res.loss_final <= opts.loss_tol) res.converged = true;
  }
  return res;
}

std::vector<DescentResult> multistart(const SnlProblem& p, const LossSpec& spec,
                                      int n_starts, const Rect& start_box,
                                      const DescentOptions& opts,
                                      std::uint64_t seed) {
  if (n_starts < 1) throw std::invalid_argument("multistart: n_starts >= 1");
  start_box.validate();
  const Eigen::Index want =
      static_cast<Eigen::Index>(p.topology.n_sensors()) * spec.resolved_dim(p);
  if (start_box.dim() != want)
    throw std::invalid_argument("multistart: start_box must be in config space");

  // All starts are drawn up front from one stream, so the trial list is a
  // deterministic function of (seed, n_starts) no matter how trials run.
  Rng rng(seed);
  std::vector<SensorConfig> starts;
  starts.reserve(n_starts);
  for (int s = 0; s < n_starts; ++s) starts.push_back(start_box.sample(rng));

  std::vector<DescentResult> results(n_starts);
  for (int s = 0; s < n_starts; ++s) results[s] = descend(p, spec, starts[s], opts);
  return results;
}

std::vector<MinimumCluster> cluster_minima(
    const std::vector<DescentResult>& results, double pos_tol,
    double loss_tol) {
  std::vector<MinimumCluster> clusters;
  for (const auto& r : results) {
    if (r.diverged) continue;
    MinimumCluster* found = nullptr;
    double best_d = pos_tol;
    for (auto& c : clusters) {
      const double d = (r.x_final - c.representative).norm();
      if (d <= best_d) {
        best_d = d;
        found = &c;
      }
    }
    if (found) {
      found->hits++;
      if (r.loss_final < found->loss) {
        found->loss = r.loss_final;
        found->representative = r.x_final;
      }
    } else {
      clusters.push_back({r.x_final, r.loss_final, 1});
    }
  }
  std::sort(clusters.begin(), clusters.end(),
            [loss_tol](const MinimumCluster& a, const MinimumCluster& b) {
              if (std::abs(a.loss - b.loss) > loss_tol) return a.loss < b.loss;
              return a.hits > b.hits;
            });
  return clusters;
}

std::string trace_to_csv(const DescentResult& r) {
  std::string out = "iter,loss\n";
  char buf[64];
  for (const auto& [iter, loss] : r.trace) {
    std::snprintf(buf, sizeof buf, "%d,%.17g\n", iter, loss);
    out += buf;
  }
  return out;
}

}  // namespace snl
