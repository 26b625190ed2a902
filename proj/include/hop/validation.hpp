// Copyright 2026 the hop-predict authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "hop/regret_harness.hpp"

namespace hop {

// Analytical identities that must hold on simulated data. They cross-check
// the simulator, the model-based benchmark, and the learner against each
// other, so a sign or alignment slip in any of them shows up here.

/// Scalar random-walk plant with unit noise covariances; its steady-state
/// covariance has a simple closed form, which makes it the reference plant
/// for hand-checkable tests.
inline LtiSystem scalar_random_walk_plant() {
  Matrix one = Matrix::Ones(1, 1);
  return LtiSystem::create(one, one, one, one, one);
}

/// Max deviation (sup over bases and components) of the exact regression
/// decomposition of y_{k+H} into the weighted window, the truncation bias,
/// and the H-step innovation. Zero in exact arithmetic for every k >= p.
inline double regression_identity_residual(const LtiSystem& sys,
                                           const RiccatiSolution& sol,
                                           const Trajectory& traj,
                                           const FilterSeries& filter,
                                           const BenchmarkSeries& bench,
                                           int p) {
  const int H = bench.horizon;
  const Index K = traj.steps();
  const OptimalWeights weights = optimal_weights(sys, sol, p, H);
  const Matrix G = weights.stacked();

  std::vector<Vector> ys, us;
  for (Index k = 0; k <= K; ++k) ys.emplace_back(traj.outputs.col(k));
  for (Index k = 0; k < traj.inputs.cols(); ++k) us.emplace_back(traj.inputs.col(k));

  double worst = 0.0;
  for (Index k = p; k + H <= K; ++k) {
    const RegressorWindow window = build_window(ys, us, k, p, H);
    Vector resid = traj.outputs.col(k + H) - G * window.z -
                   bias_term(sys, sol, filter, k, p, H) -
                   bench.innovations.col(k);
    worst = std::max(worst, resid.cwiseAbs().maxCoeff());
  }
  return worst;
}

/// Relative Frobenius distance between the empirical covariance of the
/// H-step innovations and its closed form C P_H C' + R.
inline double covariance_relative_error(const LtiSystem& sys,
                                        const BenchmarkSeries& bench) {
  const Matrix& r = bench.innovations;
  const Index count = r.cols();
  require(count >= 2, "covariance_relative_error: too few samples");
  const Vector mean = r.rowwise().mean();
  const Matrix centered = r.colwise() - mean;
  const Matrix empirical =
      centered * centered.transpose() / static_cast<double>(count - 1);
  const Matrix expected =
      sys.C * bench.error_covariance * sys.C.transpose() + sys.R;
  return (empirical - expected).norm() / expected.norm();
}

/// Independent construction of the one-step weights
///   [C (A-LC)^{p-1} L, ..., C L]  and  [C (A-LC)^{p-1} B, ..., C B],
/// against which optimal_weights(.., H = 1) must match bitwise.
inline OptimalWeights one_step_weights_reference(const LtiSystem& sys,
                                                 const RiccatiSolution& sol,
                                                 int p) {
  const auto [n, m, n_u] = sys.dims;
  MatrixPowers Fpow(sys.A - sol.L * sys.C);
  OptimalWeights w;
  w.p = p;
  w.horizon = 1;
  w.output_weights.resize(m, p * m);
  w.input_weights.resize(m, p * n_u);
  for (int i = 1; i <= p; ++i) {
    w.output_weights.middleCols((i - 1) * m, m) = sys.C * Fpow(p - i) * sol.L;
    w.input_weights.middleCols((i - 1) * n_u, n_u) = sys.C * Fpow(p - i) * sys.B;
  }
  return w;
}

inline double h1_reduction_max_diff(const LtiSystem& sys,
                                    const RiccatiSolution& sol, int p) {
  const OptimalWeights general = optimal_weights(sys, sol, p, 1);
  const OptimalWeights reference = one_step_weights_reference(sys, sol, p);
  return std::max(
      (general.output_weights - reference.output_weights).cwiseAbs().maxCoeff(),
      (general.input_weights - reference.input_weights).cwiseAbs().maxCoeff());
}

/// Drive the rank-one recursion `steps` times from a batch-solved state and
/// compare against the closed form over the full sample set.
struct BatchRecursiveReport {
  double weights_rel_error;
  double gram_rel_error;
};

inline BatchRecursiveReport batch_recursive_discrepancy(
    const LtiSystem& sys, std::uint64_t seed, int p, int H, Index warm_samples,
    Index steps, double lambda) {
  const Index first = p - 1;
  const Index total = warm_samples + steps;
  const Index K = first + total - 1 + H;
  const Trajectory traj = simulate(sys, K, H, seed);

  std::vector<Vector> ys, us;
  for (Index k = 0; k <= K; ++k) ys.emplace_back(traj.outputs.col(k));
  for (Index k = 0; k < traj.inputs.cols(); ++k) us.emplace_back(traj.inputs.col(k));

  const auto [n, m, n_u] = sys.dims;
  std::vector<Sample> warm;
  for (Index t = first; t < first + warm_samples; ++t)
    warm.push_back(Sample{build_window(ys, us, t, p, H),
                          ys[static_cast<std::size_t>(t + H)]});
  LearnerState state = batch_solve(warm, lambda, p, H, m, n_u);
  for (Index t = first + warm_samples; t < first + total; ++t) {
    const RegressorWindow window = build_window(ys, us, t, p, H);
    recursive_step(state, ys[static_cast<std::size_t>(t + H)], t + H, window);
  }

  std::vector<Sample> all = std::move(warm);
  for (Index t = first + warm_samples; t < first + total; ++t)
    all.push_back(Sample{build_window(ys, us, t, p, H),
                         ys[static_cast<std::size_t>(t + H)]});
  const LearnerState reference = batch_solve(all, lambda, p, H, m, n_u);

  return BatchRecursiveReport{
      (state.weights - reference.weights).norm() / reference.weights.norm(),
      (state.gram - reference.gram).norm() / reference.gram.norm()};
}

// ---------------------------------------------------------------------------
// The identity suite behind `validate`
// ---------------------------------------------------------------------------

struct IdentityCheck {
  std::string name;
  double measured;
  double threshold;
  bool pass;
};

inline IdentityCheck make_check(std::string name, double measured,
                                double threshold) {
  return IdentityCheck{std::move(name), measured, threshold,
                       measured <= threshold};
}

/// All identity checks on one plant. `tag` prefixes the check names.
/// `batch_recursive_tol` is 1e-6 where double precision can express it; on
/// the marginally stable plant the Gram spectrum spans eleven decades, so the
/// two-route agreement is conditioning-limited at roughly eps * cond(V).
inline void append_identity_checks(std::vector<IdentityCheck>& checks,
                                   const LtiSystem& sys, const std::string& tag,
                                   int p, double batch_recursive_tol = 1e-6) {
  const RiccatiSolution sol = solve_dare(sys.A, sys.C, sys.Q, sys.R);
  const std::uint64_t seed = 20260810;

  {
    const Index K = 2000;
    const Trajectory traj = simulate(sys, K + 6, 6, seed);
    const FilterSeries filter = run_filter(sys, sol, traj);
    for (int H : {1, 2, 6}) {
      const BenchmarkSeries bench = h_step_benchmark(sys, sol, filter, traj, H);
      checks.push_back(make_check(
          tag + "_regression_identity_H" + std::to_string(H),
          regression_identity_residual(sys, sol, traj, filter, bench, p), 1e-6));
      checks.push_back(make_check(
          tag + "_innovation_decomposition_H" + std::to_string(H),
          innovation_decomposition_check(filter, bench, sys, sol),
          H == 1 ? 0.0 : 1e-8));
    }
  }
  {
    const Index K = 100000;
    const Trajectory traj = simulate(sys, K, 4, seed + 1);
    const FilterSeries filter = run_filter(sys, sol, traj);
    for (int H : {2, 4}) {
      const BenchmarkSeries bench = h_step_benchmark(sys, sol, filter, traj, H);
      checks.push_back(make_check(
          tag + "_innovation_covariance_H" + std::to_string(H),
          covariance_relative_error(sys, bench), 0.10));
    }
  }
  {
    const BatchRecursiveReport report =
        batch_recursive_discrepancy(sys, seed + 2, p, 2, 200, 1000, 1.0);
    checks.push_back(make_check(tag + "_batch_vs_recursive_weights",
                                report.weights_rel_error, batch_recursive_tol));
    checks.push_back(make_check(tag + "_batch_vs_recursive_gram",
                                report.gram_rel_error, batch_recursive_tol));
  }
  checks.push_back(
      make_check(tag + "_one_step_reduction", h1_reduction_max_diff(sys, sol, p), 0.0));
}

inline std::vector<IdentityCheck> run_identity_suite(bool fast) {
  std::vector<IdentityCheck> checks;
  append_identity_checks(checks, scalar_random_walk_plant(), "scalar", 8);
  if (!fast) {
    append_identity_checks(checks, marginally_stable_plant(), "marginal", 12,
                           /*batch_recursive_tol=*/1e-4);
    append_identity_checks(checks, open_loop_stable_plant(), "stable", 12);
  }
  return checks;
}

}  // namespace hop
