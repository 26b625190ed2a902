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

#include <catch2/catch_amalgamated.hpp>

#include "hop/validation.hpp"

using namespace hop;
using Catch::Matchers::WithinAbs;

namespace {

constexpr double kGoldenP = 1.6180339887498949;   // (1+sqrt 5)/2
constexpr double kGoldenL = 0.6180339887498949;   // 1/P

LtiSystem scalar_drift_free() {
  // a = 1, b = 0, c = 1 with unit noise covariances
  Matrix one = Matrix::Ones(1, 1);
  return LtiSystem::create(one, Matrix::Zero(1, 1), one, one, one);
}

double sample_autocorrelation(const Matrix& e, int lag) {
  const Index K = e.cols();
  double num = 0.0, den = 0.0;
  for (Index k = 0; k + lag < K; ++k) num += e(0, k) * e(0, k + lag);
  for (Index k = 0; k < K; ++k) den += e(0, k) * e(0, k);
  return num / den;
}

}  // namespace

TEST_CASE("filter stays at zero on a noiseless zero orbit", "[kalman_bench]") {
  const LtiSystem quiet = scalar_drift_free();
  LtiSystem noiseless = quiet;
  noiseless.Q = Matrix::Zero(1, 1);
  noiseless.R = Matrix::Zero(1, 1);
  const RiccatiSolution sol = solve_dare(quiet.A, quiet.C, quiet.Q, quiet.R);
  const Trajectory traj = simulate(noiseless, 200, 1, 5);
  const FilterSeries series = run_filter(noiseless, sol, traj);
  CHECK(series.estimates.cwiseAbs().maxCoeff() == 0.0);
  CHECK(series.innovations.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("steady-state innovation variance matches the closed form", "[kalman_bench]") {
  const LtiSystem sys = scalar_random_walk_plant();
  const RiccatiSolution sol = solve_dare(sys.A, sys.C, sys.Q, sys.R);
  const Trajectory traj = simulate(sys, 100000, 1, 17);
  const FilterSeries series = run_filter(sys, sol, traj);
  const double var =
      series.innovations.row(0).squaredNorm() / double(series.innovations.cols());
  CHECK_THAT(var, WithinAbs(kGoldenP + 1.0, 0.05 * (kGoldenP + 1.0)));
}

TEST_CASE("innovations are empirically white", "[kalman_bench]") {
  const LtiSystem sys = marginally_stable_plant();
  const RiccatiSolution sol = solve_dare(sys.A, sys.C, sys.Q, sys.R);
  const Index K = 100000;
  const Trajectory traj = simulate(sys, K, 1, 23);
  const FilterSeries series = run_filter(sys, sol, traj);
  // skip the short transient while the filter settles to steady state
  const Matrix tail = series.innovations.rightCols(K - 200);
  for (int lag = 1; lag <= 5; ++lag)
    CHECK(std::abs(sample_autocorrelation(tail, lag)) <=
          4.0 / std::sqrt(double(K)));
}

TEST_CASE("one-step benchmark is the filter prediction, bit for bit", "[kalman_bench]") {
  const LtiSystem sys = marginally_stable_plant();
  const RiccatiSolution sol = solve_dare(sys.A, sys.C, sys.Q, sys.R);
  const Trajectory traj = simulate(sys, 500, 1, 3);
  const FilterSeries filter = run_filter(sys, sol, traj);
  const BenchmarkSeries bench = h_step_benchmark(sys, sol, filter, traj, 1);
  for (Index k = 0; k < bench.bases(); ++k)
    CHECK(bench.predictions(0, k) == filter.predictions(0, k + 1));
}

TEST_CASE("two-step benchmark of an input-free random walk is the estimate itself",
          "[kalman_bench]") {
  const LtiSystem sys = scalar_drift_free();
  const RiccatiSolution sol = solve_dare(sys.A, sys.C, sys.Q, sys.R);
  const Trajectory traj = simulate(sys, 300, 2, 11);
  const FilterSeries filter = run_filter(sys, sol, traj);
  const BenchmarkSeries bench = h_step_benchmark(sys, sol, filter, traj, 2);
  for (Index k = 0; k < bench.bases(); ++k)
    CHECK(bench.predictions(0, k) == filter.estimates(0, k + 1));
}

TEST_CASE("H-step error covariance has its closed form", "[kalman_bench]") {
  // scalar with a = 1: P_H = P + (H-1) q
  const LtiSystem scalar = scalar_random_walk_plant();
  const RiccatiSolution sol = solve_dare(scalar.A, scalar.C, scalar.Q, scalar.R);
  for (int H : {1, 2, 3, 7}) {
    const Matrix PH = h_step_error_covariance(scalar, sol.P, H);
    CHECK_THAT(PH(0, 0), WithinAbs(sol.P(0, 0) + (H - 1), 1e-12));
  }

  // independent direct summation on the chain plant
  const LtiSystem sys = marginally_stable_plant();
  const RiccatiSolution msol = solve_dare(sys.A, sys.C, sys.Q, sys.R);
  const int H = 4;
  Matrix expected = Matrix::Zero(3, 3);
  Matrix power = Matrix::Identity(3, 3);
  for (int i = 1; i <= H - 1; ++i) {
    expected += power * sys.Q * power.transpose();
    power = sys.A * power;
  }
  expected += power * msol.P * power.transpose();
  CHECK((h_step_error_covariance(sys, msol.P, H) - expected).norm() <= 1e-12);
}

TEST_CASE("H-step innovation covariance approaches C P_H C' + R", "[kalman_bench]") {
  const Index K = 100000;
  for (int H : {2, 4}) {
    const LtiSystem scalar = scalar_random_walk_plant();
    const RiccatiSolution ssol = solve_dare(scalar.A, scalar.C, scalar.Q, scalar.R);
    const Trajectory straj = simulate(scalar, K, H, 29);
    const BenchmarkSeries sbench =
        h_step_benchmark(scalar, ssol, run_filter(scalar, ssol, straj), straj, H);
    CHECK(covariance_relative_error(scalar, sbench) <= 0.10);
  }
  const LtiSystem sys = marginally_stable_plant();
  const RiccatiSolution sol = solve_dare(sys.A, sys.C, sys.Q, sys.R);
  const Trajectory traj = simulate(sys, K, 4, 31);
  const BenchmarkSeries bench =
      h_step_benchmark(sys, sol, run_filter(sys, sol, traj), traj, 4);
  CHECK(covariance_relative_error(sys, bench) <= 0.10);
}

TEST_CASE("H-step innovations decompose into one-step innovations", "[kalman_bench]") {
  const LtiSystem sys = marginally_stable_plant();
  const RiccatiSolution sol = solve_dare(sys.A, sys.C, sys.Q, sys.R);
  const Trajectory traj = simulate(sys, 2000, 6, 37);
  const FilterSeries filter = run_filter(sys, sol, traj);

  const BenchmarkSeries h1 = h_step_benchmark(sys, sol, filter, traj, 1);
  CHECK(innovation_decomposition_check(filter, h1, sys, sol) == 0.0);

  const BenchmarkSeries h6 = h_step_benchmark(sys, sol, filter, traj, 6);
  CHECK(innovation_decomposition_check(filter, h6, sys, sol) <= 1e-8);

  const LtiSystem scalar = scalar_random_walk_plant();
  const RiccatiSolution ssol = solve_dare(scalar.A, scalar.C, scalar.Q, scalar.R);
  const Trajectory straj = simulate(scalar, 2000, 3, 41);
  const FilterSeries sfilter = run_filter(scalar, ssol, straj);
  const BenchmarkSeries sbench = h_step_benchmark(scalar, ssol, sfilter, straj, 3);
  CHECK(innovation_decomposition_check(sfilter, sbench, scalar, ssol) <= 1e-10);
}

TEST_CASE("a sign slip in the decomposition is caught", "[kalman_bench]") {
  // same sum with the wrong sign: the residual must blow past the gate
  const LtiSystem sys = marginally_stable_plant();
  const RiccatiSolution sol = solve_dare(sys.A, sys.C, sys.Q, sys.R);
  const Trajectory traj = simulate(sys, 2000, 6, 37);
  const FilterSeries filter = run_filter(sys, sol, traj);
  const BenchmarkSeries bench = h_step_benchmark(sys, sol, filter, traj, 6);

  MatrixPowers Apow(sys.A);
  double worst = 0.0;
  for (Index k = 0; k < bench.bases(); ++k) {
    Vector resid = bench.innovations.col(k) - filter.innovations.col(k + 6);
    for (int i = 1; i <= 5; ++i)
      resid += sys.C * Apow(i - 1) * sol.L * filter.innovations.col(k + 6 - i);
    worst = std::max(worst, resid.cwiseAbs().maxCoeff());
  }
  CHECK(worst > 1e-3);
}

TEST_CASE("decomposition rejects misaligned series", "[kalman_bench]") {
  const LtiSystem sys = marginally_stable_plant();
  const RiccatiSolution sol = solve_dare(sys.A, sys.C, sys.Q, sys.R);
  const Trajectory traj = simulate(sys, 300, 2, 2);
  const FilterSeries filter = run_filter(sys, sol, traj);
  BenchmarkSeries bench = h_step_benchmark(sys, sol, filter, traj, 2);
  bench.horizon = 3;  // now claims an H inconsistent with its width
  CHECK_THROWS_AS(innovation_decomposition_check(filter, bench, sys, sol),
                  std::invalid_argument);
}

TEST_CASE("exact one-step weights on the scalar reference plant", "[kalman_bench]") {
  const LtiSystem sys = scalar_random_walk_plant();
  const RiccatiSolution sol = solve_dare(sys.A, sys.C, sys.Q, sys.R);
  const OptimalWeights w = optimal_weights(sys, sol, 2, 1);
  CHECK_THAT(w.output_weights(0, 0), WithinAbs((1.0 - kGoldenL) * kGoldenL, 1e-9));
  CHECK_THAT(w.output_weights(0, 1), WithinAbs(kGoldenL, 1e-9));
  CHECK_THAT(w.output_weights(0, 0), WithinAbs(0.2360680, 1e-7));
  CHECK_THAT(w.output_weights(0, 1), WithinAbs(0.6180340, 1e-7));

  const OptimalWeights single = optimal_weights(sys, sol, 1, 1);
  CHECK(single.output_weights == sys.C * sol.L);
  CHECK(single.input_weights == sys.C * sys.B);
}

TEST_CASE("one-step reduction is bitwise", "[kalman_bench]") {
  for (const LtiSystem& sys :
       {scalar_random_walk_plant(), marginally_stable_plant(), open_loop_stable_plant()}) {
    const RiccatiSolution sol = solve_dare(sys.A, sys.C, sys.Q, sys.R);
    CHECK(h1_reduction_max_diff(sys, sol, 12) == 0.0);
  }
}

TEST_CASE("regression identity holds on simulated data", "[kalman_bench]") {
  // the module's master test
  const LtiSystem sys = marginally_stable_plant();
  const RiccatiSolution sol = solve_dare(sys.A, sys.C, sys.Q, sys.R);
  const Trajectory traj = simulate(sys, 2000 + 6, 6, 43);
  const FilterSeries filter = run_filter(sys, sol, traj);
  for (int H : {1, 2, 6}) {
    const BenchmarkSeries bench = h_step_benchmark(sys, sol, filter, traj, H);
    CHECK(regression_identity_residual(sys, sol, traj, filter, bench, 12) <= 1e-6);
  }
}

TEST_CASE("bias term decays geometrically in p", "[kalman_bench]") {
  const LtiSystem sys = scalar_random_walk_plant();
  const RiccatiSolution sol = solve_dare(sys.A, sys.C, sys.Q, sys.R);
  const Trajectory traj = simulate(sys, 200, 1, 47);
  const FilterSeries filter = run_filter(sys, sol, traj);

  const double rho = 1.0 - kGoldenL;  // 0.3819660...
  const Index k = 60;
  const double xhat = std::abs(filter.estimates(0, k - 10 + 1));
  const double b10 = bias_term(sys, sol, filter, k, 10, 1).cwiseAbs()(0);
  CHECK_THAT(b10 / xhat, WithinAbs(std::pow(rho, 10), 1e-12));
  CHECK_THAT(b10 / xhat, WithinAbs(6.6107e-5, 1e-8));

  // rho^p <= 1e-12 for p = 29; the bias is then noise-level relative to x-hat
  const double x29 = std::abs(filter.estimates(0, k - 29 + 1));
  const double b29 = bias_term(sys, sol, filter, k, 29, 1).cwiseAbs()(0);
  CHECK(b29 <= 1e-10 * std::max(1.0, x29));

  CHECK_THROWS_AS(bias_term(sys, sol, filter, 5, 10, 1), std::invalid_argument);
}

TEST_CASE("bias stays within its operator-norm envelope along a run", "[kalman_bench]") {
  // The raw bias grows with the state on the marginally stable plant (the
  // state itself grows ~k^1.5); the bounded quantity is the ratio to the
  // estimate that drives it.
  const LtiSystem sys = marginally_stable_plant();
  const RiccatiSolution sol = solve_dare(sys.A, sys.C, sys.Q, sys.R);
  const int p = 12, H = 2;
  const Trajectory traj = simulate(sys, 3200 + H, H, 53);
  const FilterSeries filter = run_filter(sys, sol, traj);

  MatrixPowers Apow(sys.A);
  MatrixPowers Fpow(sys.A - sol.L * sys.C);
  const double envelope = (sys.C * Apow(H - 1) * Fpow(p)).norm() + 1e-12;
  for (Index k = p; k + H <= traj.steps(); k += 7) {
    const double b = bias_term(sys, sol, filter, k, p, H).norm();
    const double x = filter.estimates.col(k - p + 1).norm();
    CHECK(b <= envelope * std::max(1.0, x));
  }
}

TEST_CASE("benchmark beats every alternative predictor of the same information",
          "[kalman_bench]") {
  const LtiSystem sys = marginally_stable_plant();
  const RunParams params{2, 2.0, 1.0, 400, 3};
  const int n_seeds = 50;
  int bench_beats_online = 0, bench_beats_last = 0, bench_beats_zero = 0;
  for (int seed = 1; seed <= n_seeds; ++seed) {
    const PairedRun run = paired_run(sys, params, seed, /*keep_detail=*/true);
    // converged regime: the second half of the evaluation range
    const Index total = run.series.bases();
    const Index from = total / 2;
    double mse_online = 0, mse_bench = 0, mse_last = 0, mse_zero = 0;
    for (Index i = from; i < total; ++i) {
      const Index base = run.series.first_base + i;
      const Vector& y = run.trajectory->outputs.col(base + params.H);
      mse_online += run.series.loss_online[static_cast<std::size_t>(i)];
      mse_bench += run.series.loss_benchmark[static_cast<std::size_t>(i)];
      mse_last += (y - run.trajectory->outputs.col(base)).squaredNorm();
      mse_zero += y.squaredNorm();
    }
    bench_beats_online += mse_bench <= mse_online;
    bench_beats_last += mse_bench <= mse_last;
    bench_beats_zero += mse_bench <= mse_zero;
  }
  CHECK(bench_beats_online > n_seeds / 2);
  CHECK(bench_beats_last == n_seeds);
  CHECK(bench_beats_zero == n_seeds);
}

TEST_CASE("benchmark input validation", "[kalman_bench]") {
  const LtiSystem sys = marginally_stable_plant();
  const RiccatiSolution sol = solve_dare(sys.A, sys.C, sys.Q, sys.R);
  const Trajectory traj = simulate(sys, 4, 2, 1);
  const FilterSeries filter = run_filter(sys, sol, traj);
  CHECK_THROWS_AS(h_step_benchmark(sys, sol, filter, traj, 9), std::invalid_argument);
  CHECK_THROWS_AS(h_step_benchmark(sys, sol, filter, traj, 0), std::invalid_argument);
}
