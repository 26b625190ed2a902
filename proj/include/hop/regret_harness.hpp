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

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <cstring>
#include <optional>
#include <thread>

#include "hop/hop_learner.hpp"
#include "hop/kalman_bench.hpp"

namespace hop {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// One experiment cell: which plant, which horizon, which learner settings,
/// which seeds. `horizons`/`systems` extend a single cell to a sweep grid.
struct ExperimentConfig {
  std::string system = "marginally_stable";  // marginally_stable | stable | custom
  std::vector<std::string> systems;          // sweep grid; defaults to {system}
  int H = 2;
  std::vector<int> horizons;                 // sweep grid; defaults to {H}
  double beta = 2.0;
  double lambda = 1.0;
  Index T_init = 400;
  int N_E = 3;
  std::vector<std::uint64_t> seeds = {1};
  int kappa = -1;      // largest unit-eigenvalue Jordan block; <0 = estimate
  bool trace = false;  // emit per-step prediction trace from the first seed

  // custom plant matrices (only consulted when system == "custom")
  Matrix A, B, C, Q, R;

  bool operator==(const ExperimentConfig& o) const {
    auto eq = [](const Matrix& a, const Matrix& b) {
      return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
    };
    return system == o.system && systems == o.systems && H == o.H &&
           horizons == o.horizons && beta == o.beta && lambda == o.lambda &&
           T_init == o.T_init && N_E == o.N_E && seeds == o.seeds &&
           kappa == o.kappa && trace == o.trace && eq(A, o.A) && eq(B, o.B) &&
           eq(C, o.C) && eq(Q, o.Q) && eq(R, o.R);
  }

  std::vector<std::string> system_grid() const {
    return systems.empty() ? std::vector<std::string>{system} : systems;
  }
  std::vector<int> horizon_grid() const {
    return horizons.empty() ? std::vector<int>{H} : horizons;
  }
};

inline LtiSystem resolve_system(const ExperimentConfig& cfg,
                                const std::string& name) {
  if (name == "marginally_stable") return marginally_stable_plant();
  if (name == "stable") return open_loop_stable_plant();
  if (name == "custom") {
    require(cfg.A.size() > 0, "custom system requires matrices A, B, C, Q, R");
    return LtiSystem::create(cfg.A, cfg.B, cfg.C, cfg.Q, cfg.R);
  }
  throw std::invalid_argument("unknown system selector: " + name);
}

inline LtiSystem resolve_system(const ExperimentConfig& cfg) {
  return resolve_system(cfg, cfg.system);
}

// ---------------------------------------------------------------------------
// Regret accounting
// ---------------------------------------------------------------------------

/// Per-step squared losses of the online and model-based predictors on one
/// shared realization, plus the running difference
///   R_k = sum_{t=T_init}^{k} (online loss - benchmark loss).
struct RegretSeries {
  Index first_base = 0;  // == T_init
  std::vector<double> loss_online;
  std::vector<double> loss_benchmark;
  std::vector<double> cumulative;
  std::vector<std::pair<Index, double>> checkpoints;  // (N, regret after N steps)

  Index bases() const { return static_cast<Index>(cumulative.size()); }
  double final_regret() const {
    return cumulative.empty() ? 0.0 : cumulative.back();
  }
  /// R_k for base time k.
  double at(Index k) const {
    require(k >= first_base && k < first_base + bases(), "RegretSeries::at: out of range");
    return cumulative[static_cast<std::size_t>(k - first_base)];
  }
};

inline RegretSeries accumulate_regret(Index first_base,
                                      std::vector<double> loss_online,
                                      std::vector<double> loss_benchmark,
                                      Index T_init, int N_E) {
  require(loss_online.size() == loss_benchmark.size(),
          "accumulate_regret: loss series differ in length");
  RegretSeries series;
  series.first_base = first_base;
  series.loss_online = std::move(loss_online);
  series.loss_benchmark = std::move(loss_benchmark);
  series.cumulative.resize(series.loss_online.size());
  double running = 0.0;
  for (std::size_t i = 0; i < series.cumulative.size(); ++i) {
    running += series.loss_online[i] - series.loss_benchmark[i];
    series.cumulative[i] = running;
  }
  // Dyadic checkpoints: regret accrued over the first T_init*2^j steps.
  for (int j = 1; j <= N_E; ++j) {
    const Index N = T_init << j;
    const Index last = N - 1;
    if (last >= first_base && last < first_base + series.bases())
      series.checkpoints.emplace_back(N, series.at(last));
  }
  return series;
}

// ---------------------------------------------------------------------------
// Paired runs
// ---------------------------------------------------------------------------

struct RunParams {
  int H = 2;
  double beta = 2.0;
  double lambda = 1.0;
  Index T_init = 400;
  int N_E = 3;

  EpochSchedule schedule() const {
    return EpochSchedule{T_init, N_E, beta, H};
  }
};

inline RunParams run_params(const ExperimentConfig& cfg, int H) {
  return RunParams{H, cfg.beta, cfg.lambda, cfg.T_init, cfg.N_E};
}

inline std::uint64_t fnv1a_accumulate(std::uint64_t hash, double value) {
  std::uint64_t bits;
  static_assert(sizeof(bits) == sizeof(value));
  std::memcpy(&bits, &value, sizeof(bits));
  for (int b = 0; b < 8; ++b) {
    hash ^= (bits >> (8 * b)) & 0xFFull;
    hash *= 0x100000001B3ull;
  }
  return hash;
}

inline std::uint64_t hash_columns(const Matrix& data, Index first, Index last) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (Index k = first; k <= last; ++k)
    for (Index i = 0; i < data.rows(); ++i) h = fnv1a_accumulate(h, data(i, k));
  return h;
}

struct PairedRun {
  RegretSeries series;
  // Populated only when keep_detail is requested (trace emission, tests).
  std::optional<HopResult> online;
  std::optional<BenchmarkSeries> benchmark;
  std::optional<Trajectory> trajectory;
};

/// Simulate one seeded trajectory and evaluate the model-free learner and the
/// model-based H-step predictor on the identical realization. The online side
/// consumes the data through a hashing adapter, and the hash is checked
/// against the arrays handed to the benchmark — the pairing is structural,
/// not assumed.
inline PairedRun paired_run(const LtiSystem& sys, const RunParams& params,
                            std::uint64_t seed, bool keep_detail = false) {
  const EpochSchedule schedule = params.schedule();
  const Index N = schedule.total_steps();
  const int H = params.H;
  const Index K = N + H - 1;

  Trajectory traj = simulate(sys, K, H, seed);
  const RiccatiSolution sol = solve_dare(sys.A, sys.C, sys.Q, sys.R);
  const FilterSeries filter = run_filter(sys, sol, traj);
  const BenchmarkSeries bench = h_step_benchmark(sys, sol, filter, traj, H);

  // Hash-as-delivered adapter around the trajectory.
  std::uint64_t seen_y = 0xCBF29CE484222325ull;
  std::uint64_t seen_u = 0xCBF29CE484222325ull;
  Index max_y = -1, max_u = -1;
  SampleSource src;
  src.last_output = traj.steps();
  src.output_at = [&](Index k) {
    require(k == max_y + 1, "paired_run: outputs pulled out of order");
    max_y = k;
    for (Index i = 0; i < traj.outputs.rows(); ++i)
      seen_y = fnv1a_accumulate(seen_y, traj.outputs(i, k));
    return Vector(traj.outputs.col(k));
  };
  src.input_at = [&](Index k) {
    require(k == max_u + 1, "paired_run: inputs pulled out of order");
    max_u = k;
    for (Index i = 0; i < traj.inputs.rows(); ++i)
      seen_u = fnv1a_accumulate(seen_u, traj.inputs(i, k));
    return Vector(traj.inputs.col(k));
  };

  HopResult online = run_hop(src, schedule, params.lambda);

  if (seen_y != hash_columns(traj.outputs, 0, max_y) ||
      seen_u != hash_columns(traj.inputs, 0, max_u))
    throw std::logic_error("paired_run: online/benchmark data checksum mismatch");

  std::vector<double> lo, lb;
  lo.reserve(online.predictions.size());
  lb.reserve(online.predictions.size());
  Index expected_base = params.T_init;
  for (const PredictionRecord& rec : online.predictions) {
    require(rec.base_time == expected_base++,
            "paired_run: prediction bases are not contiguous");
    const Vector err_online = traj.outputs.col(rec.target_time) - rec.value;
    const Vector err_bench = traj.outputs.col(rec.target_time) -
                             bench.predictions.col(rec.base_time);
    lo.push_back(err_online.squaredNorm());
    lb.push_back(err_bench.squaredNorm());
  }

  PairedRun run;
  run.series = accumulate_regret(params.T_init, std::move(lo), std::move(lb),
                                 params.T_init, params.N_E);
  if (keep_detail) {
    run.online = std::move(online);
    run.benchmark = bench;
    run.trajectory = std::move(traj);
  }
  return run;
}

// ---------------------------------------------------------------------------
// Seed sweeps
// ---------------------------------------------------------------------------

/// Worker-pool size: HOP_THREADS caps it when set, hardware otherwise.
inline int worker_pool_size(std::size_t jobs) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("HOP_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1 && static_cast<unsigned>(cap) < hw)
      hw = static_cast<unsigned>(cap);
  }
  return static_cast<int>(std::min<std::size_t>(hw, std::max<std::size_t>(jobs, 1)));
}

/// Linear-interpolation quantile of an unsorted sample.
inline double quantile(std::vector<double> values, double q) {
  require(!values.empty(), "quantile: empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

struct CheckpointStat {
  Index N;
  double median;
  double q25;
  double q75;
};

/// Pointwise median / interquartile aggregation of paired runs over seeds.
/// Runs execute on a bounded pool; aggregation is a pure function of the
/// seed list, so the output is independent of scheduling.
struct SweepResult {
  Index first_base = 0;
  std::vector<RegretSeries> per_seed;  // ordered as the seed list
  std::vector<double> median_loss_online;
  std::vector<double> median_loss_benchmark;
  std::vector<double> median_cumulative;
  std::vector<double> q25_cumulative;
  std::vector<double> q75_cumulative;
  std::vector<CheckpointStat> checkpoints;

  double median_final() const {
    return median_cumulative.empty() ? 0.0 : median_cumulative.back();
  }
};

inline SweepResult seed_sweep(const LtiSystem& sys, const RunParams& params,
                              const std::vector<std::uint64_t>& seeds) {
  require(!seeds.empty(), "seed_sweep: at least one seed required");
  std::vector<RegretSeries> runs(seeds.size());
  std::vector<std::exception_ptr> failures(seeds.size());

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= seeds.size()) return;
      try {
        runs[i] = paired_run(sys, params, seeds[i]).series;
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const int pool = worker_pool_size(seeds.size());
  if (pool <= 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    for (int t = 0; t < pool; ++t) threads.emplace_back(work);
    for (auto& t : threads) t.join();
  }
  for (const auto& failure : failures)
    if (failure) std::rethrow_exception(failure);

  SweepResult sweep;
  sweep.first_base = runs.front().first_base;
  const Index bases = runs.front().bases();
  for (const RegretSeries& r : runs)
    require(r.bases() == bases && r.first_base == sweep.first_base,
            "seed_sweep: runs disagree on the evaluation range");

  sweep.median_loss_online.resize(bases);
  sweep.median_loss_benchmark.resize(bases);
  sweep.median_cumulative.resize(bases);
  sweep.q25_cumulative.resize(bases);
  sweep.q75_cumulative.resize(bases);
  std::vector<double> column(seeds.size());
  for (Index i = 0; i < bases; ++i) {
    auto gather = [&](auto proj) {
      for (std::size_t s = 0; s < runs.size(); ++s)
        column[s] = proj(runs[s], static_cast<std::size_t>(i));
      return column;
    };
    sweep.median_loss_online[i] = quantile(
        gather([](const RegretSeries& r, std::size_t j) { return r.loss_online[j]; }), 0.5);
    sweep.median_loss_benchmark[i] = quantile(
        gather([](const RegretSeries& r, std::size_t j) { return r.loss_benchmark[j]; }), 0.5);
    const auto cums =
        gather([](const RegretSeries& r, std::size_t j) { return r.cumulative[j]; });
    sweep.median_cumulative[i] = quantile(cums, 0.5);
    sweep.q25_cumulative[i] = quantile(cums, 0.25);
    sweep.q75_cumulative[i] = quantile(cums, 0.75);
  }
  for (std::size_t c = 0; c < runs.front().checkpoints.size(); ++c) {
    const Index N = runs.front().checkpoints[c].first;
    for (std::size_t s = 0; s < runs.size(); ++s)
      column[s] = runs[s].checkpoints[c].second;
    sweep.checkpoints.push_back(CheckpointStat{N, quantile(column, 0.5),
                                               quantile(column, 0.25),
                                               quantile(column, 0.75)});
  }
  sweep.per_seed = std::move(runs);
  return sweep;
}

// ---------------------------------------------------------------------------
// Scaling fits
// ---------------------------------------------------------------------------

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double residual_sum = 0.0;  // sum of squared residuals
};

inline LinearFit least_squares_fit(const std::vector<double>& xs,
                                   const std::vector<double>& ys) {
  require(xs.size() == ys.size() && xs.size() >= 2,
          "least_squares_fit: need at least two points");
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  require(sxx > 0, "least_squares_fit: degenerate abscissa");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ssr += r * r;
  }
  fit.residual_sum = ssr;
  fit.r_squared = syy > 0 ? std::max(0.0, 1.0 - ssr / syy) : 1.0;
  return fit;
}

/// Power-law fit of final regret against the horizon: least squares on
/// (log H, log R). Nonpositive regrets cannot enter the log fit and are
/// dropped (reported via `excluded`).
struct ScalingFit {
  std::vector<int> horizons;
  std::vector<double> regrets;  // aligned with horizons
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double max_ratio = 0.0;  // R(H_max) / R(H_min)
  std::vector<int> excluded;
};

inline ScalingFit fit_h_scaling(const std::vector<int>& horizons,
                                const std::vector<double>& regrets) {
  require(horizons.size() == regrets.size(), "fit_h_scaling: size mismatch");
  require(horizons.size() >= 3, "fit_h_scaling: need at least three horizons");

  ScalingFit fit;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (regrets[i] <= 0.0) {
      fit.excluded.push_back(horizons[i]);
      continue;
    }
    fit.horizons.push_back(horizons[i]);
    fit.regrets.push_back(regrets[i]);
    xs.push_back(std::log(static_cast<double>(horizons[i])));
    ys.push_back(std::log(regrets[i]));
  }
  require(xs.size() >= 2, "fit_h_scaling: too few positive regrets");
  const LinearFit line = least_squares_fit(xs, ys);
  fit.slope = line.slope;
  fit.intercept = line.intercept;
  fit.r_squared = line.r_squared;
  fit.max_ratio = fit.regrets.back() / fit.regrets.front();
  return fit;
}

/// Fit R_N = a + b*log N on checkpoint medians. A good fit (high R^2)
/// evidences logarithmic regret growth.
inline LinearFit fit_logN(const std::vector<Index>& Ns,
                          const std::vector<double>& regrets) {
  require(Ns.size() == regrets.size(), "fit_logN: size mismatch");
  require(Ns.size() >= 4, "fit_logN: need at least four checkpoints");
  require(Ns.back() >= 4 * Ns.front(),
          "fit_logN: checkpoints must span at least two doublings");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < Ns.size(); ++i) {
    require(Ns[i] > 0, "fit_logN: checkpoints must be positive");
    xs.push_back(std::log(static_cast<double>(Ns[i])));
    ys.push_back(regrets[i]);
  }
  return least_squares_fit(xs, ys);
}

/// Backward-horizon rate suggested by the closed-loop contraction:
///   beta = c * (kappa + ln H) / ln(1 / rho(A - L C)).
/// Reported alongside the configured beta for comparison; the schedules clamp
/// p to at least 1, so a degenerate 0 here is harmless.
inline double theoretical_beta(const RiccatiSolution& sol, int kappa, int H,
                               double c = 1.0) {
  require(H >= 1 && kappa >= 0, "theoretical_beta: bad kappa or H");
  require(sol.closed_loop_radius < 1.0 && sol.closed_loop_radius > 0.0,
          "theoretical_beta: closed loop must be contracting");
  return c * (static_cast<double>(kappa) + std::log(static_cast<double>(H))) /
         std::log(1.0 / sol.closed_loop_radius);
}

}  // namespace hop
