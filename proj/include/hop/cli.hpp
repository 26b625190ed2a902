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

#include <chrono>
#include <filesystem>
#include <iostream>

#include <json.hpp>

#include "hop/config.hpp"
#include "hop/svg.hpp"
#include "hop/validation.hpp"

namespace hop::cli {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes: 0 ok, 1 validation failure, 2 config error, 3 numerical failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidationFailure = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNumericalFailure = 3;

struct CommandOptions {
  std::string config_path;
  std::string seeds_override;  // empty, a count, or a comma list
  std::string out_dir = "out";
  bool svg = false;
  bool fast = false;
};

inline void apply_seed_override(ExperimentConfig& cfg, const std::string& text) {
  if (text.empty()) return;
  std::vector<std::uint64_t> seeds;
  if (text.find(',') != std::string::npos) {
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
      item = config_detail::trim(item);
      long long v;
      if (!config_detail::parse_longlong(item, v) || v < 0)
        throw ConfigError("--seeds: expected a count or a comma list of seeds");
      seeds.push_back(static_cast<std::uint64_t>(v));
    }
  } else {
    long long count;
    if (!config_detail::parse_longlong(config_detail::trim(text), count) || count < 1)
      throw ConfigError("--seeds: expected a count or a comma list of seeds");
    for (long long s = 1; s <= count; ++s)
      seeds.push_back(static_cast<std::uint64_t>(s));
  }
  if (seeds.empty()) throw ConfigError("--seeds: empty seed list");
  cfg.seeds = std::move(seeds);
}

namespace cli_detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

inline void write_manifest(const std::filesystem::path& dir,
                           const std::string& command,
                           const ExperimentConfig& cfg,
                           const std::vector<std::string>& outputs,
                           double duration_seconds,
                           const nlohmann::json& extra = {}) {
  nlohmann::json manifest;
  manifest["artifact_version"] = kVersion;
  manifest["command"] = command;
  manifest["config"] = serialize_config(cfg);
  manifest["seeds"] = cfg.seeds;
  manifest["outputs"] = outputs;
  manifest["duration_seconds"] = duration_seconds;
  if (!extra.empty()) manifest["results"] = extra;
  std::ofstream out(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
}

inline int guard(const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumericalFailure;
  }
}

inline void warn_if_clamped(const EpochSchedule& schedule) {
  for (int l = 1; l <= schedule.N_E; ++l)
    if (schedule.p_clamped(l))
      std::cerr << "warning: epoch " << l << ": backward horizon clamped to "
                << schedule.p_of_epoch(l)
                << " so the window fits in history\n";
}

inline SvgSeries regret_curve(const SweepResult& sweep, const std::string& label) {
  SvgSeries series;
  series.label = label;
  for (Index i = 0; i < static_cast<Index>(sweep.median_cumulative.size()); ++i) {
    series.xs.push_back(static_cast<double>(sweep.first_base + i));
    series.ys.push_back(sweep.median_cumulative[i]);
  }
  return series;
}

}  // namespace cli_detail

// ---------------------------------------------------------------------------

inline int cmd_run(const CommandOptions& opts) {
  return cli_detail::guard([&] {
    const auto start = cli_detail::Clock::now();
    ExperimentConfig cfg = load_config(opts.config_path);
    apply_seed_override(cfg, opts.seeds_override);
    const LtiSystem sys = resolve_system(cfg);
    const RunParams params = run_params(cfg, cfg.H);
    cli_detail::warn_if_clamped(params.schedule());

    const SweepResult sweep = seed_sweep(sys, params, cfg.seeds);

    const std::filesystem::path dir(opts.out_dir);
    std::filesystem::create_directories(dir);
    std::vector<std::string> outputs;
    auto emit = [&](const std::string& name) {
      outputs.push_back((dir / name).string());
      return outputs.back();
    };

    write_per_step_csv(emit("per_step.csv"), sweep, params.schedule());
    write_checkpoints_csv(emit("checkpoints.csv"), sweep);
    if (cfg.trace) {
      const PairedRun detail = paired_run(sys, params, cfg.seeds.front(), true);
      write_trace_csv(emit("trace.csv"), detail);
      write_trajectory_csv(emit("trajectory.csv"), *detail.trajectory);
    }
    if (opts.svg) {
      std::ofstream svg(emit("regret.svg"));
      svg << render_line_chart("cumulative regret, " + cfg.system +
                                   ", H=" + std::to_string(cfg.H),
                               "step", "regret",
                               {cli_detail::regret_curve(sweep, "median")});
    }

    nlohmann::json results;
    results["median_regret"] = sweep.median_final();
    outputs.push_back((dir / "manifest.json").string());
    cli_detail::write_manifest(dir, "run", cfg, outputs,
                               cli_detail::seconds_since(start), results);

    std::cout << "run: system=" << cfg.system << " H=" << cfg.H
              << " seeds=" << cfg.seeds.size()
              << " N=" << params.schedule().total_steps() << '\n';
    std::cout << "median regret: " << format_double(sweep.median_final())
              << "  (q25 "
              << format_double(sweep.q25_cumulative.empty() ? 0.0
                                                            : sweep.q25_cumulative.back())
              << ", q75 "
              << format_double(sweep.q75_cumulative.empty() ? 0.0
                                                            : sweep.q75_cumulative.back())
              << ")\n";
    for (const std::string& path : outputs) std::cout << "wrote " << path << '\n';
    return kExitOk;
  });
}

// ---------------------------------------------------------------------------

inline int cmd_validate(const CommandOptions& opts) {
  return cli_detail::guard([&] {
    const std::vector<IdentityCheck> checks = run_identity_suite(opts.fast);
    bool all_pass = true;
    for (const IdentityCheck& check : checks) {
      all_pass = all_pass && check.pass;
      std::cout << (check.pass ? "[PASS] " : "[FAIL] ") << check.name
                << ": measured=" << format_double(check.measured, 6)
                << " threshold=" << format_double(check.threshold, 6) << '\n';
    }
    if (!all_pass) {
      for (const IdentityCheck& check : checks)
        if (!check.pass) std::cerr << "identity failed: " << check.name << '\n';
      return kExitValidationFailure;
    }
    std::cout << "all identities hold\n";
    return kExitOk;
  });
}

// ---------------------------------------------------------------------------

inline int cmd_sweep(const CommandOptions& opts) {
  return cli_detail::guard([&] {
    const auto start = cli_detail::Clock::now();
    ExperimentConfig cfg = load_config(opts.config_path);
    apply_seed_override(cfg, opts.seeds_override);
    const std::vector<std::string> systems = cfg.system_grid();
    const std::vector<int> horizons = cfg.horizon_grid();

    const std::filesystem::path dir(opts.out_dir);
    std::filesystem::create_directories(dir);
    std::vector<std::string> outputs;
    std::vector<SweepSummaryRow> rows;
    nlohmann::json results;

    for (const std::string& name : systems) {
      const LtiSystem sys = resolve_system(cfg, name);
      std::vector<double> medians;
      std::vector<SvgSeries> curves;
      for (int H : horizons) {
        cli_detail::warn_if_clamped(run_params(cfg, H).schedule());
        const SweepResult sweep = seed_sweep(sys, run_params(cfg, H), cfg.seeds);
        rows.push_back(SweepSummaryRow{
            name, H, sweep.median_final(),
            sweep.q25_cumulative.empty() ? 0.0 : sweep.q25_cumulative.back(),
            sweep.q75_cumulative.empty() ? 0.0 : sweep.q75_cumulative.back()});
        medians.push_back(sweep.median_final());
        if (opts.svg)
          curves.push_back(cli_detail::regret_curve(sweep, "H=" + std::to_string(H)));
      }

      std::cout << name << ':';
      for (std::size_t i = 0; i < horizons.size(); ++i)
        std::cout << "  H=" << horizons[i] << " -> "
                  << format_double(medians[i], 6);
      std::cout << '\n';

      if (horizons.size() >= 3) {
        const ScalingFit fit = fit_h_scaling(horizons, medians);
        for (int excluded : fit.excluded)
          std::cerr << "warning: " << name << " H=" << excluded
                    << " has nonpositive regret, excluded from the fit\n";
        std::cout << "  log-log slope " << format_double(fit.slope, 4) << " (R^2 "
                  << format_double(fit.r_squared, 4) << "), R(Hmax)/R(Hmin) "
                  << format_double(fit.max_ratio, 4);
        if (fit.max_ratio <= 3.0) std::cout << "  [near-flat in H: saturation]";
        std::cout << '\n';
        results[name] = {{"slope", fit.slope},
                         {"r_squared", fit.r_squared},
                         {"max_ratio", fit.max_ratio}};
      } else {
        std::cout << "  (fewer than three horizons; scaling fit skipped)\n";
      }

      if (opts.svg) {
        const std::string path = (dir / ("regret_" + name + ".svg")).string();
        std::ofstream svg(path);
        svg << render_line_chart("cumulative regret vs step, " + name, "step",
                                 "regret", curves);
        outputs.push_back(path);
      }
    }

    outputs.insert(outputs.begin(), (dir / "sweep_summary.csv").string());
    write_sweep_summary_csv(outputs.front(), rows);
    outputs.push_back((dir / "manifest.json").string());
    cli_detail::write_manifest(dir, "sweep", cfg, outputs,
                               cli_detail::seconds_since(start), results);
    for (const std::string& path : outputs) std::cout << "wrote " << path << '\n';
    return kExitOk;
  });
}

// ---------------------------------------------------------------------------

inline int cmd_bench(const CommandOptions& opts) {
  return cli_detail::guard([&] {
    ExperimentConfig cfg = load_config(opts.config_path);
    for (const std::string& name : cfg.system_grid()) {
      const LtiSystem sys = resolve_system(cfg, name);
      const RiccatiSolution sol = solve_dare(sys.A, sys.C, sys.Q, sys.R);
      const int kappa =
          cfg.kappa >= 0 ? cfg.kappa : estimate_unit_jordan_order(sys.A);
      const Matrix innovation_cov =
          sys.C * sol.P * sys.C.transpose() + sys.R;

      std::cout << "system " << name << " (n=" << sys.dims.n
                << ", m=" << sys.dims.m << ", n_u=" << sys.dims.n_u << ")\n";
      std::cout << "  spectral radius of A: "
                << format_double(spectral_radius(sys.A), 10) << '\n';
      std::cout << "  steady-state covariance solve: residual "
                << format_double(sol.residual, 4) << " after " << sol.iterations
                << " iterations\n";
      std::cout << "  closed-loop radius: "
                << format_double(sol.closed_loop_radius, 10) << '\n';
      std::cout << "  innovation covariance norm: "
                << format_double(innovation_cov.norm(), 10) << '\n';
      std::cout << "  largest unit-eigenvalue Jordan block: " << kappa
                << (cfg.kappa >= 0 ? " (from config)" : " (estimated)") << '\n';
      std::cout << "  closed loop numerically diagonalizable: "
                << (is_numerically_diagonalizable(sys.A - sol.L * sys.C) ? "yes"
                                                                         : "no")
                << '\n';
      std::cout << "  H-step error covariance norm (H=" << cfg.H << "): "
                << format_double(
                       h_step_error_covariance(sys, sol.P, cfg.H).norm(), 10)
                << '\n';
      std::cout << "  suggested backward-horizon rate: "
                << format_double(theoretical_beta(sol, kappa, cfg.H), 6)
                << "  (configured beta = " << format_double(cfg.beta, 6)
                << ")\n";
    }
    return kExitOk;
  });
}

}  // namespace hop::cli
