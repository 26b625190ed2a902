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

#include <cstdio>
#include <fstream>
#include <string>

#include "hop/regret_harness.hpp"

namespace hop {

/// Fixed-format numeric rendering; every emitted number must be finite.
inline std::string format_double(double value, int precision = 12) {
  if (!std::isfinite(value))
    throw NumericalError("refusing to emit a non-finite value");
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", precision, value);
  return buf;
}

/// Round-trip-exact rendering used by the config serializer.
inline std::string format_double_exact(double value) {
  return format_double(value, 17);
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary: no platform newline games
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

/// Per-step results, pointwise medians across the sweep's seeds.
/// Schema: k,epoch,p,loss_online,loss_benchmark,cum_regret
inline void write_per_step_csv(const std::string& path, const SweepResult& sweep,
                               const EpochSchedule& schedule) {
  auto out = open_output(path);
  out << "k,epoch,p,loss_online,loss_benchmark,cum_regret\n";
  for (Index i = 0; i < static_cast<Index>(sweep.median_cumulative.size()); ++i) {
    const Index k = sweep.first_base + i;
    const int epoch = schedule.epoch_of(k);
    out << k << ',' << epoch << ',' << schedule.p_of_epoch(epoch) << ','
        << format_double(sweep.median_loss_online[i]) << ','
        << format_double(sweep.median_loss_benchmark[i]) << ','
        << format_double(sweep.median_cumulative[i]) << '\n';
  }
}

/// Dyadic regret checkpoints. Schema: N,median_regret,q25,q75
inline void write_checkpoints_csv(const std::string& path,
                                  const SweepResult& sweep) {
  auto out = open_output(path);
  out << "N,median_regret,q25,q75\n";
  for (const CheckpointStat& c : sweep.checkpoints)
    out << c.N << ',' << format_double(c.median) << ','
        << format_double(c.q25) << ',' << format_double(c.q75) << '\n';
}

/// Raw trajectory export: k, input components, output components. The final
/// H-1 rows carry the input lead only; their output cells are left empty.
inline void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  auto out = open_output(path);
  out << 'k';
  for (Index i = 0; i < traj.inputs.rows(); ++i) out << ",u" << i;
  for (Index i = 0; i < traj.outputs.rows(); ++i) out << ",y" << i;
  out << '\n';
  for (Index k = 0; k < traj.inputs.cols(); ++k) {
    out << k;
    for (Index i = 0; i < traj.inputs.rows(); ++i)
      out << ',' << format_double(traj.inputs(i, k));
    for (Index i = 0; i < traj.outputs.rows(); ++i) {
      out << ',';
      if (k < traj.outputs.cols()) out << format_double(traj.outputs(i, k));
    }
    out << '\n';
  }
}

/// Raw prediction vectors of one paired run (needs keep_detail).
/// Schema: k,target,yhat<i>...,ybar<i>...,y<i>...
inline void write_trace_csv(const std::string& path, const PairedRun& run) {
  require(run.online && run.benchmark && run.trajectory,
          "write_trace_csv: run was not kept in detail");
  const Matrix& outputs = run.trajectory->outputs;
  const Index m = outputs.rows();
  auto out = open_output(path);
  out << "k,target";
  for (Index i = 0; i < m; ++i) out << ",yhat" << i;
  for (Index i = 0; i < m; ++i) out << ",ybar" << i;
  for (Index i = 0; i < m; ++i) out << ",y" << i;
  out << '\n';
  for (const PredictionRecord& rec : run.online->predictions) {
    out << rec.base_time << ',' << rec.target_time;
    for (Index i = 0; i < m; ++i) out << ',' << format_double(rec.value[i]);
    for (Index i = 0; i < m; ++i)
      out << ',' << format_double(run.benchmark->predictions(i, rec.base_time));
    for (Index i = 0; i < m; ++i)
      out << ',' << format_double(outputs(i, rec.target_time));
    out << '\n';
  }
}

struct SweepSummaryRow {
  std::string system;
  int H;
  double median;
  double q25;
  double q75;
};

/// Sweep table. Schema: system,H,median_regret,q25,q75
inline void write_sweep_summary_csv(const std::string& path,
                                    const std::vector<SweepSummaryRow>& rows) {
  auto out = open_output(path);
  out << "system,H,median_regret,q25,q75\n";
  for (const auto& r : rows)
    out << r.system << ',' << r.H << ',' << format_double(r.median) << ','
        << format_double(r.q25) << ',' << format_double(r.q75) << '\n';
}

}  // namespace hop
