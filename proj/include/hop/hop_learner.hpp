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

#include <deque>
#include <functional>
#include <vector>

#include "hop/lin_core.hpp"

namespace hop {

// The model-free H-step-ahead learner. Nothing in this header sees the plant
// matrices: inputs are output/input histories only.

// ---------------------------------------------------------------------------
// Regressor windows
// ---------------------------------------------------------------------------

/// Stacked regressor at base time k:
///   z = [y_{k-p+1}; ...; y_k; u_{k-p+1}; ...; u_{k+H-1}]
/// of dimension p*m + (p+H-1)*n_u.
struct RegressorWindow {
  Vector z;
  Index base_time = 0;
  int p = 1;
  int horizon = 1;

  static Index dimension(Index m, Index n_u, int p, int H) {
    return static_cast<Index>(p) * m + static_cast<Index>(p + H - 1) * n_u;
  }
};

/// Build the window at base time k from histories indexed by absolute time
/// (outputs[t] = y_t, inputs[t] = u_t). Requires k >= p-1, outputs through k,
/// and inputs through k+H-1.
inline RegressorWindow build_window(const std::vector<Vector>& outputs,
                                    const std::vector<Vector>& inputs,
                                    Index k, int p, int H) {
  require(p >= 1 && H >= 1, "build_window: p and H must be >= 1");
  require(k >= p - 1, "build_window: insufficient history (k < p-1)");
  require(static_cast<Index>(outputs.size()) > k,
          "build_window: outputs missing through base time");
  require(static_cast<Index>(inputs.size()) > k + H - 1,
          "build_window: inputs missing through k+H-1");

  const Index m = outputs[static_cast<std::size_t>(k)].size();
  const Index n_u = inputs[static_cast<std::size_t>(k)].size();
  RegressorWindow w;
  w.base_time = k;
  w.p = p;
  w.horizon = H;
  w.z.resize(RegressorWindow::dimension(m, n_u, p, H));

  Index at = 0;
  for (Index t = k - p + 1; t <= k; ++t, at += m)
    w.z.segment(at, m) = outputs[static_cast<std::size_t>(t)];
  for (Index t = k - p + 1; t <= k + H - 1; ++t, at += n_u)
    w.z.segment(at, n_u) = inputs[static_cast<std::size_t>(t)];
  return w;
}

struct Sample {
  RegressorWindow window;
  Vector target;  // y at window.base_time + H
};

// ---------------------------------------------------------------------------
// Ridge least squares, batch and recursive
// ---------------------------------------------------------------------------

/// Learner state: ridge weights, the Gram matrix V = lambda*I + sum z z',
/// its maintained inverse, and the queue of issued-but-unscored predictions.
struct LearnerState {
  Matrix weights;       // m x d
  Matrix gram;          // d x d
  Matrix gram_inverse;  // d x d
  double lambda = 1.0;
  int epoch = 0;
  int p = 1;
  int horizon = 1;
  std::deque<std::pair<Index, Vector>> prediction_buffer;  // (target time, value)
  Index sample_count = 0;
  Index steps_since_drift_check = 0;

  Index dim() const { return gram.rows(); }

  /// ||V V^{-1} - I||_F; upper-bounds the spectral-norm drift.
  double inverse_drift() const {
    return (gram * gram_inverse -
            Matrix::Identity(gram.rows(), gram.cols())).norm();
  }

  // Plain LDLT. Do not symmetrize the result: the factored inverse is
  // accurate in the V-weighted metric, and rounding X towards symmetry
  // wrecks that cancellation once the Gram is badly conditioned.
  void refactor_inverse() {
    gram_inverse =
        gram.ldlt().solve(Matrix::Identity(gram.rows(), gram.cols()));
  }
};

/// Closed-form ridge solve over a fixed sample set:
///   V = lambda*I + sum_t z_t z_t',   G = (sum_t y_t z_t') V^{-1}.
/// Dimensions must be supplied so the empty sample set is well defined
/// (G = 0, V = lambda*I).
inline LearnerState batch_solve(const std::vector<Sample>& samples,
                                double lambda, int p, int H, Index m,
                                Index n_u) {
  require(lambda > 0.0, "batch_solve: lambda must be positive");
  require(p >= 1 && H >= 1, "batch_solve: p and H must be >= 1");
  const Index d = RegressorWindow::dimension(m, n_u, p, H);

  LearnerState state;
  state.lambda = lambda;
  state.p = p;
  state.horizon = H;
  state.gram = lambda * Matrix::Identity(d, d);
  Matrix cross = Matrix::Zero(m, d);  // sum_t y_t z_t'
  for (const Sample& s : samples) {
    require(s.window.p == p && s.window.horizon == H && s.window.z.size() == d,
            "batch_solve: sample window does not match (p, H)");
    require(s.target.size() == m, "batch_solve: sample target has wrong dimension");
    state.gram.selfadjointView<Eigen::Lower>().rankUpdate(s.window.z);
    cross += s.target * s.window.z.transpose();
  }
  state.gram = state.gram.selfadjointView<Eigen::Lower>();
  state.refactor_inverse();
  state.weights = state.gram.ldlt().solve(cross.transpose()).transpose();
  state.sample_count = static_cast<Index>(samples.size());
  return state;
}

/// Matrix-vector prediction for the window's target time; the value is also
/// queued so it can be scored once the target output arrives H steps later.
inline Vector predict(LearnerState& state, const RegressorWindow& window) {
  require(window.z.size() == state.dim() && window.p == state.p &&
              window.horizon == state.horizon,
          "predict: window does not match the learner state");
  Vector value = state.weights * window.z;
  state.prediction_buffer.emplace_back(window.base_time + state.horizon, value);
  if (state.prediction_buffer.size() > static_cast<std::size_t>(state.horizon))
    throw std::logic_error("predict: prediction buffer exceeded the horizon");
  return value;
}

/// Rank-one update with the sample that matures at `observation_time`:
/// append (Z_{k-H}, y_k) to the ridge problem,
///   V <- V + Z Z',   G <- G + (y_k - G Z) Z' V^{-1},
/// with the inverse maintained by the rank-one (Sherman-Morrison) identity
/// and a periodic drift monitor that falls back to a full refactorization.
/// The recursion reproduces the batch closed form over the same samples.
inline void recursive_step(LearnerState& state, const Vector& observation,
                           Index observation_time,
                           const RegressorWindow& delayed_window) {
  require(delayed_window.p == state.p && delayed_window.horizon == state.horizon &&
              delayed_window.z.size() == state.dim(),
          "recursive_step: window does not match the learner state");
  require(delayed_window.base_time + state.horizon == observation_time,
          "recursive_step: window is not delayed by exactly H steps");
  require(observation.size() == state.weights.rows(),
          "recursive_step: observation has wrong dimension");

  // Consume the matured prediction, if one was issued for this time.
  if (!state.prediction_buffer.empty()) {
    const Index front_target = state.prediction_buffer.front().first;
    if (front_target < observation_time)
      throw std::logic_error(
          "recursive_step: buffered prediction was never scored (alignment bug)");
    if (front_target == observation_time) state.prediction_buffer.pop_front();
  }

  const Vector& z = delayed_window.z;
  const Vector w = state.gram_inverse * z;
  const double denom = 1.0 + z.dot(w);
  state.gram.selfadjointView<Eigen::Lower>().rankUpdate(z);
  state.gram = state.gram.selfadjointView<Eigen::Lower>();
  state.gram_inverse -= (w * w.transpose()) / denom;

  // V_new^{-1} z == w / denom identically, so the gain needs no second
  // product with the updated inverse.
  const Vector gain = w / denom;
  const Vector residual = observation - state.weights * z;
  state.weights += residual * gain.transpose();
  ++state.sample_count;

  if (++state.steps_since_drift_check >= 16) {
    state.steps_since_drift_check = 0;
    if (state.inverse_drift() > 1e-4) state.refactor_inverse();
  }
}

// ---------------------------------------------------------------------------
// Epoch schedule
// ---------------------------------------------------------------------------

/// Doubling-trick schedule: epoch l (1-based) starts at time 2^{l-1}*T_init
/// and runs for as many steps; within it the backward horizon is frozen at
///   p_l = ceil(beta * ln(2^{l-1}*T_init + 1)),
/// clamped to [1, epoch_start+1-H] so a window always fits in history.
struct EpochSchedule {
  Index T_init = 1;
  int N_E = 1;
  double beta = 1.0;
  int horizon = 1;

  Index epoch_start(int l) const { return T_init << (l - 1); }
  Index total_steps() const { return T_init << N_E; }  // N

  int p_raw(int l) const {
    const double value =
        std::ceil(beta * std::log(static_cast<double>(epoch_start(l)) + 1.0));
    return std::max(1, static_cast<int>(value));
  }

  int p_of_epoch(int l) const {
    const Index cap = epoch_start(l) + 1 - horizon;
    const int p = p_raw(l);
    if (cap < 1) return 1;
    return static_cast<int>(std::min<Index>(p, cap));
  }

  bool p_clamped(int l) const { return p_of_epoch(l) != p_raw(l); }

  /// Epoch covering base time k, or 0 if k precedes the first epoch.
  int epoch_of(Index k) const {
    for (int l = N_E; l >= 1; --l)
      if (k >= epoch_start(l)) return l;
    return 0;
  }
};

// ---------------------------------------------------------------------------
// Online driver
// ---------------------------------------------------------------------------

/// Pull-style data source. The driver requests y_k and u_k strictly in the
/// interleaved order of the online protocol, so a source can enforce (or
/// record) exactly what information each prediction had access to.
struct SampleSource {
  std::function<Vector(Index)> output_at;  // y_k
  std::function<Vector(Index)> input_at;   // u_k
  Index last_output = 0;  // largest k for which output_at is valid
};

struct PredictionRecord {
  Index base_time;    // k: the step at which the prediction was formed
  Index target_time;  // k + H
  Vector value;
  int epoch;
  int p;
};

struct EpochRecord {
  int index;
  Index start;
  int p;
  bool p_was_clamped;
  Index batch_samples;     // samples in the re-initialization solve
  Matrix initial_weights;  // weights right after the batch solve
};

struct HopResult {
  std::vector<PredictionRecord> predictions;
  std::vector<EpochRecord> epochs;
  LearnerState state;
};

/// The online H-step-ahead prediction loop.
///
/// Warm-up observes outputs 0..T_init (and the matching lead inputs) without
/// predicting. Each epoch re-initializes the ridge problem by a batch solve
/// over the full retained history at the epoch's p, then alternates
/// predict / observe / rank-one update, scoring each prediction H steps
/// after it was issued. Emits every prediction together with per-epoch
/// metadata.
inline HopResult run_hop(const SampleSource& source,
                         const EpochSchedule& schedule, double lambda) {
  const int H = schedule.horizon;
  const Index N = schedule.total_steps();
  require(schedule.T_init >= 1 && schedule.N_E >= 1, "run_hop: bad schedule");
  require(source.last_output >= N,
          "run_hop: stream shorter than the schedule demands");

  std::vector<Vector> ys, us;
  ys.reserve(static_cast<std::size_t>(N + 1));
  us.reserve(static_cast<std::size_t>(N + H));
  auto pull_output = [&](Index k) { ys.push_back(source.output_at(k)); };
  auto pull_input = [&](Index k) { us.push_back(source.input_at(k)); };

  // Inputs lead the outputs by H-1 steps, so u_0..u_{H-2} exist before the
  // first output is observed.
  for (Index k = 0; k < H - 1; ++k) pull_input(k);
  // Warm-up: no predictions, just history.
  for (Index k = 0; k <= schedule.T_init; ++k) {
    pull_output(k);
    pull_input(k + H - 1);
  }

  const Index m = ys.front().size();
  const Index n_u = us.front().size();

  HopResult result;
  LearnerState state;
  for (int l = 1; l <= schedule.N_E; ++l) {
    const Index T = schedule.epoch_start(l);
    const int p = schedule.p_of_epoch(l);

    std::vector<Sample> samples;
    for (Index t = p - 1; t + H <= T; ++t)
      samples.push_back(Sample{build_window(ys, us, t, p, H),
                               ys[static_cast<std::size_t>(t + H)]});
    auto carried = std::move(state.prediction_buffer);
    state = batch_solve(samples, lambda, p, H, m, n_u);
    state.prediction_buffer = std::move(carried);
    state.epoch = l;
    result.epochs.push_back(EpochRecord{l, T, p, schedule.p_clamped(l),
                                        static_cast<Index>(samples.size()),
                                        state.weights});

    for (Index k = T; k <= 2 * T - 1; ++k) {
      const RegressorWindow window = build_window(ys, us, k, p, H);
      Vector value = predict(state, window);
      result.predictions.push_back(
          PredictionRecord{k, k + H, std::move(value), l, p});

      pull_output(k + 1);
      pull_input(k + H);

      const Index sample_base = k + 1 - H;
      if (sample_base >= p - 1)
        recursive_step(state, ys[static_cast<std::size_t>(k + 1)], k + 1,
                       build_window(ys, us, sample_base, p, H));
    }
  }
  result.state = std::move(state);
  return result;
}

/// Adapt a fully materialized trajectory-like pair of arrays to a source.
inline SampleSource source_from_columns(const Matrix& outputs,
                                        const Matrix& inputs) {
  SampleSource src;
  src.output_at = [&outputs](Index k) { return Vector(outputs.col(k)); };
  src.input_at = [&inputs](Index k) { return Vector(inputs.col(k)); };
  src.last_output = outputs.cols() - 1;
  return src;
}

}  // namespace hop
