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

#include <cstdint>
#include <random>
#include <utility>

#include "hop/lin_core.hpp"

namespace hop {

// ---------------------------------------------------------------------------
// Seeded Gaussian streams
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Deterministic seed for sub-stream `stream` of a master seed. Keeps the
/// process-noise, measurement-noise, and input streams independent so that
/// changing the prediction horizon never perturbs the noise realization.
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t s = master;
  std::uint64_t out = 0;
  for (std::uint64_t i = 0; i <= stream; ++i) out = splitmix64_next(s);
  return out;
}

/// Standard-normal stream: mt19937_64 + Box-Muller. Both generators are fully
/// specified, so identical seeds give bit-identical draws on any platform.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps the log finite
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  Vector draw(Index dim) {
    Vector v(dim);
    for (Index i = 0; i < dim; ++i) v[i] = next();
    return v;
  }

 private:
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// `count` i.i.d. standard-normal vectors of dimension `dim`, one per column.
inline Matrix noise_stream(std::uint64_t seed, Index dim, Index count) {
  require(dim >= 1, "noise_stream: dim must be >= 1");
  require(count >= 0, "noise_stream: count must be >= 0");
  GaussianStream stream(seed);
  Matrix out(dim, count);
  for (Index k = 0; k < count; ++k) out.col(k) = stream.draw(dim);
  return out;
}

// ---------------------------------------------------------------------------
// Plant
// ---------------------------------------------------------------------------

/// Linear stochastic plant
///   x_{k+1} = A x_k + B u_k + w_k,   w_k ~ N(0, Q)
///   y_k     = C x_k + v_k,           v_k ~ N(0, R)
/// with exogenous inputs u_k ~ N(0, I). Ground truth lives only in the
/// simulator and the model-based benchmark; the online learner never sees it.
struct LtiSystem {
  Matrix A, B, C, Q, R;
  MatrixDims dims;

  static LtiSystem create(Matrix A, Matrix B, Matrix C, Matrix Q, Matrix R) {
    const Index n = A.rows();
    require(A.cols() == n && n >= 1, "LtiSystem: A must be square, n >= 1");
    require(B.rows() == n && B.cols() >= 1, "LtiSystem: B has wrong shape");
    require(C.cols() == n && C.rows() >= 1, "LtiSystem: C has wrong shape");
    require(Q.rows() == n && Q.cols() == n, "LtiSystem: Q has wrong shape");
    const Index m = C.rows();
    require(R.rows() == m && R.cols() == m, "LtiSystem: R has wrong shape");
    // Exactly-zero covariances are admitted for noiseless runs; anything
    // else must be symmetric positive definite.
    require(Q.isZero(0.0) || is_positive_definite(Q),
            "LtiSystem: Q must be symmetric positive definite");
    require(R.isZero(0.0) || is_positive_definite(R),
            "LtiSystem: R must be symmetric positive definite");
    require(spectral_radius(A) <= 1.0 + 1e-9,
            "LtiSystem: A must be marginally stable (spectral radius <= 1)");
    const Index n_u = B.cols();
    return LtiSystem{std::move(A), std::move(B), std::move(C),
                     std::move(Q), std::move(R), MatrixDims{n, m, n_u}};
  }
};

/// Lower Cholesky factor used for noise shaping; a zero covariance maps to a
/// zero factor.
inline Matrix noise_shaping_factor(const Matrix& cov, const char* name) {
  if (cov.isZero(0.0)) return Matrix::Zero(cov.rows(), cov.cols());
  Eigen::LLT<Matrix> llt(0.5 * (cov + cov.transpose()));
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument(std::string(name) +
                                " must be symmetric positive definite");
  return llt.matrixL();
}

/// Three-state chain with a size-2 Jordan block at eigenvalue 1 (spectral
/// radius exactly 1). The default plant of the bundled experiments.
inline LtiSystem marginally_stable_plant() {
  Matrix A(3, 3);
  A << 1.0, 0.5, 0.0,
       0.0, 1.0, 0.5,
       0.0, 0.0, 0.9;
  Matrix B(3, 1);
  B << 0.0, 0.0, 1.0;
  Matrix C(1, 3);
  C << 1.0, 0.0, 0.0;
  return LtiSystem::create(A, B, C, 0.01 * Matrix::Identity(3, 3),
                           0.01 * Matrix::Identity(1, 1));
}

/// Same chain with every mode contracting (spectral radius 0.6).
inline LtiSystem open_loop_stable_plant() {
  Matrix A(3, 3);
  A << 0.6, 0.5, 0.0,
       0.0, 0.6, 0.5,
       0.0, 0.0, 0.6;
  Matrix B(3, 1);
  B << 0.0, 0.0, 1.0;
  Matrix C(1, 3);
  C << 1.0, 0.0, 0.0;
  return LtiSystem::create(A, B, C, 0.01 * Matrix::Identity(3, 3),
                           0.01 * Matrix::Identity(1, 1));
}

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

/// One simulated run. Columns are time steps: states x_0..x_K, outputs
/// y_0..y_K, and inputs u_0..u_{K+H-1} — inputs always lead the outputs by
/// exactly H-1 steps so an H-step-ahead predictor can see its future inputs.
struct Trajectory {
  Matrix states;           // n x (K+1)
  Matrix inputs;           // n_u x (K+H)
  Matrix outputs;          // m x (K+1)
  std::uint64_t seed = 0;
  int horizon_lead = 1;    // H

  Index steps() const { return outputs.cols() - 1; }  // K
};

/// Simulate `K` transitions with seeded noise. The master seed is split into
/// independent process-noise, measurement-noise, and input streams, so runs
/// with different H share the identical realization.
inline Trajectory simulate(const LtiSystem& sys, Index K, int H,
                           std::uint64_t seed, const Vector& x0 = Vector()) {
  require(K >= 1, "simulate: K must be >= 1");
  require(H >= 1, "simulate: H must be >= 1");
  const auto [n, m, n_u] = sys.dims;
  Vector x_init = x0.size() == 0 ? Vector(Vector::Zero(n)) : x0;
  require(x_init.size() == n, "simulate: x0 has wrong dimension");
  require(x_init.allFinite(), "simulate: x0 must be finite");

  const Matrix Lq = noise_shaping_factor(sys.Q, "Q");
  const Matrix Lr = noise_shaping_factor(sys.R, "R");

  GaussianStream process(substream_seed(seed, 0));
  GaussianStream measurement(substream_seed(seed, 1));
  GaussianStream input(substream_seed(seed, 2));

  Trajectory traj;
  traj.seed = seed;
  traj.horizon_lead = H;
  traj.states.resize(n, K + 1);
  traj.outputs.resize(m, K + 1);
  traj.inputs.resize(n_u, K + H);

  for (Index k = 0; k < K + H; ++k) traj.inputs.col(k) = input.draw(n_u);

  traj.states.col(0) = x_init;
  for (Index k = 0; k < K; ++k) {
    const Vector w = Lq * process.draw(n);
    traj.states.col(k + 1) =
        sys.A * traj.states.col(k) + sys.B * traj.inputs.col(k) + w;
  }
  for (Index k = 0; k <= K; ++k) {
    const Vector v = Lr * measurement.draw(m);
    traj.outputs.col(k) = sys.C * traj.states.col(k) + v;
  }

  if (!traj.states.allFinite() || !traj.outputs.allFinite())
    throw NumericalError(
        "simulate: trajectory left the finite range (explosive dynamics?)");
  return traj;
}

}  // namespace hop
