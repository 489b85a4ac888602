// Copyright 2026 The twocolor Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TWOCOLOR_GAUSSIAN_CORE_H
#define TWOCOLOR_GAUSSIAN_CORE_H

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

/// Gaussian-state calculus in the quadrature picture.
///
/// Conventions used throughout the project:
///   * quadratures are interleaved, (x_1, p_1, x_2, p_2, ..., x_N, p_N);
///   * the vacuum covariance is the identity (vacuum variance = 1);
///   * the symplectic form is block diagonal with blocks [[0, 1], [-1, 0]].
namespace twocolor::gaussian {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Block-diagonal symplectic form of an n-mode system.
Matrix symplectic_form(int n_modes);

/// Mean vector and covariance matrix of an N-mode Gaussian state.
///
/// Construction rejects covariance matrices that are not symmetric, not
/// positive definite, or that violate the uncertainty relation
/// (any symplectic eigenvalue below 1).
class GaussianState {
 public:
  GaussianState(Vector mean, Matrix cov);

  int n_modes() const { return n_modes_; }
  const Vector& mean() const { return mean_; }
  const Matrix& cov() const { return cov_; }

  /// Symplectic eigenvalues in ascending order (all >= 1 for a physical state).
  std::vector<double> symplectic_eigenvalues() const;

  /// Product of symplectic eigenvalues; 1 for pure states.
  double determinant() const { return cov_.determinant(); }

 private:
  int n_modes_;
  Vector mean_;
  Matrix cov_;
};

/// Affine symplectic map q -> S q + d.
class SymplecticOp {
 public:
  /// Throws std::invalid_argument unless |S Omega S^T - Omega|_max < 1e-10.
  explicit SymplecticOp(Matrix s);
  SymplecticOp(Matrix s, Vector d);

  static SymplecticOp identity(int n_modes);

  int n_modes() const { return static_cast<int>(s_.rows() / 2); }
  const Matrix& matrix() const { return s_; }
  const Vector& displacement() const { return d_; }

  /// The composite "apply this, then next".
  SymplecticOp then(const SymplecticOp& next) const;

  GaussianState apply(const GaussianState& state) const;

 private:
  Matrix s_;
  Vector d_;
};

inline constexpr double kSymplecticTolerance = 1e-10;
inline constexpr double kUncertaintyTolerance = 1e-9;

GaussianState vacuum(int n_modes);

/// Uncorrelated thermal state; variances[k] >= 1 is the quadrature variance
/// of mode k.
GaussianState thermal(const std::vector<double>& variances);

/// Two-mode squeezer acting on modes (i, j) of an n-mode system:
///   x_i' = x_i cosh r + x_j sinh r,   p_i' = p_i cosh r - p_j sinh r,
/// and symmetrically for mode j.
SymplecticOp two_mode_squeezer(double r, int n_modes = 2, int mode_i = 0, int mode_j = 1);

/// Single-mode squeezer: x' = e^{-r} x, p' = e^{r} p.
SymplecticOp single_mode_squeezer(double r, int n_modes, int mode);

/// Orthogonal mixing of modes (i, j) with amplitude transmission sqrt(tau).
SymplecticOp beamsplitter(double transmittance, int n_modes, int mode_i, int mode_j);

/// Phase shift a -> a e^{-i phi}: x' = x cos phi + p sin phi,
/// p' = -x sin phi + p cos phi.
SymplecticOp phase_rotation(double phi, int n_modes, int mode);

/// Pure displacement of the mean.
SymplecticOp displacement(const Vector& d);

/// Pure-loss channel of efficiency eta on one mode.
GaussianState loss_channel(const GaussianState& state, int mode, double efficiency);

/// Unit coefficient vector reading cos(angle) x_mode + sin(angle) p_mode.
Vector quadrature_vector(int n_modes, int mode, double angle);

double homodyne_variance(const GaussianState& state, int mode, double angle);

/// c^T cov c for a coefficient vector over all 2N quadratures.
double joint_variance(const GaussianState& state, const Vector& coefficients);

/// n_samples x 2N matrix of multivariate-normal draws with the state's mean
/// and covariance (Cholesky factorization). Bit-identical for a fixed seed.
Matrix sample_oracle(const GaussianState& state, std::size_t n_samples, std::uint64_t seed);

struct SampleVariance {
  double variance;
  double standard_error;
};

/// Sample variance of c^T q over the rows of a sample matrix, with the
/// Gaussian standard error variance * sqrt(2 / (n - 1)).
SampleVariance sample_joint_variance(const Matrix& samples, const Vector& coefficients);

}  // namespace twocolor::gaussian

#endif  // TWOCOLOR_GAUSSIAN_CORE_H
