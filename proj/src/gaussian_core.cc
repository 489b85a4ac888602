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

#include "twocolor/gaussian_core.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

namespace twocolor::gaussian {

namespace {

void check_mode_count(int n_modes) {
    if (n_modes < 1) {
        throw std::invalid_argument("mode count must be positive, got " + std::to_string(n_modes));
    }
}

void check_mode(int n_modes, int mode) {
    if (mode < 0 || mode >= n_modes) {
        throw std::out_of_range("mode " + std::to_string(mode) + " out of range for " +
                                std::to_string(n_modes) + "-mode system");
    }
}

void check_finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw std::invalid_argument(std::string(what) + " must be finite");
    }
}

}  // namespace

Matrix symplectic_form(int n_modes) {
    check_mode_count(n_modes);
    Matrix omega = Matrix::Zero(2 * n_modes, 2 * n_modes);
    for (int k = 0; k < n_modes; ++k) {
        omega(2 * k, 2 * k + 1) = 1.0;
        omega(2 * k + 1, 2 * k) = -1.0;
    }
    return omega;
}

GaussianState::GaussianState(Vector mean, Matrix cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
    if (cov_.rows() != cov_.cols() || cov_.rows() == 0 || cov_.rows() % 2 != 0) {
        throw std::invalid_argument("covariance must be a non-empty 2N x 2N matrix");
    }
    if (mean_.size() != cov_.rows()) {
        throw std::invalid_argument("mean length does not match covariance dimension");
    }
    if (!cov_.allFinite() || !mean_.allFinite()) {
        throw std::invalid_argument("state contains non-finite entries");
    }
    n_modes_ = static_cast<int>(cov_.rows() / 2);

    double scale = std::max(1.0, cov_.cwiseAbs().maxCoeff());
    if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw std::invalid_argument("covariance is not symmetric");
    }
    cov_ = 0.5 * (cov_ + cov_.transpose()).eval();

    Eigen::LLT<Matrix> llt(cov_);
    if (llt.info() != Eigen::Success) {
        throw std::invalid_argument("covariance is not positive definite");
    }
    auto nu = symplectic_eigenvalues();
    if (nu.front() < 1.0 - kUncertaintyTolerance) {
        throw std::invalid_argument("covariance violates the uncertainty relation (symplectic eigenvalue " +
                                    std::to_string(nu.front()) + ")");
    }
}

std::vector<double> GaussianState::symplectic_eigenvalues() const {
    // i L^T Omega L is Hermitian and shares its spectrum (+-nu_k) with i Omega V.
    Eigen::LLT<Matrix> llt(cov_);
    Matrix l = llt.matrixL();
    Eigen::MatrixXcd h = std::complex<double>(0.0, 1.0) * (l.transpose() * symplectic_form(n_modes_) * l);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
    const auto& ev = solver.eigenvalues();
    std::vector<double> nu;
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
        if (ev[k] > 0) {
            nu.push_back(ev[k]);
        }
    }
    std::sort(nu.begin(), nu.end());
    return nu;
}

SymplecticOp::SymplecticOp(Matrix s) : SymplecticOp(s, Vector::Zero(s.rows())) {}

SymplecticOp::SymplecticOp(Matrix s, Vector d) : s_(std::move(s)), d_(std::move(d)) {
    if (s_.rows() != s_.cols() || s_.rows() == 0 || s_.rows() % 2 != 0) {
        throw std::invalid_argument("symplectic matrix must be a non-empty 2N x 2N matrix");
    }
    if (d_.size() != s_.rows()) {
        throw std::invalid_argument("displacement length does not match matrix dimension");
    }
    if (!s_.allFinite() || !d_.allFinite()) {
        throw std::invalid_argument("symplectic op contains non-finite entries");
    }
    Matrix omega = symplectic_form(static_cast<int>(s_.rows() / 2));
    double err = (s_ * omega * s_.transpose() - omega).cwiseAbs().maxCoeff();
    if (err >= kSymplecticTolerance) {
        throw std::invalid_argument("matrix is not symplectic (|S Omega S^T - Omega|_max = " +
                                    std::to_string(err) + ")");
    }
}

SymplecticOp SymplecticOp::identity(int n_modes) {
    check_mode_count(n_modes);
    return SymplecticOp(Matrix::Identity(2 * n_modes, 2 * n_modes));
}

SymplecticOp SymplecticOp::then(const SymplecticOp& next) const {
    if (next.n_modes() != n_modes()) {
        throw std::invalid_argument("cannot compose symplectic ops of different mode counts");
    }
    return SymplecticOp(next.s_ * s_, next.s_ * d_ + next.d_);
}

GaussianState SymplecticOp::apply(const GaussianState& state) const {
    if (state.n_modes() != n_modes()) {
        throw std::invalid_argument("symplectic op and state have different mode counts");
    }
    return GaussianState(s_ * state.mean() + d_, s_ * state.cov() * s_.transpose());
}

GaussianState vacuum(int n_modes) {
    check_mode_count(n_modes);
    return GaussianState(Vector::Zero(2 * n_modes), Matrix::Identity(2 * n_modes, 2 * n_modes));
}

GaussianState thermal(const std::vector<double>& variances) {
    int n = static_cast<int>(variances.size());
    check_mode_count(n);
    Vector diag(2 * n);
    for (int k = 0; k < n; ++k) {
        diag(2 * k) = variances[k];
        diag(2 * k + 1) = variances[k];
    }
    return GaussianState(Vector::Zero(2 * n), diag.asDiagonal());
}

SymplecticOp two_mode_squeezer(double r, int n_modes, int mode_i, int mode_j) {
    check_finite(r, "squeezing parameter");
    check_mode(n_modes, mode_i);
    check_mode(n_modes, mode_j);
    if (mode_i == mode_j) {
        throw std::invalid_argument("two-mode squeezer needs two distinct modes");
    }
    Matrix s = Matrix::Identity(2 * n_modes, 2 * n_modes);
    double c = std::cosh(r);
    double sh = std::sinh(r);
    int xi = 2 * mode_i, pi = xi + 1, xj = 2 * mode_j, pj = xj + 1;
    s(xi, xi) = c;
    s(xi, xj) = sh;
    s(pi, pi) = c;
    s(pi, pj) = -sh;
    s(xj, xj) = c;
    s(xj, xi) = sh;
    s(pj, pj) = c;
    s(pj, pi) = -sh;
    return SymplecticOp(std::move(s));
}

SymplecticOp single_mode_squeezer(double r, int n_modes, int mode) {
    check_finite(r, "squeezing parameter");
    check_mode(n_modes, mode);
    Matrix s = Matrix::Identity(2 * n_modes, 2 * n_modes);
    s(2 * mode, 2 * mode) = std::exp(-r);
    s(2 * mode + 1, 2 * mode + 1) = std::exp(r);
    return SymplecticOp(std::move(s));
}

SymplecticOp beamsplitter(double transmittance, int n_modes, int mode_i, int mode_j) {
    if (!(transmittance >= 0.0 && transmittance <= 1.0)) {
        throw std::invalid_argument("beamsplitter transmittance must lie in [0, 1]");
    }
    check_mode(n_modes, mode_i);
    check_mode(n_modes, mode_j);
    if (mode_i == mode_j) {
        throw std::invalid_argument("beamsplitter needs two distinct modes");
    }
    double t = std::sqrt(transmittance);
    double r = std::sqrt(1.0 - transmittance);
    Matrix s = Matrix::Identity(2 * n_modes, 2 * n_modes);
    for (int q = 0; q < 2; ++q) {
        int a = 2 * mode_i + q;
        int b = 2 * mode_j + q;
        s(a, a) = t;
        s(a, b) = r;
        s(b, a) = -r;
        s(b, b) = t;
    }
    return SymplecticOp(std::move(s));
}

SymplecticOp phase_rotation(double phi, int n_modes, int mode) {
    check_finite(phi, "rotation angle");
    check_mode(n_modes, mode);
    Matrix s = Matrix::Identity(2 * n_modes, 2 * n_modes);
    double c = std::cos(phi);
    double sn = std::sin(phi);
    int x = 2 * mode, p = x + 1;
    s(x, x) = c;
    s(x, p) = sn;
    s(p, x) = -sn;
    s(p, p) = c;
    return SymplecticOp(std::move(s));
}

SymplecticOp displacement(const Vector& d) {
    if (d.size() == 0 || d.size() % 2 != 0) {
        throw std::invalid_argument("displacement must have even, non-zero length");
    }
    return SymplecticOp(Matrix::Identity(d.size(), d.size()), d);
}

GaussianState loss_channel(const GaussianState& state, int mode, double efficiency) {
    if (!(efficiency >= 0.0 && efficiency <= 1.0)) {
        throw std::invalid_argument("loss efficiency must lie in [0, 1]");
    }
    check_mode(state.n_modes(), mode);
    Vector scale = Vector::Ones(2 * state.n_modes());
    scale(2 * mode) = std::sqrt(efficiency);
    scale(2 * mode + 1) = std::sqrt(efficiency);
    Matrix cov = scale.asDiagonal() * state.cov() * scale.asDiagonal();
    cov(2 * mode, 2 * mode) += 1.0 - efficiency;
    cov(2 * mode + 1, 2 * mode + 1) += 1.0 - efficiency;
    return GaussianState(scale.asDiagonal() * state.mean(), std::move(cov));
}

Vector quadrature_vector(int n_modes, int mode, double angle) {
    check_mode(n_modes, mode);
    check_finite(angle, "homodyne angle");
    Vector c = Vector::Zero(2 * n_modes);
    c(2 * mode) = std::cos(angle);
    c(2 * mode + 1) = std::sin(angle);
    return c;
}

double homodyne_variance(const GaussianState& state, int mode, double angle) {
    return joint_variance(state, quadrature_vector(state.n_modes(), mode, angle));
}

double joint_variance(const GaussianState& state, const Vector& coefficients) {
    if (coefficients.size() != state.cov().rows()) {
        throw std::invalid_argument("coefficient vector length does not match state dimension");
    }
    if (coefficients.isZero(0.0)) {
        throw std::invalid_argument("coefficient vector must be non-zero");
    }
    return coefficients.dot(state.cov() * coefficients);
}

Matrix sample_oracle(const GaussianState& state, std::size_t n_samples, std::uint64_t seed) {
    Eigen::LLT<Matrix> llt(state.cov());
    if (llt.info() != Eigen::Success) {
        throw std::domain_error("Cholesky factorization of the covariance failed");
    }
    const Matrix l = llt.matrixL();
    const Eigen::Index dim = state.cov().rows();

    boost::random::mt19937_64 engine(seed);
    boost::random::normal_distribution<double> normal;

    // Column-major n x dim; draw row by row so the stream order is fixed.
    Matrix z(static_cast<Eigen::Index>(n_samples), dim);
    for (Eigen::Index row = 0; row < z.rows(); ++row) {
        for (Eigen::Index col = 0; col < dim; ++col) {
            z(row, col) = normal(engine);
        }
    }
    Matrix samples = z * l.transpose();
    samples.rowwise() += state.mean().transpose();
    return samples;
}

SampleVariance sample_joint_variance(const Matrix& samples, const Vector& coefficients) {
    if (coefficients.size() != samples.cols()) {
        throw std::invalid_argument("coefficient vector length does not match sample dimension");
    }
    if (samples.rows() < 2) {
        throw std::invalid_argument("need at least two samples");
    }
    Vector y = samples * coefficients;
    double n = static_cast<double>(y.size());
    double mean = y.mean();
    double var = (y.array() - mean).square().sum() / (n - 1.0);
    return {var, var * std::sqrt(2.0 / (n - 1.0))};
}

}  // namespace twocolor::gaussian
