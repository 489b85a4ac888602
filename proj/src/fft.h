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

#ifndef TWOCOLOR_SRC_FFT_H
#define TWOCOLOR_SRC_FFT_H

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <type_traits>

#include <fftw3.h>

namespace twocolor::internal {

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

struct FftwPlanDestroy {
    void operator()(fftw_plan p) const { fftw_destroy_plan(p); }
};

using FftwPlan = std::unique_ptr<std::remove_pointer_t<fftw_plan>, FftwPlanDestroy>;

/// Real-to-complex FFT of fixed length n, n/2+1 output bins. FFTW_ESTIMATE
/// keeps the plan (and hence rounding) independent of timing.
class RealFft {
 public:
    explicit RealFft(std::size_t n)
        : n_(n),
          in_(static_cast<double*>(fftw_malloc(sizeof(double) * n))),
          out_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)))),
          plan_(fftw_plan_dft_r2c_1d(static_cast<int>(n), in_.get(), out_.get(), FFTW_ESTIMATE)) {}

    std::span<double> input() { return {in_.get(), n_}; }
    std::span<const std::complex<double>> output() const {
        return {reinterpret_cast<const std::complex<double>*>(out_.get()), n_ / 2 + 1};
    }
    void execute() { fftw_execute(plan_.get()); }
    std::size_t size() const { return n_; }

 private:
    std::size_t n_;
    std::unique_ptr<double, FftwFree> in_;
    std::unique_ptr<fftw_complex, FftwFree> out_;
    FftwPlan plan_;
};

/// Complex-to-real inverse FFT of length n (unnormalized).
class InverseRealFft {
 public:
    explicit InverseRealFft(std::size_t n)
        : n_(n),
          in_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)))),
          out_(static_cast<double*>(fftw_malloc(sizeof(double) * n))),
          plan_(fftw_plan_dft_c2r_1d(static_cast<int>(n), in_.get(), out_.get(), FFTW_ESTIMATE)) {}

    std::span<std::complex<double>> input() {
        return {reinterpret_cast<std::complex<double>*>(in_.get()), n_ / 2 + 1};
    }
    std::span<const double> output() const { return {out_.get(), n_}; }
    // c2r destroys its input.
    void execute() { fftw_execute(plan_.get()); }
    std::size_t size() const { return n_; }

 private:
    std::size_t n_;
    std::unique_ptr<fftw_complex, FftwFree> in_;
    std::unique_ptr<double, FftwFree> out_;
    FftwPlan plan_;
};

/// Complex backward FFT of length n, sum_k X_k e^{+2 pi i k j / n} (unnormalized).
class InverseComplexFft {
 public:
    explicit InverseComplexFft(std::size_t n)
        : n_(n),
          in_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))),
          out_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))),
          plan_(fftw_plan_dft_1d(static_cast<int>(n), in_.get(), out_.get(), FFTW_BACKWARD, FFTW_ESTIMATE)) {}

    std::span<std::complex<double>> input() { return {reinterpret_cast<std::complex<double>*>(in_.get()), n_}; }
    std::span<const std::complex<double>> output() const {
        return {reinterpret_cast<const std::complex<double>*>(out_.get()), n_};
    }
    void execute() { fftw_execute(plan_.get()); }
    std::size_t size() const { return n_; }

 private:
    std::size_t n_;
    std::unique_ptr<fftw_complex, FftwFree> in_;
    std::unique_ptr<fftw_complex, FftwFree> out_;
    FftwPlan plan_;
};

}  // namespace twocolor::internal

#endif  // TWOCOLOR_SRC_FFT_H
