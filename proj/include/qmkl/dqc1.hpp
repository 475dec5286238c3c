// Copyright 2026 The QMKL Authors
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

#pragma once

// One-clean-qubit trace estimation.
//
// The control qubit is not simulated. After the controlled-U_n circuit its
// off-diagonal element is tr(rho_n U_n)/2, so <X> = Re t and <Y> = -Im t,
// which fixes the Bernoulli law of every simulated measurement.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "qmkl/core.hpp"
#include "qmkl/errors.hpp"
#include "qmkl/rng.hpp"

namespace qmkl {

enum class EstimationMode { Exact, Shots };

struct TraceEstimate {
    Complex value{};
    EstimationMode mode = EstimationMode::Exact;
    std::uint64_t shots_x = 0;
    std::uint64_t shots_y = 0;
    std::uint64_t rng_seed = 0;
};

/// sum_m w_m <col_m(u_left), col_m(u_right)> = tr(rho u_left^dagger u_right).
/// Only basis states with non-zero weight are visited.
inline Complex exact_kernel_trace(const DiagonalMixedState& rho, const ComplexMatrix& u_left,
                                  const ComplexMatrix& u_right) {
    if (u_left.dim() != u_right.dim() || rho.dim() != u_left.dim()) {
        throw ShapeError("exact_kernel_trace: dims rho=" + std::to_string(rho.dim()) +
                         " left=" + std::to_string(u_left.dim()) +
                         " right=" + std::to_string(u_right.dim()));
    }
    const std::size_t dim = rho.dim();
    Complex total{};
    for (std::size_t m = 0; m < dim; ++m) {
        const double w = rho.weights()[m];
        if (w == 0.0) continue;
        Complex overlap{};
        for (std::size_t r = 0; r < dim; ++r) overlap += std::conj(u_left(r, m)) * u_right(r, m);
        total += w * overlap;
    }
    return total;
}

namespace detail {

inline void require_shots(std::uint64_t shots) {
    if (shots < 2) {
        throw ParameterError("shot estimation needs at least 2 shots, got " + std::to_string(shots));
    }
}

// Empirical mean of n draws of a +/-1 variable with P(+1) = p.
inline double pm_one_mean(Rng& rng, double p, std::uint64_t n) {
    p = std::clamp(p, 0.0, 1.0);
    std::uint64_t plus = 0;
    for (std::uint64_t k = 0; k < n; ++k) plus += rng.bernoulli(p) ? 1 : 0;
    return (2.0 * static_cast<double>(plus) - static_cast<double>(n)) / static_cast<double>(n);
}

}  // namespace detail

/// Simulates control-qubit measurements for a known trace value t.
/// ceil(shots/2) draws go to the X basis and floor(shots/2) to the Y basis.
inline TraceEstimate sample_trace(Complex exact, std::uint64_t shots, std::uint64_t seed) {
    detail::require_shots(shots);
    const std::uint64_t nx = (shots + 1) / 2;
    const std::uint64_t ny = shots / 2;
    Rng rng(seed);
    const double mean_x = detail::pm_one_mean(rng, 0.5 * (1.0 + exact.real()), nx);
    const double mean_y = detail::pm_one_mean(rng, 0.5 * (1.0 - exact.imag()), ny);
    return {Complex(mean_x, -mean_y), EstimationMode::Shots, nx, ny, seed};
}

inline TraceEstimate shot_estimate_trace(const DiagonalMixedState& rho, const ComplexMatrix& u_left,
                                         const ComplexMatrix& u_right, std::uint64_t shots,
                                         std::uint64_t seed) {
    detail::require_shots(shots);
    return sample_trace(exact_kernel_trace(rho, u_left, u_right), shots, seed);
}

struct ShotBudget {
    std::uint64_t per_quadrature = 0;
    std::uint64_t total = 0;
};

/// ceil(ln(2/delta) / (2 eps^2)) shots per quadrature. This is the two-sided
/// Hoeffding count for a [0, 1]-valued mean; the +/-1 outcomes here have range
/// 2, so a guarantee at (eps, delta) needs 2 ln(4/delta) / eps^2 per quadrature.
inline ShotBudget shots_for_accuracy(double epsilon, double delta) {
    if (!(epsilon > 0.0 && epsilon < 1.0) || !(delta > 0.0 && delta < 1.0)) {
        throw ParameterError("shots_for_accuracy: need 0 < epsilon < 1 and 0 < delta < 1");
    }
    const auto per = static_cast<std::uint64_t>(std::ceil(std::log(2.0 / delta) / (2.0 * epsilon * epsilon)));
    return {per, 2 * per};
}

}  // namespace qmkl
