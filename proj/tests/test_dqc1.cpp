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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qmkl/dqc1.hpp"
#include "qmkl/encoding.hpp"

namespace qmkl {
namespace {

constexpr double kPi = std::numbers::pi;

DiagonalMixedState random_state(int n, std::mt19937_64& g) {
    std::uniform_real_distribution<double> u;
    std::vector<double> w(std::size_t{1} << n);
    double s = 0.0;
    for (auto& v : w) s += (v = u(g));
    for (auto& v : w) v /= s;
    return DiagonalMixedState(w);
}

std::vector<double> random_x(int n, std::mt19937_64& g) {
    std::uniform_real_distribution<double> u(0.0, 2 * kPi);
    std::vector<double> x(n);
    for (auto& v : x) v = u(g);
    return x;
}

TEST(ExactKernelTrace, SameUnitaryGivesOne) {
    std::mt19937_64 g(1);
    for (int n = 1; n <= 4; ++n) {
        const auto u = feature_unitary(random_x(n, g), EncodingPattern::chain(n), 2);
        const auto t = exact_kernel_trace(random_state(n, g), u, u);
        EXPECT_NEAR(t.real(), 1.0, 1e-12);
        EXPECT_NEAR(t.imag(), 0.0, 1e-12);
    }
}

TEST(ExactKernelTrace, OneQubitClosedForm) {
    // For n = 1, D = 1: U(x) = diag(e^{ix}, e^{-ix}) H, so <m|U(a)^dag U(b)|m> = cos(b - a).
    const auto p = EncodingPattern::singletons(1);
    const std::vector<double> xi{0.0};
    const std::vector<double> xj{kPi / 2};
    const auto ui = feature_unitary(xi, p, 1);
    const auto uj = feature_unitary(xj, p, 1);
    EXPECT_LT(std::abs(exact_kernel_trace(DiagonalMixedState::basis(1, 0), ui, uj)), 1e-12);
    const std::vector<double> a{0.3};
    const std::vector<double> b{1.4};
    const auto ua = feature_unitary(a, p, 1);
    const auto ub = feature_unitary(b, p, 1);
    for (const auto& rho : {DiagonalMixedState::basis(1, 0), DiagonalMixedState::fully_mixed(1)}) {
        const auto t = exact_kernel_trace(rho, ua, ub);
        EXPECT_NEAR(t.real(), std::cos(1.1), 1e-12);
        EXPECT_NEAR(t.imag(), 0.0, 1e-12);
    }
}

TEST(ExactKernelTrace, HermitianSymmetry) {
    std::mt19937_64 g(2);
    const auto p = EncodingPattern::chain(3);
    for (int trial = 0; trial < 20; ++trial) {
        const auto ui = feature_unitary(random_x(3, g), p, 2);
        const auto uj = feature_unitary(random_x(3, g), p, 2);
        const auto rho = random_state(3, g);
        EXPECT_LT(std::abs(exact_kernel_trace(rho, ui, uj) - std::conj(exact_kernel_trace(rho, uj, ui))), 1e-12);
    }
}

TEST(ExactKernelTrace, MatchesWeightedStatevectorOverlaps) {
    std::mt19937_64 g(3);
    const auto p = EncodingPattern::chain(2);
    for (int trial = 0; trial < 50; ++trial) {
        const auto ui = feature_unitary(random_x(2, g), p, 2);
        const auto uj = feature_unitary(random_x(2, g), p, 2);
        const auto rho = random_state(2, g);
        Complex ref{};
        for (std::size_t m = 0; m < 4; ++m) ref += rho.weights()[m] * inner_product(apply_to_basis(ui, m), apply_to_basis(uj, m));
        EXPECT_LT(std::abs(exact_kernel_trace(rho, ui, uj) - ref), 1e-10);
        // Same quantity through the full operator product.
        EXPECT_LT(std::abs(trace_against_state(rho, ui.adjoint() * uj) - ref), 1e-10);
    }
}

TEST(ExactKernelTrace, ShapeMismatch) {
    EXPECT_THROW(exact_kernel_trace(DiagonalMixedState::fully_mixed(1), ComplexMatrix::identity(2), ComplexMatrix::identity(4)),
                 ShapeError);
}

TEST(ShotEstimate, PerfectOverlapGivesExactRealPart) {
    for (std::uint64_t shots : {2U, 3U, 101U, 10000U}) {
        const auto e = sample_trace(Complex(1.0, 0.0), shots, 42);
        EXPECT_EQ(e.value.real(), 1.0);
        EXPECT_EQ(e.shots_x, (shots + 1) / 2);
        EXPECT_EQ(e.shots_y, shots / 2);
        EXPECT_EQ(e.mode, EstimationMode::Shots);
    }
}

TEST(ShotEstimate, MillionShotsNearZero) {
    // Seed 2026 is the documented seed for this check.
    const auto e = sample_trace(Complex(0.0, 0.0), 1'000'000, 2026);
    EXPECT_LT(std::abs(e.value), 0.005);
}

TEST(ShotEstimate, SignConventionOfImaginaryPart) {
    const auto e = sample_trace(Complex(0.0, 0.8), 200'000, 5);
    EXPECT_NEAR(e.value.imag(), 0.8, 0.01);
    EXPECT_NEAR(e.value.real(), 0.0, 0.01);
    const auto f = sample_trace(Complex(-0.6, -0.3), 200'000, 6);
    EXPECT_NEAR(f.value.real(), -0.6, 0.01);
    EXPECT_NEAR(f.value.imag(), -0.3, 0.01);
}

TEST(ShotEstimate, DeterministicPerSeed) {
    const auto a = sample_trace(Complex(0.3, -0.2), 999, 77);
    const auto b = sample_trace(Complex(0.3, -0.2), 999, 77);
    const auto c = sample_trace(Complex(0.3, -0.2), 999, 78);
    EXPECT_EQ(a.value, b.value);
    EXPECT_NE(a.value, c.value);
}

TEST(ShotEstimate, ComponentsStayInRange) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto e = sample_trace(Complex(0.9, -0.9), 4, seed);
        EXPECT_LE(std::abs(e.value.real()), 1.0);
        EXPECT_LE(std::abs(e.value.imag()), 1.0);
    }
}

TEST(ShotEstimate, RejectsTooFewShots) {
    EXPECT_THROW(sample_trace(Complex(0.0), 1, 0), ParameterError);
    const auto u = ComplexMatrix::identity(2);
    EXPECT_THROW(shot_estimate_trace(DiagonalMixedState::fully_mixed(1), u, u, 0, 0), ParameterError);
}

TEST(ShotEstimate, UnbiasedOverManySeeds) {
    const Complex t(0.37, -0.52);
    Complex mean{};
    const int trials = 400;
    for (int s = 0; s < trials; ++s) mean += sample_trace(t, 2000, static_cast<std::uint64_t>(s)).value;
    mean /= static_cast<double>(trials);
    // Standard error per component is below 0.0015 here.
    EXPECT_LT(std::abs(mean.real() - t.real()), 0.006);
    EXPECT_LT(std::abs(mean.imag() - t.imag()), 0.006);
}

TEST(ShotsForAccuracy, Examples) {
    const auto a = shots_for_accuracy(0.05, 0.01);
    EXPECT_EQ(a.per_quadrature, static_cast<std::uint64_t>(std::ceil(std::log(200.0) / 0.005)));
    EXPECT_EQ(a.per_quadrature, 1060U);
    EXPECT_EQ(a.total, 2120U);
    EXPECT_EQ(shots_for_accuracy(0.5, 0.5).per_quadrature, 3U);
}

TEST(ShotsForAccuracy, HalvingEpsilonQuadruples) {
    for (double eps : {0.2, 0.1, 0.05, 0.02}) {
        const double a = static_cast<double>(shots_for_accuracy(eps, 0.05).per_quadrature);
        const double b = static_cast<double>(shots_for_accuracy(eps / 2, 0.05).per_quadrature);
        EXPECT_NEAR(b / a, 4.0, 4.0 / a + 0.01);
    }
}

TEST(ShotsForAccuracy, RejectsOutOfRange) {
    EXPECT_THROW(shots_for_accuracy(0.0, 0.1), ParameterError);
    EXPECT_THROW(shots_for_accuracy(0.1, 1.0), ParameterError);
    EXPECT_THROW(shots_for_accuracy(1.5, 0.1), ParameterError);
}

// Hoeffding for a mean of n variables in [-1, 1]: P(|err| > eps) <= 2 exp(-n eps^2 / 2).
// With delta/2 per component this needs n = 2 ln(4/delta) / eps^2 draws per quadrature.
TEST(ShotEstimate, CalibratedWithRangeCorrectBudget) {
    const double eps = 0.05;
    const double delta = 0.01;
    const auto per = static_cast<std::uint64_t>(std::ceil(2.0 * std::log(4.0 / delta) / (eps * eps)));
    const Complex t(0.1, -0.05);
    int bad = 0;
    const int trials = 1000;
    for (int s = 0; s < trials; ++s) {
        const auto e = sample_trace(t, 2 * per, derive_seed(99, {static_cast<std::uint64_t>(s)}));
        if (std::abs(e.value.real() - t.real()) > eps || std::abs(e.value.imag() - t.imag()) > eps) ++bad;
    }
    EXPECT_LE(static_cast<double>(bad) / trials, delta);
}

}  // namespace
}  // namespace qmkl
