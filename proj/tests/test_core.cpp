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

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <random>

#include "qmkl/core.hpp"

namespace qmkl {
namespace {

Eigen::MatrixXcd to_eigen(const ComplexMatrix& m) {
    Eigen::MatrixXcd e(m.dim(), m.dim());
    for (std::size_t r = 0; r < m.dim(); ++r)
        for (std::size_t c = 0; c < m.dim(); ++c) e(r, c) = m(r, c);
    return e;
}

ComplexMatrix random_matrix(std::size_t dim, std::mt19937_64& g) {
    std::normal_distribution<double> n;
    ComplexMatrix m(dim);
    for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c) m(r, c) = Complex(n(g), n(g));
    return m;
}

ComplexMatrix random_unitary(std::size_t dim, std::mt19937_64& g) {
    const Eigen::MatrixXcd q = Eigen::HouseholderQR<Eigen::MatrixXcd>(to_eigen(random_matrix(dim, g))).householderQ();
    ComplexMatrix u(dim);
    for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c) u(r, c) = q(r, c);
    return u;
}

TEST(ComplexMatrix, RejectsNonPowerOfTwo) {
    EXPECT_THROW(ComplexMatrix(3), ShapeError);
    EXPECT_THROW(ComplexMatrix(1), ShapeError);
    EXPECT_THROW(ComplexMatrix(2, std::vector<Complex>(3)), ShapeError);
}

TEST(ComplexMatrix, ProductMatchesEigen) {
    std::mt19937_64 g(7);
    const auto a = random_matrix(8, g);
    const auto b = random_matrix(8, g);
    const Eigen::MatrixXcd ref = to_eigen(a) * to_eigen(b);
    EXPECT_LT((to_eigen(a * b) - ref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Kron, IdentityTimesIdentity) {
    EXPECT_EQ(kron(ComplexMatrix::identity(2), ComplexMatrix::identity(2)), ComplexMatrix::identity(4));
}

TEST(Kron, FirstFactorIsMostSignificant) {
    const auto zi = kron(gates::pauli_z(), ComplexMatrix::identity(2));
    const std::vector<Complex> d{1.0, 1.0, -1.0, -1.0};
    EXPECT_EQ(zi, ComplexMatrix::diagonal(d));
}

TEST(Kron, HadamardPairGivesUniformAmplitudes) {
    const auto s = apply_to_basis(kron(gates::hadamard(), gates::hadamard()), 0);
    for (const auto& a : s.amplitudes) EXPECT_NEAR(std::abs(a - Complex(0.5)), 0.0, 1e-15);
}

TEST(Kron, MatchesEigenKroneckerProduct) {
    std::mt19937_64 g(11);
    const auto a = random_matrix(4, g);
    const auto b = random_matrix(2, g);
    const Eigen::MatrixXcd ref = Eigen::kroneckerProduct(to_eigen(a), to_eigen(b));
    EXPECT_LT((to_eigen(kron(a, b)) - ref).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Kron, Associative) {
    std::mt19937_64 g(3);
    const auto a = random_matrix(2, g);
    const auto b = random_matrix(4, g);
    const auto c = random_matrix(2, g);
    EXPECT_LT(max_abs_diff(kron(kron(a, b), c), kron(a, kron(b, c))), 1e-12);
}

TEST(Kron, CapacityLimit) {
    const auto a = ComplexMatrix::identity(32);
    EXPECT_THROW(kron(a, a, 9), CapacityError);
    EXPECT_NO_THROW(kron(a, a, 10));
    EXPECT_THROW(kron(kron(a, a), ComplexMatrix::identity(2)), CapacityError);
}

TEST(ApplyToBasis, IdentityColumn) {
    const auto s = apply_to_basis(ComplexMatrix::identity(4), 2);
    const std::vector<Complex> e2{0.0, 0.0, 1.0, 0.0};
    EXPECT_EQ(s.amplitudes, e2);
}

TEST(ApplyToBasis, HadamardAndPauliX) {
    const auto h = apply_to_basis(gates::hadamard(), 0);
    EXPECT_DOUBLE_EQ(h.amplitudes[0].real(), 1.0 / std::sqrt(2.0));
    EXPECT_DOUBLE_EQ(h.amplitudes[1].real(), 1.0 / std::sqrt(2.0));
    const auto x = apply_to_basis(gates::pauli_x(), 0);
    const std::vector<Complex> e1{0.0, 1.0};
    EXPECT_EQ(x.amplitudes, e1);
}

TEST(ApplyToBasis, OutOfRange) {
    EXPECT_THROW(apply_to_basis(ComplexMatrix::identity(4), 4), IndexError);
}

TEST(ApplyToBasis, ColumnOfUnitaryHasUnitNorm) {
    std::mt19937_64 g(5);
    const auto u = random_unitary(16, g);
    for (std::size_t m = 0; m < 16; ++m) {
        const auto s = apply_to_basis(u, m);
        EXPECT_NEAR(s.norm(), 1.0, 1e-10);
        for (std::size_t r = 0; r < 16; ++r) EXPECT_EQ(s.amplitudes[r], u(r, m));
    }
}

TEST(DiagonalMixedState, Validation) {
    EXPECT_THROW(DiagonalMixedState({0.5, 0.6}), ParameterError);
    EXPECT_THROW(DiagonalMixedState({1.2, -0.2}), ParameterError);
    EXPECT_THROW(DiagonalMixedState({0.5, 0.25, 0.25}), ShapeError);
    EXPECT_NO_THROW(DiagonalMixedState({0.25, 0.75}));
    EXPECT_TRUE(DiagonalMixedState::basis(2, 3).is_pure());
    EXPECT_FALSE(DiagonalMixedState::fully_mixed(2).is_pure());
    EXPECT_TRUE(DiagonalMixedState::fully_mixed(3).is_uniform());
}

TEST(DiagonalMixedState, ProductOfQubitsUsesLsbFirst) {
    const std::vector<double> p0{1.0, 0.0};  // qubit 1 in |0>, qubit 2 in |1>
    const auto s = DiagonalMixedState::product_of_qubits(p0);
    EXPECT_DOUBLE_EQ(s.weights()[2], 1.0);
}

TEST(TraceAgainstState, Examples) {
    const auto mixed = DiagonalMixedState::fully_mixed(1);
    EXPECT_EQ(trace_against_state(mixed, ComplexMatrix::identity(2)), Complex(1.0));
    EXPECT_EQ(trace_against_state(mixed, gates::pauli_z()), Complex(0.0));
    const std::vector<Complex> d{Complex(0, 1), Complex(0, -1)};
    const auto t = trace_against_state(DiagonalMixedState({0.25, 0.75}), ComplexMatrix::diagonal(d));
    EXPECT_NEAR(std::abs(t - Complex(0, -0.5)), 0.0, 1e-15);
}

TEST(TraceAgainstState, ShapeMismatch) {
    EXPECT_THROW(trace_against_state(DiagonalMixedState::fully_mixed(1), ComplexMatrix::identity(4)), ShapeError);
}

TEST(TraceAgainstState, BoundedForUnitaries) {
    std::mt19937_64 g(9);
    std::uniform_real_distribution<double> u01;
    for (int trial = 0; trial < 50; ++trial) {
        const auto u = random_unitary(8, g);
        std::vector<double> w(8);
        double s = 0.0;
        for (auto& v : w) s += (v = u01(g));
        for (auto& v : w) v /= s;
        EXPECT_LE(std::abs(trace_against_state(DiagonalMixedState(w), u)), 1.0 + 1e-12);
    }
}

TEST(Tensor, HighFactorOnMostSignificantBits) {
    const auto t = tensor(DiagonalMixedState::basis(1, 1), DiagonalMixedState::basis(1, 0));
    EXPECT_EQ(t.weights()[2], 1.0);
}

}  // namespace
}  // namespace qmkl
