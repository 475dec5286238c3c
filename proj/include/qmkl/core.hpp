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

// Dense complex linear algebra for small qubit registers.
//
// Basis-index convention: qubit k (1-based) is bit k-1 of the basis index, so
// qubit 1 is the least significant. In kron(a, b) the first factor occupies
// the most significant qubits.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qmkl/errors.hpp"

namespace qmkl {

using Complex = std::complex<double>;

inline constexpr int kDefaultMaxQubits = 10;

inline bool is_power_of_two(std::size_t v) { return v != 0 && std::has_single_bit(v); }

inline int qubits_for_dim(std::size_t dim) { return static_cast<int>(std::countr_zero(dim)); }

/// Square 2^n x 2^n complex matrix in row-major order.
class ComplexMatrix {
public:
    explicit ComplexMatrix(std::size_t dim) : dim_(checked_dim(dim)), entries_(dim * dim) {}

    ComplexMatrix(std::size_t dim, std::vector<Complex> entries)
        : dim_(checked_dim(dim)), entries_(std::move(entries)) {
        if (entries_.size() != dim_ * dim_) {
            throw ShapeError("ComplexMatrix: expected " + std::to_string(dim_ * dim_) +
                             " entries, got " + std::to_string(entries_.size()));
        }
    }

    static ComplexMatrix identity(std::size_t dim) {
        ComplexMatrix m(dim);
        for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
        return m;
    }

    static ComplexMatrix diagonal(std::span<const Complex> diag) {
        ComplexMatrix m(diag.size());
        for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
        return m;
    }

    std::size_t dim() const { return dim_; }
    int num_qubits() const { return qubits_for_dim(dim_); }

    Complex& operator()(std::size_t row, std::size_t col) { return entries_[row * dim_ + col]; }
    const Complex& operator()(std::size_t row, std::size_t col) const {
        return entries_[row * dim_ + col];
    }

    std::span<const Complex> entries() const { return entries_; }

    ComplexMatrix adjoint() const {
        ComplexMatrix out(dim_);
        for (std::size_t r = 0; r < dim_; ++r)
            for (std::size_t c = 0; c < dim_; ++c) out(c, r) = std::conj((*this)(r, c));
        return out;
    }

    friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
        if (a.dim_ != b.dim_) {
            throw ShapeError("matrix product: dimension mismatch " + std::to_string(a.dim_) +
                             " vs " + std::to_string(b.dim_));
        }
        const std::size_t n = a.dim_;
        ComplexMatrix out(n);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t k = 0; k < n; ++k) {
                const Complex ark = a(r, k);
                if (ark == Complex{}) continue;
                for (std::size_t c = 0; c < n; ++c) out(r, c) += ark * b(k, c);
            }
        }
        return out;
    }

    friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

private:
    static std::size_t checked_dim(std::size_t dim) {
        if (!is_power_of_two(dim) || dim < 2) {
            throw ShapeError("ComplexMatrix: dimension " + std::to_string(dim) +
                             " is not a power of two >= 2");
        }
        return dim;
    }

    std::size_t dim_;
    std::vector<Complex> entries_;
};

/// Largest entrywise modulus of a - b.
inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.dim() != b.dim()) throw ShapeError("max_abs_diff: dimension mismatch");
    double worst = 0.0;
    auto ea = a.entries();
    auto eb = b.entries();
    for (std::size_t i = 0; i < ea.size(); ++i) worst = std::max(worst, std::abs(ea[i] - eb[i]));
    return worst;
}

/// ||u^dagger u - I||_max
inline double unitarity_defect(const ComplexMatrix& u) {
    return max_abs_diff(u.adjoint() * u, ComplexMatrix::identity(u.dim()));
}

namespace gates {

inline ComplexMatrix pauli_x() { return ComplexMatrix(2, {0.0, 1.0, 1.0, 0.0}); }
inline ComplexMatrix pauli_y() { return ComplexMatrix(2, {0.0, Complex(0, -1), Complex(0, 1), 0.0}); }
inline ComplexMatrix pauli_z() { return ComplexMatrix(2, {1.0, 0.0, 0.0, -1.0}); }
inline ComplexMatrix hadamard() {
    const double s = 1.0 / std::sqrt(2.0);
    return ComplexMatrix(2, {s, s, s, -s});
}

}  // namespace gates

struct StateVector {
    std::vector<Complex> amplitudes;

    std::size_t dim() const { return amplitudes.size(); }

    double norm() const {
        double s = 0.0;
        for (const auto& a : amplitudes) s += std::norm(a);
        return std::sqrt(s);
    }
};

/// <a|b>, conjugate-linear in the first argument.
inline Complex inner_product(const StateVector& a, const StateVector& b) {
    if (a.dim() != b.dim()) throw ShapeError("inner_product: dimension mismatch");
    Complex s{};
    for (std::size_t i = 0; i < a.dim(); ++i) s += std::conj(a.amplitudes[i]) * b.amplitudes[i];
    return s;
}

/// Register state sum_m w_m |m><m| with w on the probability simplex.
class DiagonalMixedState {
public:
    static constexpr double kNormTolerance = 1e-12;

    explicit DiagonalMixedState(std::vector<double> weights) : weights_(std::move(weights)) {
        if (!is_power_of_two(weights_.size()) || weights_.size() < 2) {
            throw ShapeError("DiagonalMixedState: weight count " + std::to_string(weights_.size()) +
                             " is not a power of two >= 2");
        }
        double total = 0.0;
        for (double w : weights_) {
            if (!(w >= 0.0) || !std::isfinite(w)) {
                throw ParameterError("DiagonalMixedState: weights must be finite and non-negative");
            }
            total += w;
        }
        if (std::abs(total - 1.0) > kNormTolerance) {
            throw ParameterError("DiagonalMixedState: weights sum to " + std::to_string(total) +
                                 ", expected 1");
        }
    }

    static DiagonalMixedState basis(int num_qubits, std::size_t index = 0) {
        const std::size_t dim = std::size_t{1} << num_qubits;
        if (index >= dim) throw IndexError("DiagonalMixedState::basis: index out of range");
        std::vector<double> w(dim, 0.0);
        w[index] = 1.0;
        return DiagonalMixedState(std::move(w));
    }

    static DiagonalMixedState fully_mixed(int num_qubits) {
        const std::size_t dim = std::size_t{1} << num_qubits;
        return DiagonalMixedState(std::vector<double>(dim, 1.0 / static_cast<double>(dim)));
    }

    /// Product of single-qubit diagonal states diag(p_k, 1 - p_k); p[0] is qubit 1.
    static DiagonalMixedState product_of_qubits(std::span<const double> p_zero) {
        if (p_zero.empty()) throw ParameterError("product_of_qubits: need at least one qubit");
        const std::size_t dim = std::size_t{1} << p_zero.size();
        std::vector<double> w(dim, 1.0);
        for (std::size_t m = 0; m < dim; ++m) {
            for (std::size_t k = 0; k < p_zero.size(); ++k) {
                w[m] *= ((m >> k) & 1U) ? 1.0 - p_zero[k] : p_zero[k];
            }
        }
        return DiagonalMixedState(std::move(w));
    }

    std::size_t dim() const { return weights_.size(); }
    int num_qubits() const { return qubits_for_dim(weights_.size()); }
    std::span<const double> weights() const { return weights_; }

    bool is_pure() const {
        return std::count(weights_.begin(), weights_.end(), 1.0) == 1;
    }

    bool is_uniform() const {
        const double u = 1.0 / static_cast<double>(weights_.size());
        return std::all_of(weights_.begin(), weights_.end(), [u](double w) { return w == u; });
    }

    friend bool operator==(const DiagonalMixedState&, const DiagonalMixedState&) = default;

private:
    std::vector<double> weights_;
};

/// rho_hi (x) rho_lo, with rho_hi on the most significant qubits.
inline DiagonalMixedState tensor(const DiagonalMixedState& hi, const DiagonalMixedState& lo) {
    std::vector<double> w(hi.dim() * lo.dim());
    for (std::size_t a = 0; a < hi.dim(); ++a)
        for (std::size_t b = 0; b < lo.dim(); ++b) w[a * lo.dim() + b] = hi.weights()[a] * lo.weights()[b];
    // Products of normalised weights can drift by an ulp; renormalise exactly.
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& v : w) v /= total;
    return DiagonalMixedState(std::move(w));
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b,
                          int max_qubits = kDefaultMaxQubits) {
    if (a.num_qubits() + b.num_qubits() > max_qubits) {
        throw CapacityError("kron: result would have " +
                            std::to_string(a.num_qubits() + b.num_qubits()) +
                            " qubits, limit is " + std::to_string(max_qubits));
    }
    const std::size_t da = a.dim();
    const std::size_t db = b.dim();
    ComplexMatrix out(da * db);
    for (std::size_t ra = 0; ra < da; ++ra)
        for (std::size_t ca = 0; ca < da; ++ca) {
            const Complex v = a(ra, ca);
            for (std::size_t rb = 0; rb < db; ++rb)
                for (std::size_t cb = 0; cb < db; ++cb) out(ra * db + rb, ca * db + cb) = v * b(rb, cb);
        }
    return out;
}

/// u|m>, i.e. column m of u.
inline StateVector apply_to_basis(const ComplexMatrix& u, std::size_t m) {
    if (m >= u.dim()) {
        throw IndexError("apply_to_basis: basis index " + std::to_string(m) + " out of range for dim " +
                         std::to_string(u.dim()));
    }
    StateVector out;
    out.amplitudes.resize(u.dim());
    for (std::size_t r = 0; r < u.dim(); ++r) out.amplitudes[r] = u(r, m);
    return out;
}

/// tr(rho u) = sum_m w_m u_mm.
inline Complex trace_against_state(const DiagonalMixedState& rho, const ComplexMatrix& u) {
    if (rho.dim() != u.dim()) {
        throw ShapeError("trace_against_state: state dim " + std::to_string(rho.dim()) +
                         " vs operator dim " + std::to_string(u.dim()));
    }
    Complex s{};
    for (std::size_t m = 0; m < rho.dim(); ++m) {
        if (rho.weights()[m] != 0.0) s += rho.weights()[m] * u(m, m);
    }
    return s;
}

}  // namespace qmkl
