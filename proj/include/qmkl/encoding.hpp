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

// Data-encoding unitaries built from diagonal Z-string blocks.

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "qmkl/core.hpp"
#include "qmkl/errors.hpp"

namespace qmkl {

/// g_C for a subset C: x_u for singletons, prod_{u in C} (pi - x_u) otherwise.
enum class EncodingFunction { Linear, PiProduct };

/// Family of qubit subsets C whose Z-strings appear in the encoding block.
/// Subsets hold 1-based qubit indices; qubit k reads feature k-1.
class EncodingPattern {
public:
    EncodingPattern(int num_qubits, std::vector<std::vector<int>> subsets)
        : num_qubits_(num_qubits), subsets_(std::move(subsets)) {
        if (num_qubits_ < 1) throw ParameterError("EncodingPattern: need at least one qubit");
        std::set<std::vector<int>> seen;
        for (auto& c : subsets_) {
            if (c.empty()) throw ParameterError("EncodingPattern: empty subset");
            std::sort(c.begin(), c.end());
            if (std::adjacent_find(c.begin(), c.end()) != c.end()) {
                throw ParameterError("EncodingPattern: repeated qubit inside a subset");
            }
            if (c.front() < 1 || c.back() > num_qubits_) {
                throw ParameterError("EncodingPattern: qubit index outside 1.." +
                                     std::to_string(num_qubits_));
            }
            if (!seen.insert(c).second) throw ParameterError("EncodingPattern: duplicate subset");
        }
        for (int k = 1; k <= num_qubits_; ++k) {
            if (!seen.contains(std::vector<int>{k})) {
                throw ParameterError("EncodingPattern: singleton {" + std::to_string(k) + "} missing");
            }
        }
    }

    /// Singletons plus nearest-neighbour pairs on a line ({1},{2},{1,2} for two qubits).
    static EncodingPattern chain(int num_qubits) {
        std::vector<std::vector<int>> s;
        for (int k = 1; k <= num_qubits; ++k) s.push_back({k});
        for (int k = 1; k < num_qubits; ++k) s.push_back({k, k + 1});
        return EncodingPattern(num_qubits, std::move(s));
    }

    /// Singletons plus every pair.
    static EncodingPattern all_pairs(int num_qubits) {
        std::vector<std::vector<int>> s;
        for (int k = 1; k <= num_qubits; ++k) s.push_back({k});
        for (int a = 1; a <= num_qubits; ++a)
            for (int b = a + 1; b <= num_qubits; ++b) s.push_back({a, b});
        return EncodingPattern(num_qubits, std::move(s));
    }

    /// Singletons only (a product of independent single-qubit maps).
    static EncodingPattern singletons(int num_qubits) {
        std::vector<std::vector<int>> s;
        for (int k = 1; k <= num_qubits; ++k) s.push_back({k});
        return EncodingPattern(num_qubits, std::move(s));
    }

    int num_qubits() const { return num_qubits_; }
    const std::vector<std::vector<int>>& subsets() const { return subsets_; }

    static EncodingFunction function_for(const std::vector<int>& subset) {
        return subset.size() == 1 ? EncodingFunction::Linear : EncodingFunction::PiProduct;
    }

    friend bool operator==(const EncodingPattern&, const EncodingPattern&) = default;

private:
    int num_qubits_;
    std::vector<std::vector<int>> subsets_;
};

enum class RotationAxis { X, Y, Z };

/// Theta_p: one angle vector per encoding block, one angle per qubit of the partition.
struct KernelParameters {
    RotationAxis axis = RotationAxis::Z;
    std::vector<std::vector<double>> blocks;

    bool empty() const { return blocks.empty(); }

    static KernelParameters zeros(int num_qubits, int depth, RotationAxis axis = RotationAxis::Z) {
        return {axis, std::vector<std::vector<double>>(depth, std::vector<double>(num_qubits, 0.0))};
    }

    std::size_t angle_count() const {
        std::size_t n = 0;
        for (const auto& b : blocks) n += b.size();
        return n;
    }

    friend bool operator==(const KernelParameters&, const KernelParameters&) = default;
};

inline double encoding_function(const std::vector<int>& subset, std::span<const double> x) {
    if (subset.size() == 1) return x[subset.front() - 1];
    double g = 1.0;
    for (int k : subset) g *= std::numbers::pi - x[k - 1];
    return g;
}

/// Phase angle of V(x) at every basis index: sum_C g_C(x) prod_{k in C} (-1)^{bit_k(m)}.
inline std::vector<double> encoding_phases(std::span<const double> x, const EncodingPattern& pattern) {
    if (x.size() != static_cast<std::size_t>(pattern.num_qubits())) {
        throw ShapeError("encoding: " + std::to_string(x.size()) + " features for " +
                         std::to_string(pattern.num_qubits()) + " qubits");
    }
    const std::size_t dim = std::size_t{1} << pattern.num_qubits();
    std::vector<double> phase(dim, 0.0);
    for (const auto& c : pattern.subsets()) {
        const double g = encoding_function(c, x);
        std::size_t mask = 0;
        for (int k : c) mask |= std::size_t{1} << (k - 1);
        for (std::size_t m = 0; m < dim; ++m) {
            phase[m] += (std::popcount(m & mask) & 1U) ? -g : g;
        }
    }
    return phase;
}

/// V(x) = exp(i sum_C g_C(x) prod_{k in C} Z_k), returned as a dense diagonal matrix.
inline ComplexMatrix encoding_block(std::span<const double> x, const EncodingPattern& pattern) {
    const auto phase = encoding_phases(x, pattern);
    std::vector<Complex> diag(phase.size());
    for (std::size_t m = 0; m < phase.size(); ++m) diag[m] = std::polar(1.0, phase[m]);
    return ComplexMatrix::diagonal(diag);
}

inline ComplexMatrix hadamard_layer(int num_qubits) {
    ComplexMatrix h = gates::hadamard();
    for (int k = 1; k < num_qubits; ++k) h = kron(gates::hadamard(), h);
    return h;
}

/// e^{i theta W} for a single qubit.
inline ComplexMatrix single_qubit_rotation(double theta, RotationAxis axis) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    switch (axis) {
        case RotationAxis::X:
            return ComplexMatrix(2, {c, Complex(0, s), Complex(0, s), c});
        case RotationAxis::Y:
            return ComplexMatrix(2, {c, s, -s, c});
        case RotationAxis::Z:
        default:
            return ComplexMatrix(2, {Complex(c, s), 0.0, 0.0, Complex(c, -s)});
    }
}

/// Tensor product of per-qubit rotations; angles[0] acts on qubit 1 (least significant).
inline ComplexMatrix rotation_layer(std::span<const double> angles, RotationAxis axis) {
    ComplexMatrix r = single_qubit_rotation(angles[0], axis);
    for (std::size_t k = 1; k < angles.size(); ++k) r = kron(single_qubit_rotation(angles[k], axis), r);
    return r;
}

namespace detail {

inline void require_depth(int depth) {
    if (depth < 1) throw ParameterError("encoding depth must be >= 1, got " + std::to_string(depth));
}

// Left-multiplies `depth` copies of an identical block: block * ... * block.
inline ComplexMatrix repeat_block(const ComplexMatrix& block, int depth) {
    ComplexMatrix u = block;
    for (int d = 1; d < depth; ++d) u = block * u;
    return u;
}

}  // namespace detail

/// U_D(x) = (V(x) H^n)^D.
inline ComplexMatrix feature_unitary(std::span<const double> x, const EncodingPattern& pattern, int depth) {
    detail::require_depth(depth);
    const ComplexMatrix block = encoding_block(x, pattern) * hadamard_layer(pattern.num_qubits());
    return detail::repeat_block(block, depth);
}

/// U_D(x, Theta) = prod_d V(x) U(theta_d) H^n, block d = 1 applied first.
inline ComplexMatrix parameterized_feature_unitary(std::span<const double> x, const KernelParameters& theta,
                                                   const EncodingPattern& pattern, int depth) {
    detail::require_depth(depth);
    if (theta.blocks.size() != static_cast<std::size_t>(depth)) {
        throw ParameterError("parameterized encoding: " + std::to_string(theta.blocks.size()) +
                             " angle vectors for depth " + std::to_string(depth));
    }
    for (const auto& angles : theta.blocks) {
        if (angles.size() != static_cast<std::size_t>(pattern.num_qubits())) {
            throw ParameterError("parameterized encoding: angle vector length " +
                                 std::to_string(angles.size()) + " for " +
                                 std::to_string(pattern.num_qubits()) + " qubits");
        }
    }
    const ComplexMatrix v = encoding_block(x, pattern);
    const ComplexMatrix h = hadamard_layer(pattern.num_qubits());
    auto block = [&](int d) { return (v * rotation_layer(theta.blocks[d], theta.axis)) * h; };

    ComplexMatrix u = block(0);
    for (int d = 1; d < depth; ++d) u = block(d) * u;
    return u;
}

}  // namespace qmkl
