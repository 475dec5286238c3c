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

// Combined quantum kernels and Gram matrices.
//
// The register is split into P contiguous partitions; partitions[0] holds the
// least significant qubits and reads the first features. Each partition p
// carries its own encoding pattern, optional rotation angles Theta_p and
// diagonal initial state rho_p. The kernel is Re(prod_p t_p) with
// t_p = tr(rho_p U_D(x_i, Theta_p)^dagger U_D(x_j, Theta_p)); for P = 1 this is
// the weighted sum of basis-state kernels, for pure partitions the product of
// per-partition kernels.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qmkl/core.hpp"
#include "qmkl/dqc1.hpp"
#include "qmkl/encoding.hpp"
#include "qmkl/errors.hpp"
#include "qmkl/parallel.hpp"
#include "qmkl/rng.hpp"

namespace qmkl {

/// N x p feature rows, one row per sample, features in radians.
using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline std::span<const double> row_of(const FeatureMatrix& x, Eigen::Index i) {
    return {x.data() + i * x.cols(), static_cast<std::size_t>(x.cols())};
}

enum class KernelVariant { SQKL, FixedQMKL, QMKL, Multiplicative, AdditiveMultiplicative };

inline const char* to_string(KernelVariant v) {
    switch (v) {
        case KernelVariant::SQKL: return "sqkl";
        case KernelVariant::FixedQMKL: return "fixed-qmkl";
        case KernelVariant::QMKL: return "qmkl";
        case KernelVariant::Multiplicative: return "multiplicative";
        case KernelVariant::AdditiveMultiplicative: return "additive-multiplicative";
    }
    return "?";
}

inline std::optional<KernelVariant> parse_variant(std::string_view s) {
    for (auto v : {KernelVariant::SQKL, KernelVariant::FixedQMKL, KernelVariant::QMKL,
                   KernelVariant::Multiplicative, KernelVariant::AdditiveMultiplicative}) {
        if (s == to_string(v)) return v;
    }
    return std::nullopt;
}

struct Estimation {
    EstimationMode mode = EstimationMode::Exact;
    std::uint64_t shots = 0;
    std::uint64_t master_seed = 0;

    static Estimation exact() { return {}; }
    static Estimation with_shots(std::uint64_t shots, std::uint64_t master_seed) {
        return {EstimationMode::Shots, shots, master_seed};
    }

    friend bool operator==(const Estimation&, const Estimation&) = default;
};

struct Partition {
    EncodingPattern pattern;
    DiagonalMixedState state;
    KernelParameters theta;  // empty: unparameterized encoding

    int num_qubits() const { return pattern.num_qubits(); }

    friend bool operator==(const Partition&, const Partition&) = default;
};

struct KernelSpec {
    KernelVariant variant = KernelVariant::SQKL;
    int depth = 1;
    std::vector<Partition> partitions;
    Estimation estimation;
    // Initial states are products of per-qubit diagonal states, giving a
    // weight parameterisation linear in the qubit count.
    bool restricted_state = false;

    int num_qubits() const {
        int n = 0;
        for (const auto& p : partitions) n += p.num_qubits();
        return n;
    }

    std::vector<int> partition_sizes() const {
        std::vector<int> s;
        for (const auto& p : partitions) s.push_back(p.num_qubits());
        return s;
    }

    friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

namespace detail {

inline bool all_zero(const KernelParameters& t) {
    for (const auto& b : t.blocks)
        for (double a : b)
            if (a != 0.0) return false;
    return true;
}

}  // namespace detail

/// Throws ConfigError when shapes or variant invariants do not hold.
inline void validate(const KernelSpec& spec) {
    if (spec.depth < 1) throw ConfigError("KernelSpec: depth must be >= 1");
    if (spec.partitions.empty()) throw ConfigError("KernelSpec: no partitions");
    for (std::size_t p = 0; p < spec.partitions.size(); ++p) {
        const auto& part = spec.partitions[p];
        if (part.state.num_qubits() != part.num_qubits()) {
            throw ConfigError("KernelSpec: partition " + std::to_string(p + 1) +
                              " state/pattern qubit count mismatch");
        }
        if (!part.theta.empty()) {
            if (part.theta.blocks.size() != static_cast<std::size_t>(spec.depth)) {
                throw ConfigError("KernelSpec: partition " + std::to_string(p + 1) +
                                  " has " + std::to_string(part.theta.blocks.size()) +
                                  " angle vectors for depth " + std::to_string(spec.depth));
            }
            for (const auto& b : part.theta.blocks) {
                if (b.size() != static_cast<std::size_t>(part.num_qubits())) {
                    throw ConfigError("KernelSpec: angle vector length mismatch in partition " +
                                      std::to_string(p + 1));
                }
            }
        }
    }
    if (spec.estimation.mode == EstimationMode::Shots && spec.estimation.shots < 2) {
        throw ConfigError("KernelSpec: shot mode needs at least 2 shots");
    }

    const std::size_t P = spec.partitions.size();
    const auto& first = spec.partitions.front();
    const bool unparameterized = std::all_of(spec.partitions.begin(), spec.partitions.end(),
                                             [](const Partition& p) { return detail::all_zero(p.theta); });
    switch (spec.variant) {
        case KernelVariant::SQKL:
            if (P != 1 || first.state.weights()[0] != 1.0 || !unparameterized) {
                throw ConfigError("KernelSpec: SQKL needs one partition in |0...0> without angles");
            }
            break;
        case KernelVariant::FixedQMKL:
            if (P != 1 || !first.state.is_uniform() || !unparameterized) {
                throw ConfigError("KernelSpec: fixed-QMKL needs one fully mixed partition without angles");
            }
            break;
        case KernelVariant::QMKL:
            if (P != 1 || !unparameterized) {
                throw ConfigError("KernelSpec: QMKL needs one partition without angles");
            }
            break;
        case KernelVariant::Multiplicative:
            if (P < 2) throw ConfigError("KernelSpec: multiplicative kernel needs >= 2 partitions");
            for (const auto& part : spec.partitions) {
                if (!part.state.is_pure()) {
                    throw ConfigError("KernelSpec: multiplicative kernel needs pure partition states");
                }
            }
            break;
        case KernelVariant::AdditiveMultiplicative:
            // P = 1 is admitted: it is the linear combination of parameterised kernels.
            break;
    }
}

inline KernelSpec make_sqkl(EncodingPattern pattern, int depth) {
    const int n = pattern.num_qubits();
    KernelSpec s{KernelVariant::SQKL, depth,
                 {Partition{std::move(pattern), DiagonalMixedState::basis(n, 0), {}}}, {}, false};
    validate(s);
    return s;
}

inline KernelSpec make_fixed_qmkl(EncodingPattern pattern, int depth) {
    const int n = pattern.num_qubits();
    KernelSpec s{KernelVariant::FixedQMKL, depth,
                 {Partition{std::move(pattern), DiagonalMixedState::fully_mixed(n), {}}}, {}, false};
    validate(s);
    return s;
}

inline KernelSpec make_qmkl(EncodingPattern pattern, int depth, DiagonalMixedState weights) {
    KernelSpec s{KernelVariant::QMKL, depth, {Partition{std::move(pattern), std::move(weights), {}}}, {}, false};
    validate(s);
    return s;
}

inline KernelSpec make_partitioned(KernelVariant variant, int depth, std::vector<Partition> partitions) {
    KernelSpec s{variant, depth, std::move(partitions), {}, false};
    validate(s);
    return s;
}

/// Copy of `spec` with partition states replaced; the variant tag follows the weights
/// for single-partition specs.
inline KernelSpec with_states(const KernelSpec& spec, const std::vector<DiagonalMixedState>& states) {
    if (states.size() != spec.partitions.size()) throw ConfigError("with_states: partition count mismatch");
    KernelSpec out = spec;
    for (std::size_t p = 0; p < states.size(); ++p) out.partitions[p].state = states[p];
    return out;
}

/// Per-partition encoding unitaries of one sample.
inline std::vector<ComplexMatrix> encode_sample(std::span<const double> x, const KernelSpec& spec) {
    if (x.size() != static_cast<std::size_t>(spec.num_qubits())) {
        throw ConfigError("kernel: sample has " + std::to_string(x.size()) + " features, register has " +
                          std::to_string(spec.num_qubits()) + " qubits");
    }
    std::vector<ComplexMatrix> out;
    out.reserve(spec.partitions.size());
    std::size_t offset = 0;
    for (const auto& part : spec.partitions) {
        const auto slice = x.subspan(offset, part.num_qubits());
        offset += part.num_qubits();
        if (part.theta.empty()) {
            out.push_back(feature_unitary(slice, part.pattern, spec.depth));
        } else {
            out.push_back(parameterized_feature_unitary(slice, part.theta, part.pattern, spec.depth));
        }
    }
    return out;
}

/// prod_p t_p for pre-encoded samples. `entry_seed` drives shot sampling only.
inline Complex combined_trace(const std::vector<ComplexMatrix>& left, const std::vector<ComplexMatrix>& right,
                              const KernelSpec& spec, std::uint64_t entry_seed) {
    Complex product(1.0, 0.0);
    for (std::size_t p = 0; p < spec.partitions.size(); ++p) {
        const Complex t = exact_kernel_trace(spec.partitions[p].state, left[p], right[p]);
        if (spec.estimation.mode == EstimationMode::Exact) {
            product *= t;
        } else {
            product *= sample_trace(t, spec.estimation.shots, derive_seed(entry_seed, {p})).value;
        }
    }
    return product;
}

inline std::uint64_t entry_seed(const Estimation& est, std::size_t i, std::size_t j,
                                SeedStage stage = SeedStage::Shots) {
    return derive_seed(est.master_seed, stage, std::min(i, j), std::max(i, j));
}

/// Complex trace behind kernel_value; the imaginary part is kept for diagnostics.
inline Complex kernel_trace(std::span<const double> xi, std::span<const double> xj, const KernelSpec& spec,
                            std::optional<std::uint64_t> seed = std::nullopt) {
    validate(spec);
    return combined_trace(encode_sample(xi, spec), encode_sample(xj, spec), spec,
                          seed.value_or(entry_seed(spec.estimation, 0, 0)));
}

inline double kernel_value(std::span<const double> xi, std::span<const double> xj, const KernelSpec& spec,
                           std::optional<std::uint64_t> seed = std::nullopt) {
    return kernel_trace(xi, xj, spec, seed).real();
}

struct GramProvenance {
    EstimationMode mode = EstimationMode::Exact;
    std::uint64_t shots = 0;
    std::uint64_t master_seed = 0;

    friend bool operator==(const GramProvenance&, const GramProvenance&) = default;
};

/// Real symmetric matrix of kernel values.
struct GramMatrix {
    Eigen::MatrixXd values;
    GramProvenance provenance;

    Eigen::Index n_rows() const { return values.rows(); }

    /// Principal submatrix on `rows`.
    GramMatrix subset(std::span<const std::size_t> rows) const {
        GramMatrix out{Eigen::MatrixXd(rows.size(), rows.size()), provenance};
        for (std::size_t a = 0; a < rows.size(); ++a)
            for (std::size_t b = 0; b < rows.size(); ++b)
                out.values(a, b) = values(static_cast<Eigen::Index>(rows[a]), static_cast<Eigen::Index>(rows[b]));
        return out;
    }
};

inline std::vector<std::size_t> all_rows(Eigen::Index n) {
    std::vector<std::size_t> r(static_cast<std::size_t>(n));
    std::iota(r.begin(), r.end(), std::size_t{0});
    return r;
}

struct GramOptions {
    unsigned workers = 1;
};

/// Cached per-sample encodings for a set of dataset rows.
class EncodedSamples {
public:
    EncodedSamples(const FeatureMatrix& x, std::span<const std::size_t> rows, const KernelSpec& spec,
                   unsigned workers = 1)
        : rows_(rows.begin(), rows.end()), maps_(rows.size()) {
        validate(spec);
        for (auto r : rows_) {
            if (r >= static_cast<std::size_t>(x.rows())) throw IndexError("EncodedSamples: row out of range");
        }
        parallel_for(rows_.size(), workers, [&](std::size_t a) {
            maps_[a] = encode_sample(row_of(x, static_cast<Eigen::Index>(rows_[a])), spec);
        });
    }

    std::size_t size() const { return rows_.size(); }
    std::size_t row(std::size_t a) const { return rows_[a]; }
    const std::vector<ComplexMatrix>& operator[](std::size_t a) const { return maps_[a]; }

private:
    std::vector<std::size_t> rows_;
    std::vector<std::vector<ComplexMatrix>> maps_;
};

/// Gram matrix over `rows` of x. Shot seeds derive from (master seed, dataset
/// row pair), so a sub-Gram reproduces the corresponding block of a larger one.
inline GramMatrix gram(const FeatureMatrix& x, const KernelSpec& spec, std::span<const std::size_t> rows,
                       GramOptions opts = {}) {
    const EncodedSamples enc(x, rows, spec, opts.workers);
    const std::size_t n = rows.size();
    GramMatrix g{Eigen::MatrixXd(n, n),
                 {spec.estimation.mode, spec.estimation.shots, spec.estimation.master_seed}};
    const bool exact = spec.estimation.mode == EstimationMode::Exact;
    parallel_for(n, opts.workers, [&](std::size_t a) {
        for (std::size_t b = a; b < n; ++b) {
            double v = 0.0;
            if (a == b && exact) {
                v = 1.0;
            } else {
                v = combined_trace(enc[a], enc[b], spec, entry_seed(spec.estimation, enc.row(a), enc.row(b))).real();
            }
            g.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v;
            g.values(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = v;
        }
    });
    return g;
}

inline GramMatrix gram(const FeatureMatrix& x, const KernelSpec& spec, GramOptions opts = {}) {
    const auto rows = all_rows(x.rows());
    return gram(x, spec, rows, opts);
}

/// Rectangular |train| x |new| matrix with entry (i, j) = k(train_i, new_j).
inline Eigen::MatrixXd gram_cross(const FeatureMatrix& x_train, const FeatureMatrix& x_new, const KernelSpec& spec,
                                  GramOptions opts = {}) {
    const auto tr_rows = all_rows(x_train.rows());
    const auto nw_rows = all_rows(x_new.rows());
    const EncodedSamples tr(x_train, tr_rows, spec, opts.workers);
    const EncodedSamples nw(x_new, nw_rows, spec, opts.workers);
    Eigen::MatrixXd out(x_train.rows(), x_new.rows());
    parallel_for(tr.size(), opts.workers, [&](std::size_t a) {
        for (std::size_t b = 0; b < nw.size(); ++b) {
            const auto seed = derive_seed(spec.estimation.master_seed, SeedStage::CrossShots, a, b);
            out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                combined_trace(tr[a], nw[b], spec, seed).real();
        }
    });
    return out;
}

/// Cross matrix between dataset rows `train_rows` and `new_rows` of a single feature matrix.
inline Eigen::MatrixXd gram_cross(const FeatureMatrix& x, std::span<const std::size_t> train_rows,
                                  std::span<const std::size_t> new_rows, const KernelSpec& spec,
                                  GramOptions opts = {}) {
    const EncodedSamples tr(x, train_rows, spec, opts.workers);
    const EncodedSamples nw(x, new_rows, spec, opts.workers);
    Eigen::MatrixXd out(tr.size(), nw.size());
    parallel_for(tr.size(), opts.workers, [&](std::size_t a) {
        for (std::size_t b = 0; b < nw.size(); ++b) {
            const auto seed = derive_seed(spec.estimation.master_seed, SeedStage::CrossShots, tr.row(a), nw.row(b));
            out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                combined_trace(tr[a], nw[b], spec, seed).real();
        }
    });
    return out;
}

struct PsdReport {
    double min_eigenvalue = 0.0;
    bool passed = false;
    bool warning_only = false;  // shot-estimated Grams are reported, never rejected
};

inline PsdReport validate_psd(const GramMatrix& g, double tol = 1e-8) {
    PsdReport r;
    if (g.n_rows() == 0) {
        r.passed = true;
        return r;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.values, Eigen::EigenvaluesOnly);
    r.min_eigenvalue = es.eigenvalues().minCoeff();
    r.passed = r.min_eigenvalue >= -tol;
    r.warning_only = g.provenance.mode == EstimationMode::Shots;
    return r;
}

/// Per-basis-state traces <Phi_m(x_a)|Phi_m(x_b)> for every partition, so that
/// Grams for new state weights are re-assembled without re-encoding. Exact
/// mode only. Single-partition specs keep real parts only, since
/// Re(sum_m w_m t_m) = sum_m w_m Re t_m.
class ComponentGrams {
public:
    ComponentGrams(const FeatureMatrix& x, const KernelSpec& spec, unsigned workers = 1)
        : n_(static_cast<std::size_t>(x.rows())) {
        if (spec.estimation.mode != EstimationMode::Exact) {
            throw ConfigError("ComponentGrams: exact estimation only");
        }
        const auto rows = all_rows(x.rows());
        const EncodedSamples enc(x, rows, spec, workers);
        for (const auto& part : spec.partitions) dims_.push_back(part.state.dim());
        const bool keep_imag = dims_.size() > 1;
        const auto n = static_cast<Eigen::Index>(n_);
        re_.resize(dims_.size());
        im_.resize(dims_.size());
        for (std::size_t p = 0; p < dims_.size(); ++p) {
            re_[p].assign(dims_[p], Eigen::MatrixXd(n, n));
            if (keep_imag) im_[p].assign(dims_[p], Eigen::MatrixXd(n, n));
        }
        parallel_for(n_, workers, [&](std::size_t a) {
            const auto ia = static_cast<Eigen::Index>(a);
            for (std::size_t b = a; b < n_; ++b) {
                const auto ib = static_cast<Eigen::Index>(b);
                for (std::size_t p = 0; p < dims_.size(); ++p) {
                    const auto& ua = enc[a][p];
                    const auto& ub = enc[b][p];
                    for (std::size_t m = 0; m < dims_[p]; ++m) {
                        Complex s{};
                        for (std::size_t r = 0; r < dims_[p]; ++r) s += std::conj(ua(r, m)) * ub(r, m);
                        re_[p][m](ia, ib) = s.real();
                        re_[p][m](ib, ia) = s.real();
                        if (keep_imag) {
                            im_[p][m](ia, ib) = s.imag();
                            im_[p][m](ib, ia) = -s.imag();
                        }
                    }
                }
            }
        });
    }

    std::size_t size() const { return n_; }
    const std::vector<std::size_t>& partition_dims() const { return dims_; }

    /// Kernel block between dataset rows `rows_a` and `rows_b` at the given
    /// partition states. Entries pairing a row with itself are pinned to 1.
    Eigen::MatrixXd assemble(const std::vector<DiagonalMixedState>& states, std::span<const std::size_t> rows_a,
                             std::span<const std::size_t> rows_b) const {
        if (states.size() != dims_.size()) throw ConfigError("ComponentGrams: partition count mismatch");
        const auto ka = static_cast<Eigen::Index>(rows_a.size());
        const auto kb = static_cast<Eigen::Index>(rows_b.size());
        for (auto r : rows_a)
            if (r >= n_) throw IndexError("ComponentGrams: row out of range");
        for (auto r : rows_b)
            if (r >= n_) throw IndexError("ComponentGrams: row out of range");

        Eigen::MatrixXd out;
        if (dims_.size() == 1) {
            out = Eigen::MatrixXd::Zero(ka, kb);
            accumulate(states[0], re_[0], rows_a, rows_b, out);
        } else {
            Eigen::MatrixXcd product = Eigen::MatrixXcd::Ones(ka, kb);
            for (std::size_t p = 0; p < dims_.size(); ++p) {
                Eigen::MatrixXd re = Eigen::MatrixXd::Zero(ka, kb);
                Eigen::MatrixXd im = Eigen::MatrixXd::Zero(ka, kb);
                accumulate(states[p], re_[p], rows_a, rows_b, re);
                accumulate(states[p], im_[p], rows_a, rows_b, im);
                Eigen::MatrixXcd t(ka, kb);
                t.real() = re;
                t.imag() = im;
                product = product.cwiseProduct(t);
            }
            out = product.real();
        }
        for (Eigen::Index a = 0; a < ka; ++a)
            for (Eigen::Index b = 0; b < kb; ++b)
                if (rows_a[static_cast<std::size_t>(a)] == rows_b[static_cast<std::size_t>(b)]) out(a, b) = 1.0;
        return out;
    }

    GramMatrix gram(const std::vector<DiagonalMixedState>& states, std::span<const std::size_t> rows) const {
        return {assemble(states, rows, rows), {EstimationMode::Exact, 0, 0}};
    }

private:
    void accumulate(const DiagonalMixedState& state, const std::vector<Eigen::MatrixXd>& parts,
                    std::span<const std::size_t> rows_a, std::span<const std::size_t> rows_b,
                    Eigen::MatrixXd& out) const {
        if (state.dim() != parts.size()) throw ConfigError("ComponentGrams: state dim mismatch");
        for (std::size_t m = 0; m < parts.size(); ++m) {
            const double w = state.weights()[m];
            if (w == 0.0) continue;
            const auto& c = parts[m];
            for (Eigen::Index b = 0; b < out.cols(); ++b) {
                const auto cb = static_cast<Eigen::Index>(rows_b[static_cast<std::size_t>(b)]);
                for (Eigen::Index a = 0; a < out.rows(); ++a) {
                    out(a, b) += w * c(static_cast<Eigen::Index>(rows_a[static_cast<std::size_t>(a)]), cb);
                }
            }
        }
    }

    std::size_t n_;
    std::vector<std::size_t> dims_;
    std::vector<std::vector<Eigen::MatrixXd>> re_;
    std::vector<std::vector<Eigen::MatrixXd>> im_;
};

}  // namespace qmkl
