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

// Soft-margin SVM on a precomputed kernel, trained by sequential minimal
// optimisation on the dual
//
//   min_a  1/2 a^T Q a - e^T a   s.t.  0 <= a_i <= C,  y^T a = 0,
//
// with Q_ij = y_i y_j K_ij. Working pairs are chosen by maximal KKT
// violation; ties go to the lowest index, so training is deterministic.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "qmkl/errors.hpp"
#include "qmkl/kernels.hpp"

namespace qmkl {

struct SvmConfig {
    double box_c = 1.0;
    double tol = 1e-3;
    bool use_bias = true;
    std::size_t max_iterations = 10'000'000;
};

struct TrainedModel {
    std::vector<double> duals;  // a_i
    std::vector<double> beta;   // a_i y_i
    double bias = 0.0;
    std::vector<std::size_t> support_indices;
    double box_c = 1.0;
    double dual_objective = 0.0;  // sum a - 1/2 a^T Q a (maximisation form)
    std::size_t iterations = 0;
    std::string training_ref;
    std::vector<std::string> warnings;
};

/// sum_i a_i - 1/2 sum_ij a_i a_j y_i y_j K_ij
inline double dual_objective(const Eigen::MatrixXd& k, std::span<const int> y, std::span<const double> a) {
    double lin = 0.0;
    double quad = 0.0;
    const auto n = static_cast<Eigen::Index>(a.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        lin += a[i];
        for (Eigen::Index j = 0; j < n; ++j) quad += a[i] * a[j] * y[i] * y[j] * k(i, j);
    }
    return lin - 0.5 * quad;
}

namespace detail {

inline void check_training_inputs(const GramMatrix& gram, std::span<const int> labels, const SvmConfig& cfg) {
    const auto n = static_cast<std::size_t>(gram.n_rows());
    if (gram.values.rows() != gram.values.cols()) throw ShapeError("svm: Gram matrix is not square");
    if (labels.size() != n) {
        throw ShapeError("svm: " + std::to_string(labels.size()) + " labels for a " + std::to_string(n) +
                         "-row Gram matrix");
    }
    if (!(cfg.box_c > 0.0)) throw ParameterError("svm: box constraint C must be positive");
    if (!(cfg.tol > 0.0)) throw ParameterError("svm: tolerance must be positive");
    bool pos = false;
    bool neg = false;
    for (int y : labels) {
        if (y == 1) {
            pos = true;
        } else if (y == -1) {
            neg = true;
        } else {
            throw ParameterError("svm: labels must be +1 or -1");
        }
    }
    if (cfg.use_bias && !(pos && neg)) throw DegenerateLabelsError("svm: training labels contain a single class");
}

inline constexpr double kTau = 1e-12;

// Two-variable SMO with the equality constraint (bias mode).
inline std::size_t smo_with_bias(const Eigen::MatrixXd& k, std::span<const int> y, const SvmConfig& cfg,
                                 std::vector<double>& a, std::vector<double>& grad, double& bias) {
    const auto n = a.size();
    const double c = cfg.box_c;
    auto q = [&](std::size_t i, std::size_t j) {
        return y[i] * y[j] * k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    };
    auto in_up = [&](std::size_t t) { return (y[t] == 1 && a[t] < c) || (y[t] == -1 && a[t] > 0.0); };
    auto in_low = [&](std::size_t t) { return (y[t] == 1 && a[t] > 0.0) || (y[t] == -1 && a[t] < c); };

    std::size_t iter = 0;
    for (; iter < cfg.max_iterations; ++iter) {
        double gmax = -std::numeric_limits<double>::infinity();
        double gmin = std::numeric_limits<double>::infinity();
        std::size_t i = n;
        std::size_t j = n;
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -y[t] * grad[t];
            if (in_up(t) && v > gmax) {
                gmax = v;
                i = t;
            }
            if (in_low(t) && v < gmin) {
                gmin = v;
                j = t;
            }
        }
        if (i == n || j == n || gmax - gmin < cfg.tol) break;

        const double qii = q(i, i);
        const double qjj = q(j, j);
        const double qij = q(i, j);
        const double old_ai = a[i];
        const double old_aj = a[j];

        if (y[i] != y[j]) {
            double quad = qii + qjj + 2.0 * qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = a[i] - a[j];
            a[i] += delta;
            a[j] += delta;
            if (diff > 0.0) {
                if (a[j] < 0.0) {
                    a[j] = 0.0;
                    a[i] = diff;
                }
            } else {
                if (a[i] < 0.0) {
                    a[i] = 0.0;
                    a[j] = -diff;
                }
            }
            if (diff > 0.0) {
                if (a[i] > c) {
                    a[i] = c;
                    a[j] = c - diff;
                }
            } else {
                if (a[j] > c) {
                    a[j] = c;
                    a[i] = c + diff;
                }
            }
        } else {
            double quad = qii + qjj - 2.0 * qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = a[i] + a[j];
            a[i] -= delta;
            a[j] += delta;
            if (sum > c) {
                if (a[i] > c) {
                    a[i] = c;
                    a[j] = sum - c;
                }
            } else {
                if (a[j] < 0.0) {
                    a[j] = 0.0;
                    a[i] = sum;
                }
            }
            if (sum > c) {
                if (a[j] > c) {
                    a[j] = c;
                    a[i] = sum - c;
                }
            } else {
                if (a[i] < 0.0) {
                    a[i] = 0.0;
                    a[j] = sum;
                }
            }
        }

        const double dai = a[i] - old_ai;
        const double daj = a[j] - old_aj;
        for (std::size_t t = 0; t < n; ++t) grad[t] += q(t, i) * dai + q(t, j) * daj;
    }

    // Bias from free support vectors; midpoint of the feasible interval otherwise.
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * grad[t];
        if (a[t] >= c) {
            if (y[t] == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else if (a[t] <= 0.0) {
            if (y[t] == 1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);
    bias = -rho;
    return iter;
}

// Coordinate descent without the equality constraint (bias-free decision function).
inline std::size_t smo_without_bias(const Eigen::MatrixXd& k, std::span<const int> y, const SvmConfig& cfg,
                                    std::vector<double>& a, std::vector<double>& grad) {
    const auto n = a.size();
    const double c = cfg.box_c;
    std::size_t iter = 0;
    for (; iter < cfg.max_iterations; ++iter) {
        double worst = 0.0;
        std::size_t i = n;
        for (std::size_t t = 0; t < n; ++t) {
            // Projected-gradient magnitude of the box-constrained problem.
            double v = 0.0;
            if (grad[t] < 0.0 && a[t] < c) v = -grad[t];
            if (grad[t] > 0.0 && a[t] > 0.0) v = grad[t];
            if (v > worst) {
                worst = v;
                i = t;
            }
        }
        if (i == n || worst < cfg.tol) break;
        double qii = k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
        if (qii <= 0.0) qii = kTau;
        const double old = a[i];
        a[i] = std::clamp(a[i] - grad[i] / qii, 0.0, c);
        const double d = a[i] - old;
        for (std::size_t t = 0; t < n; ++t) {
            grad[t] += y[t] * y[i] * k(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i)) * d;
        }
    }
    return iter;
}

}  // namespace detail

inline TrainedModel train(const GramMatrix& gram, std::span<const int> labels, const SvmConfig& cfg = {}) {
    detail::check_training_inputs(gram, labels, cfg);
    const auto n = labels.size();
    TrainedModel m;
    m.box_c = cfg.box_c;

    if (gram.provenance.mode == EstimationMode::Shots && n > 0) {
        const auto report = validate_psd(gram, 1e-6);
        if (!report.passed) {
            m.warnings.push_back("Gram matrix has eigenvalue " + std::to_string(report.min_eigenvalue) +
                                 " below -1e-6; training continues");
        }
    }

    std::vector<double> a(n, 0.0);
    std::vector<double> grad(n, -1.0);
    if (cfg.use_bias) {
        m.iterations = detail::smo_with_bias(gram.values, labels, cfg, a, grad, m.bias);
    } else {
        m.iterations = detail::smo_without_bias(gram.values, labels, cfg, a, grad);
    }
    if (m.iterations >= cfg.max_iterations) m.warnings.push_back("SMO hit the iteration cap");

    m.duals = a;
    m.beta.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        m.beta[i] = a[i] * labels[i];
        if (a[i] > 0.0) m.support_indices.push_back(i);
    }
    m.dual_objective = dual_objective(gram.values, labels, a);
    return m;
}

/// f(x_j) = sum_i beta_i cross(i, j) + bias for every column j.
inline std::vector<double> decide(const TrainedModel& model, const Eigen::MatrixXd& cross) {
    if (static_cast<std::size_t>(cross.rows()) != model.beta.size()) {
        throw ShapeError("decide: cross matrix has " + std::to_string(cross.rows()) + " rows, model has " +
                         std::to_string(model.beta.size()) + " training points");
    }
    std::vector<double> f(static_cast<std::size_t>(cross.cols()), model.bias);
    for (std::size_t i : model.support_indices) {
        const double b = model.beta[i];
        for (Eigen::Index j = 0; j < cross.cols(); ++j) f[j] += b * cross(static_cast<Eigen::Index>(i), j);
    }
    return f;
}

/// Predicted label with sign(0) = +1.
inline int predicted_label(double decision) { return decision >= 0.0 ? 1 : -1; }

inline double zero_one_risk(std::span<const double> predictions, std::span<const int> labels) {
    if (predictions.empty()) throw ParameterError("zero_one_risk: empty input");
    if (predictions.size() != labels.size()) throw ShapeError("zero_one_risk: length mismatch");
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) wrong += predicted_label(predictions[i]) != labels[i];
    return static_cast<double>(wrong) / static_cast<double>(labels.size());
}

inline double accuracy(std::span<const double> predictions, std::span<const int> labels) {
    return 1.0 - zero_one_risk(predictions, labels);
}

/// Mean hinge loss max(0, 1 - y f); smooth alternative objective for weight search.
inline double hinge_risk(std::span<const double> predictions, std::span<const int> labels) {
    if (predictions.empty()) throw ParameterError("hinge_risk: empty input");
    if (predictions.size() != labels.size()) throw ShapeError("hinge_risk: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) s += std::max(0.0, 1.0 - labels[i] * predictions[i]);
    return s / static_cast<double>(labels.size());
}

}  // namespace qmkl
