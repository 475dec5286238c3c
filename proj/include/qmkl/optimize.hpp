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

// Derivative-free constrained minimisation by linear approximations
// (Powell's COBYLA scheme), specialised to products of probability simplices.
//
// The engine keeps n+1 interpolation points, fits linear models of the
// objective and of every constraint c_k(x) >= 0, and takes trust-region steps
// against the merit function f + mu * max_k(-c_k)_+. The trust radius starts
// at `initial_step` and is halved down to `final_step`.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "qmkl/errors.hpp"

namespace qmkl {

struct OptimizerConfig {
    double initial_step = 0.3;  // rhobeg
    std::size_t max_evals = 500;
    double final_step = 1e-4;  // rhoend
    // Recorded with results for provenance; the iteration itself is deterministic.
    std::uint64_t seed = 0;
};

inline void validate(const OptimizerConfig& c) {
    if (!(c.final_step > 0.0 && c.final_step < c.initial_step)) {
        throw ParameterError("OptimizerConfig: need 0 < final_step < initial_step");
    }
}

struct ConstrainedProblem {
    std::size_t dim = 0;
    std::size_t num_constraints = 0;
    std::function<double(std::span<const double>)> objective;
    // Writes c_k(x); feasibility is c_k(x) >= 0 for every k.
    std::function<void(std::span<const double>, std::span<double>)> constraints;
};

struct CobylaResult {
    std::vector<double> x;
    double value = std::numeric_limits<double>::infinity();
    double max_violation = 0.0;
    std::size_t evals = 0;
};

namespace detail {

// Objective values standing in for NaN / inf so that linear models stay finite.
inline constexpr double kNonFinitePenalty = 1e30;

// Piecewise-linear path minimisation of grad . v subject to
// normals_k . v >= lower_k and ||v[0:ball_dims]|| <= radius, starting from a
// feasible v. The path follows projected steepest descent and stops on the
// ball boundary, at a KKT point, or after a fixed number of pieces.
inline void trust_region_path(const Eigen::VectorXd& grad, const Eigen::MatrixXd& normals,
                              const Eigen::VectorXd& lower, Eigen::Index ball_dims, double radius,
                              Eigen::VectorXd& v) {
    const Eigen::Index nv = grad.size();
    const Eigen::Index m = normals.rows();
    std::vector<char> active(static_cast<std::size_t>(m), 0);
    auto residual = [&](Eigen::Index k) { return normals.row(k).dot(v) - lower(k); };
    for (Eigen::Index k = 0; k < m; ++k) {
        const double scale = 1.0 + std::abs(lower(k));
        if (residual(k) <= 1e-12 * scale) active[k] = 1;
    }
    const double gnorm = grad.norm();
    if (gnorm == 0.0) return;

    const Eigen::Index max_pieces = 4 * (nv + m) + 10;
    for (Eigen::Index piece = 0; piece < max_pieces; ++piece) {
        std::vector<Eigen::Index> w;
        for (Eigen::Index k = 0; k < m; ++k)
            if (active[k]) w.push_back(k);

        Eigen::VectorXd lambda;
        Eigen::VectorXd r = grad;
        if (!w.empty()) {
            Eigen::MatrixXd aw(nv, static_cast<Eigen::Index>(w.size()));
            for (std::size_t c = 0; c < w.size(); ++c) aw.col(static_cast<Eigen::Index>(c)) = normals.row(w[c]).transpose();
            lambda = aw.completeOrthogonalDecomposition().solve(grad);
            r = grad - aw * lambda;
        }
        if (r.norm() <= 1e-12 * gnorm) {
            // KKT for min grad.v with a.v >= l needs grad = sum lambda a, lambda >= 0.
            Eigen::Index drop = -1;
            double most_negative = -1e-12 * gnorm;
            for (std::size_t c = 0; c < w.size(); ++c) {
                if (lambda(static_cast<Eigen::Index>(c)) < most_negative) {
                    most_negative = lambda(static_cast<Eigen::Index>(c));
                    drop = w[c];
                }
            }
            if (drop < 0) return;
            active[drop] = 0;
            continue;
        }
        const Eigen::VectorXd s = -r;

        double t = std::numeric_limits<double>::infinity();
        bool hits_ball = false;
        const auto sd = s.head(ball_dims);
        const double ss = sd.squaredNorm();
        if (ss > 0.0) {
            const auto vd = v.head(ball_dims);
            const double vs = vd.dot(sd);
            const double slack = std::max(0.0, radius * radius - vd.squaredNorm());
            t = (std::sqrt(vs * vs + ss * slack) - vs) / ss;
            hits_ball = true;
        }
        Eigen::Index entering = -1;
        for (Eigen::Index k = 0; k < m; ++k) {
            if (active[k]) continue;
            const double rate = normals.row(k).dot(s);
            if (rate >= 0.0) continue;
            const double tk = std::max(0.0, residual(k)) / -rate;
            if (tk < t) {
                t = tk;
                entering = k;
                hits_ball = false;
            }
        }
        if (!std::isfinite(t)) return;
        v += t * s;
        if (hits_ball || entering < 0) return;
        active[entering] = 1;
    }
}

// Trust-region step for the linearised problem: first reduce the largest
// constraint violation, then the objective without increasing it again.
inline Eigen::VectorXd cobyla_step(const Eigen::VectorXd& g, const Eigen::MatrixXd& a, const Eigen::VectorXd& c0,
                                   double radius) {
    const Eigen::Index n = g.size();
    const Eigen::Index m = a.rows();
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    double relax = 0.0;
    const double worst = m > 0 ? std::max(0.0, (-c0).maxCoeff()) : 0.0;
    if (worst > 0.0) {
        // Variables (d, z): minimise z s.t. c0 + a d + z >= 0, z >= 0.
        Eigen::VectorXd grad1 = Eigen::VectorXd::Zero(n + 1);
        grad1(n) = 1.0;
        Eigen::MatrixXd normals(m + 1, n + 1);
        Eigen::VectorXd lower(m + 1);
        normals.topLeftCorner(m, n) = a;
        normals.topRightCorner(m, 1).setOnes();
        lower.head(m) = -c0;
        normals.row(m).setZero();
        normals(m, n) = 1.0;
        lower(m) = 0.0;
        Eigen::VectorXd v(n + 1);
        v.head(n).setZero();
        v(n) = worst;
        trust_region_path(grad1, normals, lower, n, radius, v);
        d = v.head(n);
        relax = std::max(0.0, v(n));
    }
    if (m > 0) {
        const Eigen::VectorXd lower = -(c0.array() + relax).matrix();
        trust_region_path(g, a, lower, n, radius, d);
    } else {
        trust_region_path(g, Eigen::MatrixXd(0, n), Eigen::VectorXd(0), n, radius, d);
    }
    return d;
}

}  // namespace detail

using EvalObserver = std::function<void(std::size_t eval_index, std::span<const double> x, double value)>;

/// COBYLA-style minimisation of problem.objective subject to problem.constraints >= 0.
inline CobylaResult cobyla(const ConstrainedProblem& problem, std::span<const double> start,
                           const OptimizerConfig& cfg, const EvalObserver& observer = {}) {
    validate(cfg);
    const auto n = static_cast<Eigen::Index>(problem.dim);
    const auto m = static_cast<Eigen::Index>(problem.num_constraints);
    if (n < 1) throw ParameterError("cobyla: dimension must be >= 1");
    if (start.size() != problem.dim) throw ShapeError("cobyla: start point has wrong dimension");

    constexpr double kAlpha = 0.25;  // acceptable simplex: vsig >= alpha * rho
    constexpr double kBeta = 2.1;    // and edge lengths <= beta * rho
    constexpr double kGamma = 0.5;   // geometry step length factor
    constexpr double kDelta = 1.1;   // far-vertex threshold factor

    struct Vertex {
        Eigen::VectorXd x;
        double f = 0.0;
        Eigen::VectorXd c;
        double viol = 0.0;
    };

    CobylaResult result;
    result.x.assign(start.begin(), start.end());
    double best_feasible = std::numeric_limits<double>::infinity();
    double least_violation = std::numeric_limits<double>::infinity();
    std::size_t evals = 0;

    auto evaluate = [&](const Eigen::VectorXd& x) {
        Vertex v{x, 0.0, Eigen::VectorXd::Zero(m), 0.0};
        std::span<const double> xs(x.data(), static_cast<std::size_t>(n));
        double f = problem.objective(xs);
        if (!std::isfinite(f)) f = detail::kNonFinitePenalty;
        v.f = f;
        if (m > 0) {
            problem.constraints(xs, std::span<double>(v.c.data(), static_cast<std::size_t>(m)));
            v.viol = std::max(0.0, (-v.c).maxCoeff());
        }
        if (observer) observer(evals, xs, f);
        ++evals;
        constexpr double kFeasTol = 1e-10;
        const bool better_feasible = v.viol <= kFeasTol && f < best_feasible;
        const bool better_infeasible = best_feasible == std::numeric_limits<double>::infinity() &&
                                       v.viol < least_violation;
        if (better_feasible || better_infeasible) {
            if (v.viol <= kFeasTol) best_feasible = f;
            least_violation = std::min(least_violation, v.viol);
            result.x.assign(x.data(), x.data() + n);
            result.value = f;
            result.max_violation = v.viol;
        }
        return v;
    };

    if (cfg.max_evals == 0) return result;

    double rho = cfg.initial_step;
    double mu = 0.0;
    const Eigen::VectorXd x0 = Eigen::Map<const Eigen::VectorXd>(start.data(), n);
    std::vector<Vertex> sim;
    sim.push_back(evaluate(x0));
    for (Eigen::Index j = 0; j < n && evals < cfg.max_evals; ++j) {
        Eigen::VectorXd x = x0;
        x(j) += rho;
        sim.push_back(evaluate(x));
    }
    if (static_cast<Eigen::Index>(sim.size()) < n + 1) {
        result.evals = evals;
        return result;
    }

    auto merit = [&](const Vertex& v) { return v.f + mu * v.viol; };
    // sim[0] is the optimal vertex; columns of disp are sim[j+1].x - sim[0].x.
    Eigen::MatrixXd disp(n, n);
    Eigen::MatrixXd inv(n, n);
    auto rebuild = [&] {
        for (Eigen::Index j = 0; j < n; ++j) disp.col(j) = sim[j + 1].x - sim[0].x;
        inv = disp.fullPivLu().inverse();
    };
    auto select_optimal = [&] {
        std::size_t best = 0;
        for (std::size_t j = 1; j < sim.size(); ++j) {
            const double mj = merit(sim[j]);
            const double mb = merit(sim[best]);
            if (mj < mb || (mj == mb && sim[j].viol < sim[best].viol)) best = j;
        }
        if (best != 0) std::swap(sim[0], sim[best]);
    };

    select_optimal();
    rebuild();

    while (evals < cfg.max_evals) {
        // Linear models: slope = inv^T * (value differences).
        Eigen::VectorXd df(n);
        Eigen::MatrixXd dc(n, m);
        for (Eigen::Index j = 0; j < n; ++j) {
            df(j) = sim[j + 1].f - sim[0].f;
            if (m > 0) dc.row(j) = (sim[j + 1].c - sim[0].c).transpose();
        }
        const Eigen::VectorXd g = inv.transpose() * df;
        const Eigen::MatrixXd a = (inv.transpose() * dc).transpose();  // m x n

        // Simplex geometry.
        Eigen::VectorXd vsig(n);
        Eigen::VectorXd veta(n);
        for (Eigen::Index j = 0; j < n; ++j) {
            vsig(j) = 1.0 / inv.row(j).norm();
            veta(j) = disp.col(j).norm();
        }
        const double parsig = kAlpha * rho;
        const double pareta = kBeta * rho;
        const bool geometry_ok = (vsig.array() >= parsig).all() && (veta.array() <= pareta).all();

        if (!geometry_ok) {
            Eigen::Index jdrop = 0;
            veta.maxCoeff(&jdrop);
            if (veta(jdrop) <= pareta) vsig.minCoeff(&jdrop);
            Eigen::VectorXd dx = kGamma * rho * vsig(jdrop) * inv.row(jdrop).transpose();
            // Pick the sign with the smaller predicted merit.
            const double slope = g.dot(dx);
            double viol_plus = 0.0;
            double viol_minus = 0.0;
            if (m > 0) {
                viol_plus = std::max(0.0, (-(sim[0].c + a * dx)).maxCoeff());
                viol_minus = std::max(0.0, (-(sim[0].c - a * dx)).maxCoeff());
            }
            if (mu * (viol_plus - viol_minus) > 2.0 * slope) dx = -dx;
            sim[static_cast<std::size_t>(jdrop) + 1] = evaluate(sim[0].x + dx);
            select_optimal();
            rebuild();
            continue;
        }

        const Eigen::VectorXd d = detail::cobyla_step(g, a, sim[0].c, rho);

        bool reduce = false;
        if (d.norm() < 0.5 * rho) {
            reduce = true;
        } else {
            const double viol_pred = m > 0 ? std::max(0.0, (-(sim[0].c + a * d)).maxCoeff()) : 0.0;
            const double prerec = sim[0].viol - viol_pred;
            const double slope = g.dot(d);
            if (prerec > 0.0) {
                const double barmu = slope / prerec;
                if (mu < 1.5 * barmu) {
                    mu = 2.0 * barmu;
                    const Vertex before = sim[0];
                    select_optimal();
                    if (sim[0].x != before.x) {
                        rebuild();
                        continue;
                    }
                }
            }
            double prerem = mu * prerec - slope;

            const Vertex trial = evaluate(sim[0].x + d);
            double trured = merit(sim[0]) - merit(trial);
            if (mu == 0.0 && trial.f == sim[0].f) {
                prerem = prerec;
                trured = sim[0].viol - trial.viol;
            }

            // Vertex to replace: improves the simplex volume most, or lies far away.
            double ratio = trured <= 0.0 ? 1.0 : 0.0;
            Eigen::Index jdrop = -1;
            Eigen::VectorXd sigbar(n);
            for (Eigen::Index j = 0; j < n; ++j) {
                const double temp = std::abs(inv.row(j).dot(d));
                if (temp > ratio) {
                    jdrop = j;
                    ratio = temp;
                }
                sigbar(j) = temp * vsig(j);
            }
            double edgmax = kDelta * rho;
            Eigen::Index far = -1;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (sigbar(j) >= parsig || sigbar(j) >= vsig(j)) {
                    const double dist = trured > 0.0 ? (disp.col(j) - d).norm() : veta(j);
                    if (dist > edgmax) {
                        far = j;
                        edgmax = dist;
                    }
                }
            }
            if (far >= 0) jdrop = far;

            if (jdrop < 0) {
                reduce = true;
            } else {
                sim[static_cast<std::size_t>(jdrop) + 1] = trial;
                select_optimal();
                rebuild();
                if (!(trured > 0.0 && trured >= 0.1 * prerem)) reduce = true;
            }
        }

        if (reduce) {
            if (rho <= cfg.final_step) break;
            rho *= 0.5;
            if (rho <= 1.5 * cfg.final_step) rho = cfg.final_step;
            if (mu > 0.0 && m > 0) {
                double denom = 0.0;
                for (Eigen::Index k = 0; k < m; ++k) {
                    double cmin = std::numeric_limits<double>::infinity();
                    double cmax = -std::numeric_limits<double>::infinity();
                    for (const auto& v : sim) {
                        cmin = std::min(cmin, v.c(k));
                        cmax = std::max(cmax, v.c(k));
                    }
                    if (cmin < 0.5 * cmax) {
                        const double temp = std::max(cmax, 0.0) - cmin;
                        denom = denom <= 0.0 ? temp : std::min(denom, temp);
                    }
                }
                double fmin = std::numeric_limits<double>::infinity();
                double fmax = -std::numeric_limits<double>::infinity();
                for (const auto& v : sim) {
                    fmin = std::min(fmin, v.f);
                    fmax = std::max(fmax, v.f);
                }
                if (denom == 0.0) {
                    mu = 0.0;
                } else if (fmax - fmin < mu * denom) {
                    mu = (fmax - fmin) / denom;
                }
                select_optimal();
                rebuild();
            }
        }
    }
    result.evals = evals;
    return result;
}

/// Point of the probability simplex.
class SimplexPoint {
public:
    static constexpr double kTolerance = 1e-10;

    explicit SimplexPoint(std::vector<double> weights) : weights_(std::move(weights)) {
        if (weights_.empty()) throw ParameterError("SimplexPoint: empty weight vector");
        double s = 0.0;
        for (double w : weights_) {
            if (!(w >= 0.0) || !std::isfinite(w)) throw ParameterError("SimplexPoint: negative or non-finite weight");
            s += w;
        }
        if (std::abs(s - 1.0) > kTolerance) {
            throw ParameterError("SimplexPoint: weights sum to " + std::to_string(s));
        }
    }

    static SimplexPoint uniform(std::size_t dim) {
        return SimplexPoint(std::vector<double>(dim, 1.0 / static_cast<double>(dim)));
    }

    static SimplexPoint vertex(std::size_t dim, std::size_t k) {
        std::vector<double> w(dim, 0.0);
        w.at(k) = 1.0;
        return SimplexPoint(std::move(w));
    }

    /// Negative entries clipped to zero, then rescaled to sum to one.
    static SimplexPoint clip_and_normalize(std::span<const double> raw) {
        std::vector<double> w(raw.size());
        double s = 0.0;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            w[i] = std::isfinite(raw[i]) ? std::max(0.0, raw[i]) : 0.0;
            s += w[i];
        }
        if (!(s > 0.0)) return uniform(raw.size());
        for (auto& v : w) v /= s;
        return SimplexPoint(std::move(w));
    }

    std::size_t dim() const { return weights_.size(); }
    std::span<const double> weights() const { return weights_; }
    double operator[](std::size_t i) const { return weights_[i]; }

    friend bool operator==(const SimplexPoint&, const SimplexPoint&) = default;

private:
    std::vector<double> weights_;
};

/// Weights for P partitions (one simplex each) plus unconstrained angles.
struct FitPoint {
    std::vector<SimplexPoint> blocks;
    std::vector<double> angles;

    friend bool operator==(const FitPoint&, const FitPoint&) = default;
};

struct FitLayout {
    std::vector<std::size_t> block_dims;
    std::size_t angle_count = 0;

    std::size_t free_coordinates() const {
        std::size_t n = angle_count;
        for (auto d : block_dims) n += d - 1;
        return n;
    }
    std::size_t constraint_count() const {
        std::size_t n = 0;
        for (auto d : block_dims) n += d;
        return n;
    }
};

namespace detail {

// Block p contributes dims_p - 1 free coordinates; its last weight is the remainder.
inline std::vector<double> to_coordinates(const FitPoint& p, const FitLayout& layout) {
    std::vector<double> z;
    for (std::size_t b = 0; b < layout.block_dims.size(); ++b) {
        const auto w = p.blocks[b].weights();
        z.insert(z.end(), w.begin(), w.end() - 1);
    }
    z.insert(z.end(), p.angles.begin(), p.angles.end());
    return z;
}

inline void raw_weights(std::span<const double> z, const FitLayout& layout, std::size_t block,
                        std::size_t& offset, std::vector<double>& out) {
    const auto d = layout.block_dims[block];
    out.assign(z.begin() + static_cast<std::ptrdiff_t>(offset), z.begin() + static_cast<std::ptrdiff_t>(offset + d - 1));
    double s = 0.0;
    for (double v : out) s += v;
    out.push_back(1.0 - s);
    offset += d - 1;
}

inline FitPoint from_coordinates(std::span<const double> z, const FitLayout& layout) {
    FitPoint p;
    std::size_t offset = 0;
    std::vector<double> raw;
    for (std::size_t b = 0; b < layout.block_dims.size(); ++b) {
        raw_weights(z, layout, b, offset, raw);
        p.blocks.push_back(SimplexPoint::clip_and_normalize(raw));
    }
    p.angles.assign(z.begin() + static_cast<std::ptrdiff_t>(offset), z.end());
    return p;
}

inline void check_layout(const FitPoint& start, const FitLayout& layout) {
    if (layout.block_dims.empty() && layout.angle_count == 0) throw ParameterError("fit layout is empty");
    if (start.blocks.size() != layout.block_dims.size() || start.angles.size() != layout.angle_count) {
        throw ShapeError("start point does not match the fit layout");
    }
    for (std::size_t b = 0; b < layout.block_dims.size(); ++b) {
        if (layout.block_dims[b] < 2) throw ParameterError("simplex blocks need dimension >= 2");
        if (start.blocks[b].dim() != layout.block_dims[b]) throw ShapeError("start block dimension mismatch");
    }
}

}  // namespace detail

struct FitSearchResult {
    FitPoint point;
    double best_value = std::numeric_limits<double>::infinity();
    std::size_t eval_count = 0;
};

using FitObserver = std::function<void(std::size_t eval_index, const FitPoint&, double value)>;

/// Minimises objective over a product of simplices (sum_i a_pi = 1, a_pi >= 0
/// for every block p) and free angle coordinates. Every point handed to the
/// objective is clip-and-renormalised onto the simplices; the returned point is
/// the best point evaluated, so it is never worse than `start`.
inline FitSearchResult minimize_on_simplices(const std::function<double(const FitPoint&)>& objective,
                                             const FitLayout& layout, const OptimizerConfig& cfg,
                                             const FitPoint& start, const FitObserver& observer = {}) {
    validate(cfg);
    detail::check_layout(start, layout);

    FitSearchResult out{start, std::numeric_limits<double>::infinity(), 0};
    ConstrainedProblem problem;
    problem.dim = layout.free_coordinates();
    problem.num_constraints = layout.constraint_count();
    problem.objective = [&](std::span<const double> z) {
        FitPoint p = detail::from_coordinates(z, layout);
        double f = objective(p);
        if (!std::isfinite(f)) f = std::numeric_limits<double>::infinity();
        if (observer) observer(out.eval_count, p, f);
        ++out.eval_count;
        if (f < out.best_value) {
            out.best_value = f;
            out.point = std::move(p);
        }
        return f;
    };
    problem.constraints = [&](std::span<const double> z, std::span<double> c) {
        std::size_t offset = 0;
        std::size_t k = 0;
        std::vector<double> raw;
        for (std::size_t b = 0; b < layout.block_dims.size(); ++b) {
            detail::raw_weights(z, layout, b, offset, raw);
            for (double w : raw) c[k++] = w;
        }
    };
    if (problem.dim == 0) throw ParameterError("minimize_on_simplices: nothing to optimise");
    const auto z0 = detail::to_coordinates(start, layout);
    cobyla(problem, z0, cfg);
    return out;
}

struct SimplexSearchResult {
    SimplexPoint point;
    double best_value = std::numeric_limits<double>::infinity();
    std::size_t eval_count = 0;
};

inline SimplexSearchResult minimize_on_simplex(const std::function<double(const SimplexPoint&)>& objective,
                                               std::size_t dim, const OptimizerConfig& cfg,
                                               const SimplexPoint& start) {
    if (dim < 2) throw ParameterError("minimize_on_simplex: dimension must be >= 2");
    if (start.dim() != dim) throw ShapeError("minimize_on_simplex: start has wrong dimension");
    const FitLayout layout{{dim}, 0};
    auto r = minimize_on_simplices([&](const FitPoint& p) { return objective(p.blocks.front()); }, layout, cfg,
                                   FitPoint{{start}, {}});
    return {r.point.blocks.front(), r.best_value, r.eval_count};
}

}  // namespace qmkl
