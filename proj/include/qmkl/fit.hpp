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

// Kernel-weight learning by alternating minimisation of the empirical risk.
// Every objective evaluation trains a fresh SVM (the beta step) on the
// optimisation subset for the candidate weights (the Gamma step) and scores
// it on that same subset.

#include <algorithm>
#include <functional>
#include <limits>
#include <set>
#include <span>
#include <vector>

#include "qmkl/errors.hpp"
#include "qmkl/kernels.hpp"
#include "qmkl/optimize.hpp"
#include "qmkl/svm.hpp"

namespace qmkl {

enum class RiskObjective { ZeroOne, Hinge };

struct FitConfig {
    SvmConfig svm;
    OptimizerConfig optimizer;
    RiskObjective objective = RiskObjective::ZeroOne;
};

/// Builds the Gram matrix over dataset rows `rows` for the candidate weights.
using GramBuilder = std::function<GramMatrix(const FitPoint&, std::span<const std::size_t> rows)>;
using SimplexGramBuilder = std::function<GramMatrix(const SimplexPoint&, std::span<const std::size_t> rows)>;

struct FitResult {
    FitPoint point;
    TrainedModel model;  // trained on all training rows at `point`
    double start_risk = 0.0;
    double best_risk = 0.0;
    std::size_t evals = 0;
};

/// Empirical risk on `rows` of an SVM trained on those rows.
inline double subset_risk(const GramMatrix& g, std::span<const int> labels, const SvmConfig& svm,
                          RiskObjective objective) {
    const TrainedModel model = train(g, labels, svm);
    const auto f = decide(model, g.values);
    return objective == RiskObjective::ZeroOne ? zero_one_risk(f, labels) : hinge_risk(f, labels);
}

/// `labels` is indexed by dataset row. `subset_rows` must be a subset of `train_rows`.
inline FitResult alternating_fit(const GramBuilder& builder, std::span<const int> labels,
                                 std::span<const std::size_t> train_rows, std::span<const std::size_t> subset_rows,
                                 const FitLayout& layout, const FitPoint& start, const FitConfig& cfg,
                                 const FitObserver& observer = {}) {
    if (subset_rows.empty()) throw ParameterError("alternating_fit: empty optimisation subset");
    if (train_rows.empty()) throw ParameterError("alternating_fit: empty training set");
    const std::set<std::size_t> train_set(train_rows.begin(), train_rows.end());
    for (auto r : subset_rows) {
        if (!train_set.contains(r)) throw ParameterError("alternating_fit: subset row outside the training set");
    }
    auto gather = [&](std::span<const std::size_t> rows) {
        std::vector<int> y;
        y.reserve(rows.size());
        for (auto r : rows) y.push_back(labels[r]);
        return y;
    };
    const auto y_sub = gather(subset_rows);
    const auto y_train = gather(train_rows);

    FitResult out;
    out.start_risk = std::numeric_limits<double>::quiet_NaN();
    bool first = true;
    auto objective = [&](const FitPoint& p) {
        const double risk = subset_risk(builder(p, subset_rows), y_sub, cfg.svm, cfg.objective);
        if (first) {
            out.start_risk = risk;
            first = false;
        }
        return risk;
    };
    const auto search = minimize_on_simplices(objective, layout, cfg.optimizer, start, observer);
    out.point = search.point;
    out.evals = search.eval_count;
    out.best_risk = search.eval_count > 0 ? search.best_value : out.start_risk;
    out.model = train(builder(out.point, train_rows), y_train, cfg.svm);
    return out;
}

/// Single-simplex form (linear combination over one register).
inline FitResult alternating_fit(const SimplexGramBuilder& builder, std::span<const int> labels,
                                 std::span<const std::size_t> train_rows, std::span<const std::size_t> subset_rows,
                                 const SimplexPoint& start, const FitConfig& cfg, const FitObserver& observer = {}) {
    const FitLayout layout{{start.dim()}, 0};
    return alternating_fit([&](const FitPoint& p, std::span<const std::size_t> rows) { return builder(p.blocks.front(), rows); },
                           labels, train_rows, subset_rows, layout, FitPoint{{start}, {}}, cfg, observer);
}

}  // namespace qmkl
