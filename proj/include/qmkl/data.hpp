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

// Benchmark datasets: synthetic concentric circles and the UCI German credit
// table, min-max scaled into rotation angles, plus seeded train/test splits.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "qmkl/errors.hpp"
#include "qmkl/kernels.hpp"
#include "qmkl/rng.hpp"

namespace qmkl {

/// Affine map of one feature from [min, max] onto [target_lo, target_hi).
struct FeatureScale {
    double min = 0.0;
    double max = 1.0;
    double target_lo = 0.0;
    double target_hi = std::numbers::pi;

    double apply(double raw) const {
        if (max == min) return target_lo;
        const double s = target_lo + (raw - min) / (max - min) * (target_hi - target_lo);
        return s >= target_hi ? std::nextafter(target_hi, target_lo) : s;
    }

    double invert(double scaled) const {
        if (max == min) return min;
        return min + (scaled - target_lo) / (target_hi - target_lo) * (max - min);
    }

    friend bool operator==(const FeatureScale&, const FeatureScale&) = default;
};

/// Target range for feature scaling; `enabled = false` keeps raw values.
/// The default half period [0, pi) keeps each factor (pi - x) of the pair
/// encoding non-negative, so (x_u, x_v) and (2pi - x_u, 2pi - x_v) do not
/// share a pair phase.
struct ScalingTarget {
    bool enabled = true;
    double lo = 0.0;
    double hi = std::numbers::pi;

    static ScalingTarget none() { return {false, 0.0, 0.0}; }
};

struct Dataset {
    std::string name;
    FeatureMatrix raw;       // before scaling
    FeatureMatrix features;  // what the kernels consume
    std::vector<int> labels;
    std::vector<FeatureScale> scaling;  // empty when unscaled
    std::uint64_t seed = 0;

    std::size_t size() const { return labels.size(); }
};

/// Fits per-feature min-max scaling on all rows and applies it.
inline void apply_scaling(Dataset& d, const ScalingTarget& target) {
    d.features = d.raw;
    d.scaling.clear();
    if (!target.enabled) return;
    if (!(target.hi > target.lo)) throw ParameterError("scaling target range is empty");
    for (Eigen::Index c = 0; c < d.raw.cols(); ++c) {
        FeatureScale s{d.raw.col(c).minCoeff(), d.raw.col(c).maxCoeff(), target.lo, target.hi};
        for (Eigen::Index r = 0; r < d.raw.rows(); ++r) d.features(r, c) = s.apply(d.raw(r, c));
        d.scaling.push_back(s);
    }
}

/// Two noisy concentric circles: label +1 on the inner circle (radius `ratio`),
/// -1 on the unit circle. Inner samples come first.
inline Dataset generate_circles(std::size_t n_per_class, double ratio, double noise_sigma, std::uint64_t seed,
                                const ScalingTarget& target = {}) {
    if (n_per_class < 1) throw ParameterError("generate_circles: need at least one sample per class");
    if (!(ratio > 0.0 && ratio < 1.0)) throw ParameterError("generate_circles: ratio must lie in (0, 1)");
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
        throw ParameterError("generate_circles: noise sigma must be finite and non-negative");
    }
    Dataset d;
    d.name = "circles";
    d.seed = seed;
    const auto n = static_cast<Eigen::Index>(2 * n_per_class);
    d.raw.resize(n, 2);
    d.labels.resize(static_cast<std::size_t>(n));
    Rng rng(seed);
    for (Eigen::Index i = 0; i < n; ++i) {
        const bool inner = i < static_cast<Eigen::Index>(n_per_class);
        const double radius = inner ? ratio : 1.0;
        const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
        d.raw(i, 0) = radius * std::cos(phi);
        d.raw(i, 1) = radius * std::sin(phi);
        if (noise_sigma > 0.0) {
            d.raw(i, 0) += noise_sigma * rng.normal();
            d.raw(i, 1) += noise_sigma * rng.normal();
        }
        d.labels[static_cast<std::size_t>(i)] = inner ? 1 : -1;
    }
    apply_scaling(d, target);
    return d;
}

namespace detail {

struct GermanAttribute {
    bool categorical = false;
    int first_code = 0;  // ordinal 0 corresponds to A<attr><first_code>
    int code_count = 0;
};

inline const std::map<int, GermanAttribute>& german_attributes() {
    static const std::map<int, GermanAttribute> table = {
        {1, {true, 1, 4}},   {2, {false, 0, 0}},  {3, {true, 0, 5}},   {4, {true, 0, 11}},
        {5, {false, 0, 0}},  {6, {true, 1, 5}},   {7, {true, 1, 5}},   {8, {false, 0, 0}},
        {9, {true, 1, 5}},   {10, {true, 1, 3}},  {11, {false, 0, 0}}, {12, {true, 1, 4}},
        {13, {false, 0, 0}}, {14, {true, 1, 3}},  {15, {true, 1, 3}},  {16, {false, 0, 0}},
        {17, {true, 1, 4}},  {18, {false, 0, 0}}, {19, {true, 1, 2}},  {20, {true, 1, 2}},
    };
    return table;
}

inline double decode_german(int attr, const std::string& token, std::size_t row) {
    const auto& spec = german_attributes().at(attr);
    auto fail = [&] {
        return ParseError("german credit: row " + std::to_string(row) + ", column " + std::to_string(attr) +
                          ": cannot decode '" + token + "'");
    };
    if (!spec.categorical) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(token, &used);
        } catch (const std::exception&) {
            throw fail();
        }
        if (used != token.size()) throw fail();
        return v;
    }
    const std::string prefix = "A" + std::to_string(attr);
    if (token.rfind(prefix, 0) != 0 || token.size() == prefix.size()) throw fail();
    const std::string digits = token.substr(prefix.size());
    if (!std::all_of(digits.begin(), digits.end(), [](char ch) { return ch >= '0' && ch <= '9'; })) throw fail();
    const int ordinal = std::stoi(digits) - spec.first_code;
    if (ordinal < 0 || ordinal >= spec.code_count) throw fail();
    return ordinal;
}

}  // namespace detail

/// The four attributes used by default: checking account status, duration,
/// credit history, employment since (1-based UCI attribute numbers).
inline const std::vector<int> kGermanDefaultAttributes = {1, 2, 3, 7};

/// Parses the whitespace-separated UCI german.data layout (21 columns, label
/// 1 = good -> +1, 2 = bad -> -1). Categorical codes become ordinals in UCI order.
inline Dataset parse_german_credit(std::istream& in, const std::vector<int>& attributes = kGermanDefaultAttributes,
                                   const ScalingTarget& target = {}) {
    for (int a : attributes) {
        if (a < 1 || a > 20) throw ParameterError("german credit: attribute " + std::to_string(a) + " out of 1..20");
    }
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ++row;
        std::istringstream ls(line);
        std::vector<std::string> tokens;
        for (std::string t; ls >> t;) tokens.push_back(t);
        if (tokens.size() != 21) {
            throw ParseError("german credit: row " + std::to_string(row) + ": expected 21 columns, got " +
                             std::to_string(tokens.size()));
        }
        std::vector<double> feats;
        for (int a : attributes) feats.push_back(detail::decode_german(a, tokens[a - 1], row));
        if (tokens[20] == "1") {
            labels.push_back(1);
        } else if (tokens[20] == "2") {
            labels.push_back(-1);
        } else {
            throw ParseError("german credit: row " + std::to_string(row) + ", column 21: label '" + tokens[20] +
                             "' is not 1 or 2");
        }
        rows.push_back(std::move(feats));
    }
    if (rows.empty()) throw ParseError("german credit: no data rows");
    Dataset d;
    d.name = "german-credit";
    d.raw.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(attributes.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < attributes.size(); ++c)
            d.raw(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    d.labels = std::move(labels);
    apply_scaling(d, target);
    return d;
}

inline Dataset load_german_credit(const std::string& path, const std::vector<int>& attributes = kGermanDefaultAttributes,
                                  const ScalingTarget& target = {}) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open german credit file '" + path + "'");
    return parse_german_credit(in, attributes, target);
}

struct SplitPlan {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    std::vector<std::size_t> opt_subset;  // drawn from train
    std::uint64_t seed = 0;
    double train_fraction = 0.75;
    double r = 1.0;

    friend bool operator==(const SplitPlan&, const SplitPlan&) = default;
};

/// Seeded shuffle; the first round(train_fraction n) indices train, the rest
/// test; opt_subset is a seeded sample of round(r |train|) training indices.
inline SplitPlan make_split(std::size_t n, double train_fraction, double r, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ParameterError("make_split: train fraction must lie in (0, 1)");
    if (!(r > 0.0 && r <= 1.0)) throw ParameterError("make_split: r must lie in (0, 1]");
    const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    if (n_train == 0 || n_train >= n) throw ParameterError("make_split: split leaves an empty train or test set");
    const auto n_opt = static_cast<std::size_t>(std::llround(r * static_cast<double>(n_train)));
    if (n_opt == 0) throw ParameterError("make_split: optimisation subset is empty");

    SplitPlan plan;
    plan.seed = seed;
    plan.train_fraction = train_fraction;
    plan.r = r;
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    Rng rng(seed);
    rng.shuffle(perm);
    plan.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
    plan.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
    if (n_opt == n_train) {
        plan.opt_subset = plan.train;
    } else {
        std::vector<std::size_t> pick = plan.train;
        Rng sub(derive_seed(seed, SeedStage::Split, 1));
        sub.shuffle(pick);
        plan.opt_subset.assign(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(n_opt));
    }
    return plan;
}

}  // namespace qmkl
