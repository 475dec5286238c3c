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

// Seeded multi-instance experiment runner: SQKL / fixed-QMKL / QMKL model
// comparison, (depth, rhobeg) grid search and summary statistics.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "qmkl/data.hpp"
#include "qmkl/fit.hpp"
#include "qmkl/kernels.hpp"
#include "qmkl/parallel.hpp"

namespace qmkl {

enum class DatasetKind { Circles, GermanCredit };

struct DatasetSource {
    DatasetKind kind = DatasetKind::Circles;
    std::size_t n_per_class = 350;
    double ratio = 0.8;
    double noise_sigma = 0.1;
    std::string path;  // german credit file
    std::vector<int> attributes = kGermanDefaultAttributes;
    ScalingTarget scaling;
};

struct ExperimentConfig {
    DatasetSource dataset;
    std::vector<KernelVariant> variants = {KernelVariant::SQKL, KernelVariant::FixedQMKL, KernelVariant::QMKL};
    std::string pattern = "chain";      // chain | all-pairs | singletons
    std::vector<int> partition_sizes;  // empty: one partition over all features
    bool restricted_state = false;
    int depth = 2;
    OptimizerConfig optimizer;
    SvmConfig svm;
    RiskObjective objective = RiskObjective::ZeroOne;
    double r = 0.6;
    double train_fraction = 0.75;
    EstimationMode mode = EstimationMode::Exact;
    std::uint64_t shots = 0;
    std::size_t instance_count = 100;
    std::uint64_t master_seed = 0;
    unsigned workers = 1;
    std::string output_dir;  // empty: nothing written
    bool write_trace = true;
};

inline void validate(const ExperimentConfig& c) {
    if (c.instance_count < 1) throw ConfigError("experiment: instance count must be >= 1");
    if (c.variants.empty()) throw ConfigError("experiment: no model variants");
    if (c.depth < 1) throw ConfigError("experiment: depth must be >= 1");
    if (c.dataset.kind == DatasetKind::GermanCredit && !std::filesystem::exists(c.dataset.path)) {
        throw ConfigError("experiment: dataset file '" + c.dataset.path + "' does not exist");
    }
    if (c.mode == EstimationMode::Shots && c.shots < 2) throw ConfigError("experiment: shot mode needs >= 2 shots");
    if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0)) throw ConfigError("experiment: train fraction must lie in (0, 1)");
    if (!(c.r > 0.0 && c.r <= 1.0)) throw ConfigError("experiment: r must lie in (0, 1]");
    if (!(c.svm.box_c > 0.0)) throw ConfigError("experiment: C must be positive");
    try {
        validate(c.optimizer);
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("experiment: ") + e.what());
    }
}

inline EncodingPattern make_pattern(const std::string& id, int num_qubits) {
    if (id == "chain") return EncodingPattern::chain(num_qubits);
    if (id == "all-pairs") return EncodingPattern::all_pairs(num_qubits);
    if (id == "singletons") return EncodingPattern::singletons(num_qubits);
    throw ConfigError("unknown encoding pattern '" + id + "'");
}

/// Summary of one sample of accuracies. Quartiles use inclusive linear
/// interpolation: q(p) = v[floor(h)] + (h - floor(h)) (v[floor(h)+1] - v[floor(h)]), h = p (n - 1).
struct SummaryStats {
    std::vector<double> values;
    double mean = 0.0;
    double stddev = 0.0;  // population
    double median = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
    double min = 0.0;
    double max = 0.0;

    friend bool operator==(const SummaryStats&, const SummaryStats&) = default;
};

inline double quantile_inclusive(std::vector<double> sorted, double p) {
    if (sorted.empty()) throw ParameterError("quantile of an empty sample");
    std::sort(sorted.begin(), sorted.end());
    const double h = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

inline SummaryStats summarize(std::vector<double> values) {
    SummaryStats s;
    s.values = std::move(values);
    if (s.values.empty()) return s;
    const double n = static_cast<double>(s.values.size());
    s.mean = std::accumulate(s.values.begin(), s.values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : s.values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / n);
    s.median = quantile_inclusive(s.values, 0.5);
    s.q25 = quantile_inclusive(s.values, 0.25);
    s.q75 = quantile_inclusive(s.values, 0.75);
    s.min = *std::min_element(s.values.begin(), s.values.end());
    s.max = *std::max_element(s.values.begin(), s.values.end());
    return s;
}

struct TracePoint {
    std::size_t eval = 0;
    double risk = 0.0;
    std::vector<double> weights;  // concatenated partition weights
};

struct InstanceOutcome {
    std::size_t instance = 0;
    KernelVariant variant = KernelVariant::SQKL;
    bool ok = false;
    std::string error;
    double train_accuracy = 0.0;  // percent
    double test_accuracy = 0.0;   // percent
    std::vector<double> weights;  // final partition weights, concatenated
    std::size_t evals = 0;
    std::vector<TracePoint> trace;
};

struct VariantStats {
    KernelVariant variant = KernelVariant::SQKL;
    SummaryStats train;
    SummaryStats test;
};

struct ResultStats {
    std::vector<VariantStats> models;
    std::vector<InstanceOutcome> outcomes;  // sorted by (instance, variant order)
    std::size_t failed_instances = 0;
    std::size_t instance_count = 0;

    bool too_many_failures() const { return failed_instances * 10 > instance_count; }
    const VariantStats* find(KernelVariant v) const {
        for (const auto& m : models)
            if (m.variant == v) return &m;
        return nullptr;
    }
};

namespace detail {

inline Dataset load_dataset(const DatasetSource& src, std::uint64_t seed) {
    if (src.kind == DatasetKind::Circles) {
        return generate_circles(src.n_per_class, src.ratio, src.noise_sigma, seed, src.scaling);
    }
    return load_german_credit(src.path, src.attributes, src.scaling);
}

inline std::vector<int> partition_layout(const ExperimentConfig& c, int features) {
    if (c.partition_sizes.empty()) return {features};
    const int total = std::accumulate(c.partition_sizes.begin(), c.partition_sizes.end(), 0);
    if (total != features) {
        throw ConfigError("experiment: partition sizes sum to " + std::to_string(total) + " but the dataset has " +
                          std::to_string(features) + " features");
    }
    return c.partition_sizes;
}

// Base spec with fully mixed states; the runner swaps states per variant.
inline KernelSpec base_spec(const ExperimentConfig& c, KernelVariant v, int features) {
    KernelSpec s;
    s.variant = v;
    s.depth = c.depth;
    s.restricted_state = c.restricted_state;
    for (int q : partition_layout(c, features)) {
        s.partitions.push_back(Partition{make_pattern(c.pattern, q), DiagonalMixedState::fully_mixed(q), {}});
    }
    // Single-partition tags do not admit several partitions.
    if (s.partitions.size() > 1 && v != KernelVariant::Multiplicative) s.variant = KernelVariant::AdditiveMultiplicative;
    return s;
}

inline std::vector<DiagonalMixedState> states_for(const KernelSpec& s, bool pure) {
    std::vector<DiagonalMixedState> out;
    for (const auto& p : s.partitions) {
        out.push_back(pure ? DiagonalMixedState::basis(p.num_qubits(), 0)
                           : DiagonalMixedState::fully_mixed(p.num_qubits()));
    }
    return out;
}

// Fit layout: one simplex per partition, or one 2-simplex per qubit when the
// state is restricted to a product of single-qubit diagonal states.
inline FitLayout fit_layout(const KernelSpec& s) {
    FitLayout l;
    for (const auto& p : s.partitions) {
        if (s.restricted_state) {
            for (int q = 0; q < p.num_qubits(); ++q) l.block_dims.push_back(2);
        } else {
            l.block_dims.push_back(p.state.dim());
        }
    }
    return l;
}

inline std::vector<DiagonalMixedState> states_from_point(const KernelSpec& s, const FitPoint& p) {
    std::vector<DiagonalMixedState> out;
    std::size_t b = 0;
    for (const auto& part : s.partitions) {
        if (s.restricted_state) {
            std::vector<double> p_zero;
            for (int q = 0; q < part.num_qubits(); ++q) p_zero.push_back(p.blocks[b++].weights()[0]);
            out.push_back(DiagonalMixedState::product_of_qubits(p_zero));
        } else {
            out.push_back(DiagonalMixedState(std::vector<double>(p.blocks[b].weights().begin(), p.blocks[b].weights().end())));
            ++b;
        }
    }
    return out;
}

inline FitPoint uniform_point(const FitLayout& l) {
    FitPoint p;
    for (auto d : l.block_dims) p.blocks.push_back(SimplexPoint::uniform(d));
    return p;
}

inline std::vector<double> flatten(const std::vector<DiagonalMixedState>& states) {
    std::vector<double> w;
    for (const auto& s : states) w.insert(w.end(), s.weights().begin(), s.weights().end());
    return w;
}

inline std::vector<int> gather_labels(const std::vector<int>& labels, std::span<const std::size_t> rows) {
    std::vector<int> y;
    for (auto r : rows) y.push_back(labels[r]);
    return y;
}

// Gram blocks for arbitrary partition states: cached components in exact
// mode, fresh simulation in shot mode.
class GramSource {
public:
    GramSource(const Dataset& data, const KernelSpec& base, const ExperimentConfig& c, std::uint64_t instance_seed,
               std::shared_ptr<const ComponentGrams> cached, unsigned workers)
        : data_(data), base_(base), workers_(workers), components_(std::move(cached)) {
        if (c.mode == EstimationMode::Shots) {
            base_.estimation = Estimation::with_shots(c.shots, derive_seed(instance_seed, SeedStage::Shots));
        } else if (!components_) {
            components_ = std::make_shared<const ComponentGrams>(data.features, base_, workers);
        }
    }

    GramMatrix train_gram(const std::vector<DiagonalMixedState>& states, std::span<const std::size_t> rows) const {
        if (components_) return components_->gram(states, rows);
        KernelSpec s = with_states(base_, states);
        s.variant = KernelVariant::AdditiveMultiplicative;
        return gram(data_.features, s, rows, {workers_});
    }

    Eigen::MatrixXd cross(const std::vector<DiagonalMixedState>& states, std::span<const std::size_t> train_rows,
                          std::span<const std::size_t> new_rows) const {
        if (components_) return components_->assemble(states, train_rows, new_rows);
        KernelSpec s = with_states(base_, states);
        s.variant = KernelVariant::AdditiveMultiplicative;
        return gram_cross(data_.features, train_rows, new_rows, s, {workers_});
    }

private:
    const Dataset& data_;
    KernelSpec base_;
    unsigned workers_;
    std::shared_ptr<const ComponentGrams> components_;
};

inline double percent_accuracy(const TrainedModel& m, const Eigen::MatrixXd& cross, const std::vector<int>& y) {
    return 100.0 * accuracy(decide(m, cross), y);
}

inline InstanceOutcome run_variant(const ExperimentConfig& c, KernelVariant v, std::size_t instance,
                                   const Dataset& data, const SplitPlan& split, const GramSource& source,
                                   const KernelSpec& base) {
    InstanceOutcome out;
    out.instance = instance;
    out.variant = v;
    const auto y_train = gather_labels(data.labels, split.train);
    const auto y_test = gather_labels(data.labels, split.test);

    std::vector<DiagonalMixedState> states;
    TrainedModel model;
    switch (v) {
        case KernelVariant::SQKL:
        case KernelVariant::Multiplicative:
            states = states_for(base, true);
            break;
        case KernelVariant::FixedQMKL:
            states = states_for(base, false);
            break;
        case KernelVariant::QMKL:
        case KernelVariant::AdditiveMultiplicative: {
            const FitLayout layout = fit_layout(base);
            FitConfig fc{c.svm, c.optimizer, c.objective};
            fc.optimizer.seed = derive_seed(c.master_seed, SeedStage::Optimizer, instance);
            FitObserver observer;
            if (c.write_trace) {
                observer = [&](std::size_t e, const FitPoint& p, double risk) {
                    out.trace.push_back({e, risk, flatten(states_from_point(base, p))});
                };
            }
            auto builder = [&](const FitPoint& p, std::span<const std::size_t> rows) {
                return source.train_gram(states_from_point(base, p), rows);
            };
            const FitResult fit =
                alternating_fit(builder, data.labels, split.train, split.opt_subset, layout, uniform_point(layout), fc, observer);
            states = states_from_point(base, fit.point);
            out.evals = fit.evals;
            break;
        }
    }
    KernelSpec checked = with_states(base, states);
    checked.variant = v;
    validate(checked);

    const GramMatrix g_train = source.train_gram(states, split.train);
    model = train(g_train, y_train, c.svm);
    out.train_accuracy = percent_accuracy(model, g_train.values, y_train);
    out.test_accuracy = percent_accuracy(model, source.cross(states, split.train, split.test), y_test);
    out.weights = flatten(states);
    out.ok = true;
    return out;
}

}  // namespace detail

/// Runs every variant on instance_count seeded dataset/split instances.
/// Failed (instance, variant) runs are recorded and excluded from the statistics.
inline ResultStats run_experiment(const ExperimentConfig& c) {
    validate(c);
    const bool shared_dataset = c.dataset.kind == DatasetKind::GermanCredit;
    std::optional<Dataset> shared;
    std::shared_ptr<const ComponentGrams> shared_components;
    const unsigned outer = c.instance_count > 1 ? std::max(1U, c.workers) : 1U;
    const unsigned inner = c.instance_count > 1 ? 1U : std::max(1U, c.workers);
    if (shared_dataset) {
        shared = detail::load_dataset(c.dataset, 0);
        if (c.mode == EstimationMode::Exact) {
            const KernelSpec base = detail::base_spec(c, KernelVariant::FixedQMKL, static_cast<int>(shared->raw.cols()));
            shared_components = std::make_shared<const ComponentGrams>(shared->features, base, std::max(1U, c.workers));
        }
    }

    std::vector<std::vector<InstanceOutcome>> per_instance(c.instance_count);
    parallel_for(c.instance_count, outer, [&](std::size_t i) {
        auto& slot = per_instance[i];
        auto fail_all = [&](const std::string& msg) {
            slot.clear();
            for (auto v : c.variants) slot.push_back({i, v, false, msg, 0.0, 0.0, {}, 0, {}});
        };
        try {
            const Dataset data = shared_dataset ? *shared
                                                : detail::load_dataset(c.dataset, derive_seed(c.master_seed, SeedStage::Dataset, i));
            const SplitPlan split = make_split(data.size(), c.train_fraction, c.r, derive_seed(c.master_seed, SeedStage::Split, i));
            const int features = static_cast<int>(data.features.cols());
            const KernelSpec base = detail::base_spec(c, KernelVariant::FixedQMKL, features);
            const detail::GramSource source(data, base, c, derive_seed(c.master_seed, {i}), shared_components, inner);
            for (auto v : c.variants) {
                try {
                    slot.push_back(detail::run_variant(c, v, i, data, split, source, base));
                } catch (const std::exception& e) {
                    slot.push_back({i, v, false, e.what(), 0.0, 0.0, {}, 0, {}});
                }
            }
        } catch (const std::exception& e) {
            fail_all(e.what());
        }
    });

    ResultStats stats;
    stats.instance_count = c.instance_count;
    for (auto& slot : per_instance) {
        bool failed = false;
        for (auto& o : slot) {
            failed = failed || !o.ok;
            stats.outcomes.push_back(std::move(o));
        }
        if (failed) ++stats.failed_instances;
    }
    for (auto v : c.variants) {
        std::vector<double> tr;
        std::vector<double> te;
        for (const auto& o : stats.outcomes) {
            if (o.variant == v && o.ok) {
                tr.push_back(o.train_accuracy);
                te.push_back(o.test_accuracy);
            }
        }
        stats.models.push_back({v, summarize(tr), summarize(te)});
    }
    return stats;
}

struct TuneCell {
    int depth = 1;
    double h = 0.3;
    ResultStats stats;
};

struct TuneReport {
    std::vector<TuneCell> cells;  // depth-major order
    std::size_t best = 0;         // argmax of mean test accuracy of the target variant
    KernelVariant target = KernelVariant::QMKL;
};

/// Grid search over (depth, rhobeg). The target variant is QMKL when it is
/// part of the config, otherwise the first listed variant. Ties keep the first cell.
inline TuneReport tune(const ExperimentConfig& base, const std::vector<int>& depths, const std::vector<double>& hs,
                       std::size_t tuning_instances) {
    if (depths.empty() || hs.empty()) throw ConfigError("tune: empty grid");
    TuneReport rep;
    rep.target = std::find(base.variants.begin(), base.variants.end(), KernelVariant::QMKL) != base.variants.end()
                     ? KernelVariant::QMKL
                     : base.variants.front();
    double best = -1.0;
    for (int d : depths) {
        for (double h : hs) {
            ExperimentConfig c = base;
            c.depth = d;
            c.optimizer.initial_step = h;
            c.instance_count = tuning_instances;
            c.output_dir.clear();
            TuneCell cell{d, h, run_experiment(c)};
            const auto* m = cell.stats.find(rep.target);
            const double score = (m && !m->test.values.empty()) ? m->test.mean : -1.0;
            if (score > best) {
                best = score;
                rep.best = rep.cells.size();
            }
            rep.cells.push_back(std::move(cell));
        }
    }
    return rep;
}

}  // namespace qmkl
