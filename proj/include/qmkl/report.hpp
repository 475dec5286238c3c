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

// Experiment config parsing and result emission (raw CSV, JSON summary,
// optimizer trace, tuning grid, box-plot data).

#include <filesystem>
#include <string>

#include "qmkl/experiment.hpp"
#include "qmkl/io.hpp"

namespace qmkl {

struct TuneGrid {
    std::vector<int> depths = {1, 2, 3};
    std::vector<double> hs = {0.1, 0.2, 0.3, 0.4, 0.5};
    std::size_t instances = 20;
};

/// Reads an experiment description; see README "Config format" for the keys.
inline ExperimentConfig experiment_from_config(const KeyValues& kv, TuneGrid* grid = nullptr) {
    ExperimentConfig c;
    const std::string ds = kv.get_or("dataset", "circles");
    if (ds == "circles") {
        c.dataset.kind = DatasetKind::Circles;
        c.r = 0.6;
        c.optimizer.initial_step = 0.3;
    } else if (ds == "german") {
        c.dataset.kind = DatasetKind::GermanCredit;
        c.r = 0.5;
        c.optimizer.initial_step = 0.38;
    } else {
        throw ConfigError(kv.where("dataset") + ": dataset must be 'circles' or 'german'");
    }
    c.dataset.n_per_class = kv.get_u64("circles.n_per_class", c.dataset.n_per_class);
    c.dataset.ratio = kv.get_double("circles.ratio", c.dataset.ratio);
    c.dataset.noise_sigma = kv.get_double("circles.noise", c.dataset.noise_sigma);
    c.dataset.path = kv.get_or("german.path", "data/german.data");
    c.dataset.attributes = kv.get_ints("german.attributes", c.dataset.attributes);
    c.dataset.scaling.enabled = kv.get_bool("scaling.enabled", true);
    c.dataset.scaling.lo = kv.get_double("scaling.lo", c.dataset.scaling.lo);
    c.dataset.scaling.hi = kv.get_double("scaling.hi", c.dataset.scaling.hi);

    c.variants = kv.get_list<KernelVariant>("variants", c.variants, [&](const std::string& t) {
        auto v = parse_variant(t);
        if (!v) throw ConfigError(kv.where("variants") + ": unknown variant '" + t + "'");
        return *v;
    });
    c.pattern = kv.get_or("pattern", c.pattern);
    c.partition_sizes = kv.get_ints("partitions", {});
    c.restricted_state = kv.get_bool("restricted_state", false);
    c.depth = static_cast<int>(kv.get_u64("depth", 2));
    c.optimizer.initial_step = kv.get_double("rhobeg", c.optimizer.initial_step);
    c.optimizer.final_step = kv.get_double("rhoend", c.optimizer.final_step);
    c.optimizer.max_evals = kv.get_u64("max_evals", c.optimizer.max_evals);
    c.svm.box_c = kv.get_double("svm.c", c.svm.box_c);
    c.svm.tol = kv.get_double("svm.tol", c.svm.tol);
    const std::string obj = kv.get_or("objective", "zero-one");
    if (obj == "zero-one") {
        c.objective = RiskObjective::ZeroOne;
    } else if (obj == "hinge") {
        c.objective = RiskObjective::Hinge;
    } else {
        throw ConfigError(kv.where("objective") + ": objective must be 'zero-one' or 'hinge'");
    }
    c.r = kv.get_double("r", c.r);
    c.train_fraction = kv.get_double("train_fraction", c.train_fraction);
    const auto mode = parse_mode(kv.get_or("mode", "exact"));
    c.mode = mode.mode;
    c.shots = mode.shots;
    c.instance_count = kv.get_u64("instances", c.instance_count);
    c.master_seed = kv.get_u64("seed", c.master_seed);
    c.workers = static_cast<unsigned>(kv.get_u64("workers", 1));
    c.output_dir = kv.get_or("out", "");
    c.write_trace = kv.get_bool("trace", true);

    TuneGrid g;
    g.depths = kv.get_ints("tune.depths", g.depths);
    g.hs = kv.get_doubles("tune.h", g.hs);
    g.instances = kv.get_u64("tune.instances", g.instances);
    if (grid) *grid = g;
    kv.check_all_used();
    return c;
}

inline Json config_json(const ExperimentConfig& c) {
    Json variants = Json::array();
    for (auto v : c.variants) variants.push_back(to_string(v));
    Json ds;
    if (c.dataset.kind == DatasetKind::Circles) {
        ds = {{"name", "circles"}, {"n_per_class", c.dataset.n_per_class}, {"ratio", c.dataset.ratio},
              {"noise", c.dataset.noise_sigma}};
    } else {
        ds = {{"name", "german"}, {"path", c.dataset.path}, {"attributes", c.dataset.attributes}};
    }
    ds["scaling"] = c.dataset.scaling.enabled ? Json{{"lo", c.dataset.scaling.lo}, {"hi", c.dataset.scaling.hi}} : Json();
    return Json{{"dataset", ds},
                {"variants", variants},
                {"pattern", c.pattern},
                {"partitions", c.partition_sizes},
                {"restricted_state", c.restricted_state},
                {"depth", c.depth},
                {"rhobeg", c.optimizer.initial_step},
                {"rhoend", c.optimizer.final_step},
                {"max_evals", c.optimizer.max_evals},
                {"svm_c", c.svm.box_c},
                {"svm_tol", c.svm.tol},
                {"objective", c.objective == RiskObjective::ZeroOne ? "zero-one" : "hinge"},
                {"r", c.r},
                {"train_fraction", c.train_fraction},
                {"mode", mode_string(c.mode, c.shots)},
                {"instances", c.instance_count},
                {"seed", c.master_seed}};
}

inline Json stats_json(const SummaryStats& s) {
    return Json{{"mean", s.mean},     {"std", s.stddev}, {"median", s.median}, {"q25", s.q25},
                {"q75", s.q75},       {"min", s.min},    {"max", s.max},       {"n", s.values.size()},
                {"values", s.values}};
}

inline Json summary_json(const ExperimentConfig& c, const ResultStats& r) {
    Json models = Json::array();
    for (const auto& m : r.models) {
        models.push_back({{"variant", to_string(m.variant)}, {"train", stats_json(m.train)}, {"test", stats_json(m.test)}});
    }
    Json failures = Json::array();
    for (const auto& o : r.outcomes) {
        if (!o.ok) failures.push_back({{"instance", o.instance}, {"variant", to_string(o.variant)}, {"error", o.error}});
    }
    return Json{{"format", "qmkl-experiment"},
                {"config", config_json(c)},
                {"accuracy_unit", "percent"},
                {"statistics", "population std; quartiles by inclusive linear interpolation"},
                {"models", models},
                {"failed_instances", r.failed_instances},
                {"failures", failures}};
}

inline std::string raw_csv(const ResultStats& r) {
    std::string s = "instance,variant,status,train_accuracy,test_accuracy,evals,weights\n";
    for (const auto& o : r.outcomes) {
        s += std::to_string(o.instance) + "," + to_string(o.variant) + "," + (o.ok ? "ok" : "failed") + ",";
        s += o.ok ? format_double(o.train_accuracy) + "," + format_double(o.test_accuracy) : std::string(",");
        std::string w;
        for (std::size_t k = 0; k < o.weights.size(); ++k) w += (k ? ";" : "") + format_double(o.weights[k]);
        s += "," + std::to_string(o.evals) + "," + w + "\n";
    }
    return s;
}

/// Optimizer trace: one row per objective evaluation.
inline std::string trace_csv(const ResultStats& r) {
    std::string s = "instance,variant,eval,risk,weights\n";
    for (const auto& o : r.outcomes) {
        for (const auto& t : o.trace) {
            std::string w;
            for (std::size_t k = 0; k < t.weights.size(); ++k) w += (k ? ";" : "") + format_double(t.weights[k]);
            s += std::to_string(o.instance) + "," + to_string(o.variant) + "," + std::to_string(t.eval) + "," +
                 format_double(t.risk) + "," + w + "\n";
        }
    }
    return s;
}

/// Box-plot data: median, quartiles, whiskers (min/max) and raw points per
/// model and phase.
inline Json boxplot_json(const ResultStats& r) {
    if (r.models.empty()) throw ParameterError("boxplot: no statistics");
    Json series = Json::array();
    for (const auto& m : r.models) {
        for (const auto* phase : {"train", "test"}) {
            const SummaryStats& s = std::string(phase) == "train" ? m.train : m.test;
            series.push_back({{"model", to_string(m.variant)},
                              {"phase", phase},
                              {"median", s.median},
                              {"q25", s.q25},
                              {"q75", s.q75},
                              {"whisker_low", s.min},
                              {"whisker_high", s.max},
                              {"points", s.values}});
        }
    }
    return Json{{"format", "qmkl-boxplot"}, {"quartile_method", "inclusive-linear"}, {"series", series}};
}

inline void emit_boxplot_data(const ResultStats& r, const std::filesystem::path& path) {
    write_text(path, boxplot_json(r).dump(2) + "\n");
}

/// Rebuilds ResultStats from a summary JSON (used by the boxplot subcommand).
inline ResultStats stats_from_summary(const Json& j) {
    ResultStats r;
    for (const auto& m : j.at("models")) {
        auto v = parse_variant(m.at("variant").get<std::string>());
        if (!v) throw ParseError("summary: unknown variant");
        r.models.push_back({*v, summarize(m.at("train").at("values").get<std::vector<double>>()),
                            summarize(m.at("test").at("values").get<std::vector<double>>())});
    }
    return r;
}

/// Writes raw.csv, summary.json, trace.csv and boxplot.json into `dir`.
inline void write_experiment(const ExperimentConfig& c, const ResultStats& r, const std::filesystem::path& dir) {
    write_text(dir / "raw.csv", raw_csv(r));
    write_text(dir / "summary.json", summary_json(c, r).dump(2) + "\n");
    if (c.write_trace) write_text(dir / "trace.csv", trace_csv(r));
    bool any = false;
    for (const auto& m : r.models) any = any || !m.test.values.empty();
    if (any) emit_boxplot_data(r, dir / "boxplot.json");
}

inline std::string tune_csv(const TuneReport& t) {
    std::string s = "depth,h,variant,mean_train_accuracy,mean_test_accuracy,std_test_accuracy\n";
    for (const auto& cell : t.cells) {
        for (const auto& m : cell.stats.models) {
            s += std::to_string(cell.depth) + "," + format_double(cell.h) + "," + to_string(m.variant) + "," +
                 format_double(m.train.mean) + "," + format_double(m.test.mean) + "," + format_double(m.test.stddev) + "\n";
        }
    }
    return s;
}

inline Json tune_json(const ExperimentConfig& c, const TuneReport& t) {
    const auto& best = t.cells.at(t.best);
    const auto* m = best.stats.find(t.target);
    Json cells = Json::array();
    for (const auto& cell : t.cells) {
        ExperimentConfig cc = c;
        cc.depth = cell.depth;
        cc.optimizer.initial_step = cell.h;
        cc.instance_count = cell.stats.instance_count;
        cells.push_back({{"depth", cell.depth}, {"h", cell.h}, {"summary", summary_json(cc, cell.stats)}});
    }
    return Json{{"format", "qmkl-tune"},
                {"target_variant", to_string(t.target)},
                {"best", {{"depth", best.depth}, {"h", best.h}, {"mean_test_accuracy", m ? m->test.mean : 0.0}}},
                {"cells", cells}};
}

inline void write_tune(const ExperimentConfig& c, const TuneReport& t, const std::filesystem::path& dir) {
    write_text(dir / "tune_grid.csv", tune_csv(t));
    write_text(dir / "tune.json", tune_json(c, t).dump(2) + "\n");
}

}  // namespace qmkl
