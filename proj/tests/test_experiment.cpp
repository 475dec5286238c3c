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

#include <cmath>
#include <filesystem>

#include "qmkl/experiment.hpp"
#include "qmkl/report.hpp"

namespace qmkl {
namespace {

namespace fs = std::filesystem;

ExperimentConfig small_circles(std::size_t instances) {
    ExperimentConfig c;
    c.dataset.n_per_class = 40;
    c.instance_count = instances;
    c.optimizer.max_evals = 30;
    c.master_seed = 5;
    return c;
}

TEST(Summary, PopulationMomentsAndQuartiles) {
    const SummaryStats s = summarize({4.0, 1.0, 3.0, 2.0});
    EXPECT_DOUBLE_EQ(s.mean, 2.5);
    EXPECT_DOUBLE_EQ(s.stddev, std::sqrt(1.25));
    EXPECT_DOUBLE_EQ(s.median, 2.5);
    EXPECT_DOUBLE_EQ(s.q25, 1.75);
    EXPECT_DOUBLE_EQ(s.q75, 3.25);
    EXPECT_EQ(s.min, 1.0);
    EXPECT_EQ(s.max, 4.0);
    EXPECT_EQ(s.values, (std::vector<double>{4.0, 1.0, 3.0, 2.0}));
}

TEST(Summary, InclusiveQuantileOracle) {
    // Odd count: quartiles land on elements.
    const SummaryStats s = summarize({10, 20, 30, 40, 50});
    EXPECT_EQ(s.q25, 20.0);
    EXPECT_EQ(s.median, 30.0);
    EXPECT_EQ(s.q75, 40.0);
    EXPECT_DOUBLE_EQ(quantile_inclusive({0, 10}, 0.3), 3.0);
    EXPECT_EQ(quantile_inclusive({7}, 0.9), 7.0);
    EXPECT_THROW(quantile_inclusive({}, 0.5), ParameterError);
}

TEST(Summary, SingleValueCollapses) {
    const SummaryStats s = summarize({71.5});
    for (double v : {s.min, s.q25, s.median, s.q75, s.max}) EXPECT_EQ(v, 71.5);
    EXPECT_EQ(s.stddev, 0.0);
}

TEST(Experiment, AggregatesRecomputableFromRawArrays) {
    const ResultStats r = run_experiment(small_circles(4));
    ASSERT_EQ(r.models.size(), 3U);
    EXPECT_EQ(r.outcomes.size(), 12U);
    for (const auto& m : r.models) {
        std::vector<double> test;
        for (const auto& o : r.outcomes)
            if (o.variant == m.variant) test.push_back(o.test_accuracy);
        EXPECT_EQ(test, m.test.values);
        const SummaryStats again = summarize(test);
        EXPECT_NEAR(again.mean, m.test.mean, 1e-12);
        EXPECT_NEAR(again.stddev, m.test.stddev, 1e-12);
        for (double v : m.test.values) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 100.0);
        }
    }
    for (std::size_t k = 0; k < r.outcomes.size(); ++k) EXPECT_EQ(r.outcomes[k].instance, k / 3);
}

TEST(Experiment, ZeroBudgetQmklEqualsFixed) {
    ExperimentConfig c = small_circles(1);
    c.variants = {KernelVariant::FixedQMKL, KernelVariant::QMKL};
    c.r = 1.0;
    c.optimizer.max_evals = 0;
    const ResultStats r = run_experiment(c);
    ASSERT_EQ(r.outcomes.size(), 2U);
    EXPECT_EQ(r.outcomes[0].train_accuracy, r.outcomes[1].train_accuracy);
    EXPECT_EQ(r.outcomes[0].test_accuracy, r.outcomes[1].test_accuracy);
    EXPECT_EQ(r.outcomes[0].weights, r.outcomes[1].weights);
}

TEST(Experiment, DeterministicAcrossRunsAndWorkers) {
    ExperimentConfig c = small_circles(3);
    const ResultStats a = run_experiment(c);
    const ResultStats b = run_experiment(c);
    c.workers = 3;
    const ResultStats w = run_experiment(c);
    EXPECT_EQ(raw_csv(a), raw_csv(b));
    EXPECT_EQ(trace_csv(a), trace_csv(b));
    EXPECT_EQ(raw_csv(a), raw_csv(w));
    EXPECT_EQ(summary_json(c, a).dump(), summary_json(c, w).dump());
}

TEST(Experiment, SeedChangesResults) {
    ExperimentConfig c = small_circles(2);
    const ResultStats a = run_experiment(c);
    c.master_seed = 6;
    EXPECT_NE(raw_csv(a), raw_csv(run_experiment(c)));
}

TEST(Experiment, FailuresAreRecorded) {
    ExperimentConfig c = small_circles(3);
    c.dataset.n_per_class = 1;  // two rows: the split leaves no test set
    const ResultStats r = run_experiment(c);
    EXPECT_EQ(r.failed_instances, 3U);
    EXPECT_TRUE(r.too_many_failures());
    for (const auto& o : r.outcomes) {
        EXPECT_FALSE(o.ok);
        EXPECT_FALSE(o.error.empty());
    }
    for (const auto& m : r.models) EXPECT_TRUE(m.test.values.empty());
    EXPECT_NE(raw_csv(r).find("failed"), std::string::npos);
}

TEST(Experiment, FailureThreshold) {
    ResultStats r;
    r.instance_count = 20;
    r.failed_instances = 2;
    EXPECT_FALSE(r.too_many_failures());
    r.failed_instances = 3;
    EXPECT_TRUE(r.too_many_failures());
}

TEST(Experiment, ConfigValidation) {
    ExperimentConfig c = small_circles(0);
    EXPECT_THROW(run_experiment(c), ConfigError);
    c = small_circles(1);
    c.dataset.kind = DatasetKind::GermanCredit;
    c.dataset.path = "/nonexistent/german.data";
    EXPECT_THROW(run_experiment(c), ConfigError);
    c = small_circles(1);
    c.pattern = "ring";
    const ResultStats r = run_experiment(c);
    EXPECT_EQ(r.failed_instances, 1U);
}

TEST(Experiment, PartitionedAndRestrictedVariants) {
    ExperimentConfig c = small_circles(1);
    c.partition_sizes = {1, 1};
    c.variants = {KernelVariant::Multiplicative, KernelVariant::AdditiveMultiplicative};
    const ResultStats r = run_experiment(c);
    ASSERT_EQ(r.failed_instances, 0U) << r.outcomes[0].error;
    EXPECT_EQ(r.outcomes[1].weights.size(), 4U);

    ExperimentConfig q = small_circles(1);
    q.restricted_state = true;
    q.variants = {KernelVariant::QMKL};
    const ResultStats rq = run_experiment(q);
    ASSERT_EQ(rq.failed_instances, 0U) << rq.outcomes[0].error;
    const auto& w = rq.outcomes[0].weights;
    ASSERT_EQ(w.size(), 4U);
    EXPECT_NEAR(w[0] * w[3], w[1] * w[2], 1e-12);  // product state
}

TEST(Experiment, ShotModeRuns) {
    ExperimentConfig c = small_circles(1);
    c.dataset.n_per_class = 12;
    c.mode = EstimationMode::Shots;
    c.shots = 200;
    c.optimizer.max_evals = 5;
    const ResultStats a = run_experiment(c);
    ASSERT_EQ(a.failed_instances, 0U) << a.outcomes[0].error;
    EXPECT_EQ(raw_csv(a), raw_csv(run_experiment(c)));
}

TEST(Experiment, TraceMatchesEvaluationCount) {
    const ResultStats r = run_experiment(small_circles(1));
    for (const auto& o : r.outcomes) {
        if (o.variant == KernelVariant::QMKL) {
            EXPECT_EQ(o.trace.size(), o.evals);
            EXPECT_LE(o.evals, 30U);
            for (const auto& t : o.trace) {
                double s = 0.0;
                for (double w : t.weights) s += w;
                EXPECT_NEAR(s, 1.0, 1e-10);
            }
        } else {
            EXPECT_TRUE(o.trace.empty());
        }
    }
}

TEST(Boxplot, WhiskersAreObservedExtremes) {
    const ResultStats r = run_experiment(small_circles(5));
    const Json b = boxplot_json(r);
    ASSERT_EQ(b.at("series").size(), 6U);
    for (const auto& s : b.at("series")) {
        const auto pts = s.at("points").get<std::vector<double>>();
        EXPECT_EQ(s.at("whisker_low").get<double>(), *std::min_element(pts.begin(), pts.end()));
        EXPECT_EQ(s.at("whisker_high").get<double>(), *std::max_element(pts.begin(), pts.end()));
        EXPECT_LE(s.at("q25").get<double>(), s.at("median").get<double>());
        EXPECT_LE(s.at("median").get<double>(), s.at("q75").get<double>());
    }
}

TEST(Boxplot, SingleInstanceFiveNumbersEqual) {
    const ResultStats r = run_experiment(small_circles(1));
    for (const auto& s : boxplot_json(r).at("series")) {
        const double v = s.at("points")[0].get<double>();
        for (const auto* k : {"whisker_low", "q25", "median", "q75", "whisker_high"}) EXPECT_EQ(s.at(k).get<double>(), v);
    }
}

TEST(Boxplot, RebuildFromSummary) {
    const ExperimentConfig c = small_circles(3);
    const ResultStats r = run_experiment(c);
    const ResultStats back = stats_from_summary(Json::parse(summary_json(c, r).dump()));
    EXPECT_EQ(boxplot_json(back).dump(), boxplot_json(r).dump());
    EXPECT_THROW(boxplot_json(ResultStats{}), ParameterError);
}

TEST(Tune, SingleCellEqualsExperiment) {
    ExperimentConfig c = small_circles(2);
    c.depth = 1;
    c.optimizer.initial_step = 0.25;
    const TuneReport t = tune(c, {1}, {0.25}, 2);
    ASSERT_EQ(t.cells.size(), 1U);
    EXPECT_EQ(t.best, 0U);
    EXPECT_EQ(t.target, KernelVariant::QMKL);
    const ResultStats direct = run_experiment(c);
    EXPECT_EQ(summary_json(c, t.cells[0].stats).dump(), summary_json(c, direct).dump());
    EXPECT_EQ(tune_json(c, t).at("cells")[0].at("summary").dump(), summary_json(c, direct).dump());
}

TEST(Tune, ReportsArgmaxAndEveryCell) {
    ExperimentConfig c = small_circles(2);
    c.variants = {KernelVariant::SQKL, KernelVariant::FixedQMKL};
    const TuneReport t = tune(c, {1, 2}, {0.2, 0.3}, 2);
    ASSERT_EQ(t.cells.size(), 4U);
    EXPECT_EQ(t.target, KernelVariant::SQKL);
    EXPECT_EQ(t.cells[1].depth, 1);
    EXPECT_EQ(t.cells[1].h, 0.3);
    EXPECT_EQ(t.cells[2].depth, 2);
    double best = -1.0;
    for (const auto& cell : t.cells) best = std::max(best, cell.stats.find(KernelVariant::SQKL)->test.mean);
    EXPECT_EQ(t.cells[t.best].stats.find(KernelVariant::SQKL)->test.mean, best);
    const std::string csv = tune_csv(t);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 4 * 2);
    EXPECT_THROW(tune(c, {}, {0.3}, 2), ConfigError);
}

TEST(Report, ConfigKeysAndDefaults) {
    TuneGrid g;
    const auto c = experiment_from_config(KeyValues::parse_string(
                                              "dataset = german\n"
                                              "german.path = x.data\n"
                                              "variants = sqkl, qmkl\n"
                                              "mode = shots:100\n"
                                              "instances = 7\n"
                                              "tune.depths = 1,2\n"
                                              "tune.h = 0.38\n"),
                                          &g);
    EXPECT_EQ(c.dataset.kind, DatasetKind::GermanCredit);
    EXPECT_EQ(c.r, 0.5);
    EXPECT_EQ(c.optimizer.initial_step, 0.38);
    EXPECT_EQ(c.variants, (std::vector<KernelVariant>{KernelVariant::SQKL, KernelVariant::QMKL}));
    EXPECT_EQ(c.mode, EstimationMode::Shots);
    EXPECT_EQ(c.shots, 100U);
    EXPECT_EQ(c.instance_count, 7U);
    EXPECT_EQ(g.depths, (std::vector<int>{1, 2}));
    EXPECT_EQ(g.hs, (std::vector<double>{0.38}));

    const auto d = experiment_from_config(KeyValues::parse_string(""));
    EXPECT_EQ(d.dataset.kind, DatasetKind::Circles);
    EXPECT_EQ(d.r, 0.6);
    EXPECT_EQ(d.optimizer.initial_step, 0.3);
    EXPECT_EQ(d.depth, 2);
    EXPECT_EQ(d.mode, EstimationMode::Exact);

    EXPECT_THROW(experiment_from_config(KeyValues::parse_string("dataset = iris\n")), ConfigError);
    EXPECT_THROW(experiment_from_config(KeyValues::parse_string("detph = 3\n")), ConfigError);
    EXPECT_THROW(experiment_from_config(KeyValues::parse_string("objective = l2\n")), ConfigError);
}

TEST(Report, WritesAllOutputs) {
    const fs::path dir = fs::temp_directory_path() / "qmkl_report_outputs";
    fs::remove_all(dir);
    const ExperimentConfig c = small_circles(2);
    const ResultStats r = run_experiment(c);
    write_experiment(c, r, dir);
    for (const auto* f : {"raw.csv", "summary.json", "trace.csv", "boxplot.json"}) EXPECT_TRUE(fs::exists(dir / f)) << f;
    const Json s = Json::parse(read_file(dir / "summary.json"));
    EXPECT_EQ(s.at("format"), "qmkl-experiment");
    EXPECT_EQ(s.at("models").size(), 3U);
    fs::remove_all(dir);
}

}  // namespace
}  // namespace qmkl
