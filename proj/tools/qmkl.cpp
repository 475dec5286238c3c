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

// qmkl command-line harness.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qmkl/report.hpp"

namespace {

using namespace qmkl;

struct Common {
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<unsigned> workers;
    std::string mode;
};

void add_common(CLI::App* app, Common& c, bool out_required) {
    app->add_option("--seed", c.seed, "master seed");
    auto* o = app->add_option("--out", c.out, "output path");
    if (out_required) o->required();
    app->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
    app->add_option("--mode", c.mode, "exact | shots:<count>");
}

KernelSpec kernel_from_flags(const std::string& kernel_config, const std::string& variant, int depth,
                             const std::string& pattern, const std::vector<double>& weights,
                             const std::vector<int>& partitions, int features) {
    if (!kernel_config.empty()) {
        const auto kv = KeyValues::parse_file(kernel_config);
        auto spec = spec_from_config(kv);
        kv.check_all_used();
        return spec;
    }
    const auto v = parse_variant(variant);
    if (!v) throw ConfigError("unknown kernel variant '" + variant + "'");
    std::vector<int> sizes = partitions.empty() ? std::vector<int>{features} : partitions;
    std::vector<Partition> parts;
    for (int q : sizes) {
        DiagonalMixedState st = DiagonalMixedState::fully_mixed(q);
        if (*v == KernelVariant::SQKL || *v == KernelVariant::Multiplicative) st = DiagonalMixedState::basis(q, 0);
        parts.push_back({parse_pattern(pattern, q), st, {}});
    }
    if (!weights.empty()) {
        if (parts.size() != 1) throw ConfigError("--weights needs a single partition");
        parts[0].state = DiagonalMixedState(weights);
    }
    return make_partitioned(*v, depth, std::move(parts));
}

int run(int argc, char** argv) {
    CLI::App app{"Quantum multiple kernel learning simulator and benchmark harness"};
    app.require_subcommand(1);

    // gen-circles
    Common gc;
    std::size_t n_per_class = 350;
    double ratio = 0.8;
    double noise = 0.1;
    bool no_scaling = false;
    std::vector<double> scaling_range;
    auto* gen = app.add_subcommand("gen-circles", "generate the two-circles dataset (CSV + JSON sidecar)");
    add_common(gen, gc, true);
    gen->add_option("--n-per-class", n_per_class, "samples per class")->check(CLI::PositiveNumber);
    gen->add_option("--ratio", ratio, "inner radius / outer radius");
    gen->add_option("--noise", noise, "Gaussian noise sigma per coordinate");
    gen->add_flag("--no-scaling", no_scaling, "keep raw coordinates");
    gen->add_option("--scaling", scaling_range, "target range LO HI")->expected(2);

    // gram
    Common gr;
    std::string data_path;
    std::string kernel_config;
    std::string variant = "fixed-qmkl";
    int depth = 2;
    std::string pattern = "chain";
    std::vector<double> weights;
    std::vector<int> partitions;
    auto* gram_cmd = app.add_subcommand("gram", "compute a Gram matrix (CSV + JSON envelope)");
    add_common(gram_cmd, gr, true);
    gram_cmd->add_option("--data", data_path, "dataset CSV")->required()->check(CLI::ExistingFile);
    gram_cmd->add_option("--kernel", kernel_config, "kernel spec config file")->check(CLI::ExistingFile);
    gram_cmd->add_option("--variant", variant, "sqkl | fixed-qmkl | qmkl | multiplicative | additive-multiplicative");
    gram_cmd->add_option("--depth", depth, "encoding depth d")->check(CLI::PositiveNumber);
    gram_cmd->add_option("--pattern", pattern, "chain | all-pairs | singletons | explicit '1;2;1,2'");
    gram_cmd->add_option("--weights", weights, "initial-state weights (single partition)")->delimiter(',');
    gram_cmd->add_option("--partitions", partitions, "qubits per partition")->delimiter(',');

    // train
    Common tr;
    std::string gram_path;
    std::string labels_path;
    SvmConfig svm;
    bool no_bias = false;
    auto* train_cmd = app.add_subcommand("train", "train an SVM on a precomputed Gram matrix (model JSON)");
    add_common(train_cmd, tr, true);
    train_cmd->add_option("--gram", gram_path, "Gram JSON envelope")->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--data", labels_path, "dataset CSV providing labels")->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--c", svm.box_c, "box constraint C")->check(CLI::PositiveNumber);
    train_cmd->add_option("--tol", svm.tol, "KKT tolerance")->check(CLI::PositiveNumber);
    train_cmd->add_flag("--no-bias", no_bias, "train without a bias term");

    // experiment / tune
    Common ex;
    std::string config_path;
    std::optional<std::size_t> instances;
    auto* exp_cmd = app.add_subcommand("experiment", "run the SQKL / fixed-QMKL / QMKL comparison");
    add_common(exp_cmd, ex, false);
    exp_cmd->add_option("--config", config_path, "experiment config file")->required()->check(CLI::ExistingFile);
    exp_cmd->add_option("--instances", instances, "override instance count")->check(CLI::PositiveNumber);

    Common tu;
    std::string tune_config;
    std::vector<int> depths;
    std::vector<double> hs;
    std::optional<std::size_t> tune_instances;
    auto* tune_cmd = app.add_subcommand("tune", "grid search over depth d and rhobeg h");
    add_common(tune_cmd, tu, false);
    tune_cmd->add_option("--config", tune_config, "experiment config file")->required()->check(CLI::ExistingFile);
    tune_cmd->add_option("--depths", depths, "depth grid")->delimiter(',');
    tune_cmd->add_option("--rhobeg", hs, "rhobeg grid h")->delimiter(',');
    tune_cmd->add_option("--instances", tune_instances, "instances per cell")->check(CLI::PositiveNumber);

    // boxplot
    Common bp;
    std::string summary_path;
    auto* box_cmd = app.add_subcommand("boxplot", "emit box-plot data from an experiment summary");
    add_common(box_cmd, bp, true);
    box_cmd->add_option("--summary", summary_path, "summary.json from experiment")->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    if (gen->parsed()) {
        ScalingTarget target;
        if (no_scaling) target = ScalingTarget::none();
        if (!scaling_range.empty()) target = {true, scaling_range[0], scaling_range[1]};
        const Dataset d = generate_circles(n_per_class, ratio, noise, gc.seed.value_or(0), target);
        write_dataset(d, gc.out);
        std::cout << "wrote " << d.size() << " rows to " << gc.out << "\n";
        return 0;
    }
    if (gram_cmd->parsed()) {
        const Dataset d = read_dataset(data_path);
        KernelSpec spec = kernel_from_flags(kernel_config, variant, depth, pattern, weights, partitions,
                                            static_cast<int>(d.features.cols()));
        if (!gr.mode.empty()) spec.estimation = parse_mode(gr.mode, spec.estimation.master_seed);
        if (gr.seed) spec.estimation.master_seed = *gr.seed;
        const GramMatrix g = gram(d.features, spec, {gr.workers.value_or(1)});
        const auto psd = validate_psd(g);
        Json extra{{"kernel", spec_to_config(spec)}, {"min_eigenvalue", psd.min_eigenvalue}, {"psd", psd.passed}};
        write_gram(g, gr.out, extra);
        if (!psd.passed) std::cerr << "warning: Gram matrix min eigenvalue " << psd.min_eigenvalue << "\n";
        std::cout << "wrote " << gr.out << ".csv and " << gr.out << ".json\n";
        return 0;
    }
    if (train_cmd->parsed()) {
        const GramMatrix g = read_gram(gram_path);
        const Dataset d = read_dataset(labels_path);
        svm.use_bias = !no_bias;
        TrainedModel m = train(g, d.labels, svm);
        m.training_ref = std::filesystem::path(gram_path).filename().string();
        const double acc = accuracy(decide(m, g.values), d.labels);
        Json j = model_json(m);
        j["train_accuracy"] = acc;
        write_text(tr.out, j.dump(2) + "\n");
        for (const auto& w : m.warnings) std::cerr << "warning: " << w << "\n";
        std::cout << "training accuracy " << acc << ", " << m.support_indices.size() << " support vectors\n";
        return 0;
    }
    auto load_config = [](const std::string& path, const Common& c, TuneGrid* grid) {
        auto kv = KeyValues::parse_file(path);
        if (c.seed) kv.set("seed", std::to_string(*c.seed));
        if (!c.out.empty()) kv.set("out", c.out);
        if (c.workers) kv.set("workers", std::to_string(*c.workers));
        if (!c.mode.empty()) kv.set("mode", c.mode);
        return experiment_from_config(kv, grid);
    };
    if (exp_cmd->parsed()) {
        ExperimentConfig cfg = load_config(config_path, ex, nullptr);
        if (instances) cfg.instance_count = *instances;
        const ResultStats r = run_experiment(cfg);
        if (!cfg.output_dir.empty()) write_experiment(cfg, r, cfg.output_dir);
        for (const auto& m : r.models) {
            std::printf("%-24s train %6.2f +- %5.2f   test %6.2f +- %5.2f   (n=%zu)\n", to_string(m.variant), m.train.mean,
                        m.train.stddev, m.test.mean, m.test.stddev, m.test.values.size());
        }
        if (r.failed_instances) std::cerr << r.failed_instances << " instance(s) failed\n";
        return r.too_many_failures() ? 2 : 0;
    }
    if (tune_cmd->parsed()) {
        TuneGrid grid;
        ExperimentConfig cfg = load_config(tune_config, tu, &grid);
        if (!depths.empty()) grid.depths = depths;
        if (!hs.empty()) grid.hs = hs;
        if (tune_instances) grid.instances = *tune_instances;
        const TuneReport rep = tune(cfg, grid.depths, grid.hs, grid.instances);
        if (!cfg.output_dir.empty()) write_tune(cfg, rep, cfg.output_dir);
        std::cout << tune_csv(rep);
        const auto& best = rep.cells[rep.best];
        std::cout << "best (" << to_string(rep.target) << "): d=" << best.depth << " h=" << best.h << "\n";
        return 0;
    }
    if (box_cmd->parsed()) {
        const Json summary = Json::parse(read_file(summary_path));
        emit_boxplot_data(stats_from_summary(summary), bp.out);
        std::cout << "wrote " << bp.out << "\n";
        return 0;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const qmkl::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
