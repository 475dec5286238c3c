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

// File formats: Gram matrices (CSV + JSON envelope), trained models (JSON),
// datasets (CSV + JSON sidecar) and the key = value config format.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qmkl/data.hpp"
#include "qmkl/errors.hpp"
#include "qmkl/kernels.hpp"
#include "qmkl/svm.hpp"

namespace qmkl {

using Json = nlohmann::ordered_json;

/// Shortest text that round-trips the double exactly.
inline std::string format_double(double v) {
    char buf[32];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

inline double parse_double(const std::string& s, const std::string& where) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ParseError(where + ": '" + s + "' is not a number");
    }
    if (used != s.size()) throw ParseError(where + ": '" + s + "' is not a number");
    return v;
}

inline std::uint64_t parse_u64(const std::string& s, const std::string& where) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
        throw ParseError(where + ": '" + s + "' is not a non-negative integer");
    }
    try {
        return std::stoull(s);
    } catch (const std::exception&) {
        throw ParseError(where + ": '" + s + "' is out of range");
    }
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::ofstream open_for_write(const std::filesystem::path& p) {
    if (p.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
    }
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot write '" + p.string() + "'");
    return out;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read '" + p.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    auto out = open_for_write(p);
    out << text;
    if (!out) throw IoError("write to '" + p.string() + "' failed");
}

// ---------------------------------------------------------------- estimation

/// "exact" or "shots:<count>".
inline Estimation parse_mode(const std::string& s, std::uint64_t master_seed = 0) {
    if (s == "exact") return Estimation::exact();
    if (s.rfind("shots:", 0) == 0) {
        const auto n = parse_u64(s.substr(6), "mode");
        if (n < 2) throw ConfigError("mode: shot count must be >= 2");
        return Estimation::with_shots(n, master_seed);
    }
    throw ConfigError("mode must be 'exact' or 'shots:<count>', got '" + s + "'");
}

inline std::string mode_string(EstimationMode m, std::uint64_t shots) {
    return m == EstimationMode::Exact ? "exact" : "shots:" + std::to_string(shots);
}

// ---------------------------------------------------------------- gram

inline std::string matrix_csv(const Eigen::MatrixXd& m) {
    std::string s;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) s += ',';
            s += format_double(m(r, c));
        }
        s += '\n';
    }
    return s;
}

inline Eigen::MatrixXd parse_matrix_csv(const std::string& text, const std::string& what) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    std::size_t ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        line = trim(line);
        if (line.empty()) continue;
        std::vector<double> row;
        std::size_t col = 0;
        for (const auto& cell : split(line, ',')) {
            ++col;
            row.push_back(parse_double(trim(cell), what + " row " + std::to_string(ln) + " column " + std::to_string(col)));
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw ParseError(what + " row " + std::to_string(ln) + ": ragged row");
        }
        rows.push_back(std::move(row));
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    return m;
}

inline Json provenance_json(const GramProvenance& p) {
    return Json{{"mode", mode_string(p.mode, p.shots)}, {"shots", p.shots}, {"master_seed", p.master_seed}};
}

inline GramProvenance provenance_from_json(const Json& j) {
    const auto e = parse_mode(j.at("mode").get<std::string>(), j.at("master_seed").get<std::uint64_t>());
    return {e.mode, e.shots, e.master_seed};
}

/// Writes `<stem>.csv` (plain numbers) and `<stem>.json` (provenance plus the same values).
inline void write_gram(const GramMatrix& g, const std::filesystem::path& stem, const Json& extra = Json::object()) {
    auto csv = stem;
    csv += ".csv";
    auto js = stem;
    js += ".json";
    write_text(csv, matrix_csv(g.values));
    Json env;
    env["format"] = "qmkl-gram";
    env["rows"] = g.values.rows();
    env["cols"] = g.values.cols();
    env["provenance"] = provenance_json(g.provenance);
    env["csv"] = csv.filename().string();
    for (auto it = extra.begin(); it != extra.end(); ++it) env[it.key()] = it.value();
    Json values = Json::array();
    for (Eigen::Index r = 0; r < g.values.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < g.values.cols(); ++c) row.push_back(g.values(r, c));
        values.push_back(std::move(row));
    }
    env["values"] = std::move(values);
    write_text(js, env.dump(2) + "\n");
}

/// Reads a Gram JSON envelope.
inline GramMatrix read_gram(const std::filesystem::path& json_path) {
    Json env;
    try {
        env = Json::parse(read_file(json_path));
    } catch (const Json::exception& e) {
        throw ParseError(json_path.string() + ": " + e.what());
    }
    if (env.value("format", "") != "qmkl-gram") throw ParseError(json_path.string() + ": not a Gram envelope");
    GramMatrix g;
    g.provenance = provenance_from_json(env.at("provenance"));
    const auto& vals = env.at("values");
    const auto n = static_cast<Eigen::Index>(vals.size());
    g.values.resize(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        if (vals[static_cast<std::size_t>(r)].size() != static_cast<std::size_t>(n)) {
            throw ShapeError(json_path.string() + ": Gram matrix is not square");
        }
        for (Eigen::Index c = 0; c < n; ++c) g.values(r, c) = vals[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
    }
    return g;
}

// ---------------------------------------------------------------- model

inline Json model_json(const TrainedModel& m) {
    return Json{{"format", "qmkl-model"},
                {"box_c", m.box_c},
                {"bias", m.bias},
                {"dual_objective", m.dual_objective},
                {"iterations", m.iterations},
                {"training_ref", m.training_ref},
                {"support_indices", m.support_indices},
                {"duals", m.duals},
                {"beta", m.beta},
                {"warnings", m.warnings}};
}

inline TrainedModel model_from_json(const Json& j) {
    if (j.value("format", "") != "qmkl-model") throw ParseError("not a model file");
    TrainedModel m;
    m.box_c = j.at("box_c").get<double>();
    m.bias = j.at("bias").get<double>();
    m.dual_objective = j.at("dual_objective").get<double>();
    m.iterations = j.at("iterations").get<std::size_t>();
    m.training_ref = j.at("training_ref").get<std::string>();
    m.support_indices = j.at("support_indices").get<std::vector<std::size_t>>();
    m.duals = j.at("duals").get<std::vector<double>>();
    m.beta = j.at("beta").get<std::vector<double>>();
    m.warnings = j.at("warnings").get<std::vector<std::string>>();
    return m;
}

// ---------------------------------------------------------------- dataset

/// `<path>` gets the table (f0..f{p-1},label; scaled features); the sidecar
/// `<path>.json` carries name, seed, raw values and the scaling record.
inline void write_dataset(const Dataset& d, const std::filesystem::path& path) {
    std::string s;
    for (Eigen::Index c = 0; c < d.features.cols(); ++c) s += "f" + std::to_string(c) + ",";
    s += "label\n";
    for (Eigen::Index r = 0; r < d.features.rows(); ++r) {
        for (Eigen::Index c = 0; c < d.features.cols(); ++c) s += format_double(d.features(r, c)) + ",";
        s += std::to_string(d.labels[static_cast<std::size_t>(r)]) + "\n";
    }
    write_text(path, s);
    Json side{{"format", "qmkl-dataset"}, {"name", d.name}, {"seed", d.seed}, {"rows", d.size()},
              {"features", d.features.cols()}};
    Json sc = Json::array();
    for (const auto& f : d.scaling) {
        sc.push_back({{"min", f.min}, {"max", f.max}, {"target_lo", f.target_lo}, {"target_hi", f.target_hi}});
    }
    side["scaling"] = std::move(sc);
    auto sidecar = path;
    sidecar += ".json";
    write_text(sidecar, side.dump(2) + "\n");
}

inline Dataset read_dataset(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    std::istringstream in(text);
    std::string header;
    std::getline(in, header);
    const auto cols = split(trim(header), ',');
    if (cols.size() < 2 || cols.back() != "label") throw ParseError(path.string() + ": header must end with 'label'");
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::string line;
    std::size_t ln = 1;
    while (std::getline(in, line)) {
        ++ln;
        line = trim(line);
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != cols.size()) {
            throw ParseError(path.string() + " row " + std::to_string(ln) + ": expected " + std::to_string(cols.size()) + " columns");
        }
        std::vector<double> row;
        for (std::size_t c = 0; c + 1 < cells.size(); ++c) {
            row.push_back(parse_double(cells[c], path.string() + " row " + std::to_string(ln) + " column " + std::to_string(c + 1)));
        }
        const std::string& lab = cells.back();
        if (lab != "1" && lab != "-1") {
            throw ParseError(path.string() + " row " + std::to_string(ln) + " column " + std::to_string(cells.size()) + ": label must be 1 or -1");
        }
        labels.push_back(lab == "1" ? 1 : -1);
        rows.push_back(std::move(row));
    }
    Dataset d;
    d.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size() - 1));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c) d.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    d.labels = std::move(labels);
    d.raw = d.features;
    auto sidecar = path;
    sidecar += ".json";
    if (std::filesystem::exists(sidecar)) {
        const Json side = Json::parse(read_file(sidecar));
        d.name = side.value("name", "");
        d.seed = side.value("seed", std::uint64_t{0});
        for (const auto& f : side.at("scaling")) {
            d.scaling.push_back({f.at("min").get<double>(), f.at("max").get<double>(), f.at("target_lo").get<double>(),
                                 f.at("target_hi").get<double>()});
        }
        if (!d.scaling.empty()) {
            if (d.scaling.size() != static_cast<std::size_t>(d.features.cols())) {
                throw ParseError(sidecar.string() + ": scaling record does not match the feature count");
            }
            for (Eigen::Index r = 0; r < d.raw.rows(); ++r)
                for (Eigen::Index c = 0; c < d.raw.cols(); ++c) d.raw(r, c) = d.scaling[static_cast<std::size_t>(c)].invert(d.features(r, c));
        }
    }
    return d;
}

// ---------------------------------------------------------------- config

/// Parsed `key = value` file. '#' starts a comment; blank lines are ignored;
/// keys may repeat only once (duplicates are an error). Every key must be
/// consumed, so typos surface as errors from `check_all_used`.
class KeyValues {
public:
    static KeyValues parse(std::istream& in, const std::string& origin = "config") {
        KeyValues kv;
        kv.origin_ = origin;
        std::string line;
        std::size_t ln = 0;
        while (std::getline(in, line)) {
            ++ln;
            if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                throw ConfigError(origin + ":" + std::to_string(ln) + ": expected 'key = value'");
            }
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty()) throw ConfigError(origin + ":" + std::to_string(ln) + ": empty key");
            if (kv.entries_.contains(key)) {
                throw ConfigError(origin + ":" + std::to_string(ln) + ": duplicate key '" + key + "'");
            }
            kv.entries_[key] = {value, ln, false};
        }
        return kv;
    }

    static KeyValues parse_file(const std::filesystem::path& p) {
        std::ifstream in(p);
        if (!in) throw IoError("cannot read config '" + p.string() + "'");
        return parse(in, p.string());
    }

    static KeyValues parse_string(const std::string& s) {
        std::istringstream in(s);
        return parse(in);
    }

    bool has(const std::string& key) const { return entries_.contains(key); }

    void set(const std::string& key, const std::string& value) { entries_[key] = {value, 0, false}; }

    std::optional<std::string> get(const std::string& key) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        it->second.used = true;
        return it->second.value;
    }

    std::string get_or(const std::string& key, const std::string& fallback) const {
        return get(key).value_or(fallback);
    }

    double get_double(const std::string& key, double fallback) const {
        auto v = get(key);
        return v ? parse_double(*v, where(key)) : fallback;
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
        auto v = get(key);
        return v ? parse_u64(*v, where(key)) : fallback;
    }

    bool get_bool(const std::string& key, bool fallback) const {
        auto v = get(key);
        if (!v) return fallback;
        if (*v == "true" || *v == "1" || *v == "yes") return true;
        if (*v == "false" || *v == "0" || *v == "no") return false;
        throw ConfigError(where(key) + ": expected true/false, got '" + *v + "'");
    }

    template <class T, class Conv>
    std::vector<T> get_list(const std::string& key, std::vector<T> fallback, Conv conv) const {
        auto v = get(key);
        if (!v) return fallback;
        std::vector<T> out;
        for (const auto& item : split(*v, ',')) {
            const auto t = trim(item);
            if (t.empty()) throw ConfigError(where(key) + ": empty list item");
            out.push_back(conv(t));
        }
        return out;
    }

    std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const {
        return get_list<double>(key, std::move(fallback), [&](const std::string& t) { return parse_double(t, where(key)); });
    }

    std::vector<int> get_ints(const std::string& key, std::vector<int> fallback) const {
        return get_list<int>(key, std::move(fallback), [&](const std::string& t) {
            const double d = parse_double(t, where(key));
            if (d != std::floor(d)) throw ConfigError(where(key) + ": '" + t + "' is not an integer");
            return static_cast<int>(d);
        });
    }

    void check_all_used() const {
        for (const auto& [k, e] : entries_) {
            if (!e.used) throw ConfigError(where(k) + ": unknown key '" + k + "'");
        }
    }

    std::string where(const std::string& key) const {
        auto it = entries_.find(key);
        return origin_ + (it != entries_.end() && it->second.line ? ":" + std::to_string(it->second.line) : "") + " (" + key + ")";
    }

private:
    struct Entry {
        std::string value;
        std::size_t line = 0;
        mutable bool used = false;
    };
    std::map<std::string, Entry> entries_;
    std::string origin_;
};

// ---------------------------------------------------------------- kernel spec

inline std::string pattern_string(const EncodingPattern& p) {
    std::string s;
    for (const auto& c : p.subsets()) {
        if (!s.empty()) s += ';';
        for (std::size_t k = 0; k < c.size(); ++k) s += (k ? "," : "") + std::to_string(c[k]);
    }
    return s;
}

/// Named pattern (chain, all-pairs, singletons) or an explicit subset list
/// such as "1;2;1,2" (subsets separated by ';', qubits by ',').
inline EncodingPattern parse_pattern(const std::string& s, int num_qubits) {
    if (s == "chain") return EncodingPattern::chain(num_qubits);
    if (s == "all-pairs") return EncodingPattern::all_pairs(num_qubits);
    if (s == "singletons") return EncodingPattern::singletons(num_qubits);
    std::vector<std::vector<int>> subsets;
    for (const auto& part : split(s, ';')) {
        std::vector<int> c;
        for (const auto& q : split(part, ',')) {
            const auto t = trim(q);
            c.push_back(static_cast<int>(parse_u64(t, "pattern")));
        }
        subsets.push_back(std::move(c));
    }
    try {
        return EncodingPattern(num_qubits, std::move(subsets));
    } catch (const Error& e) {
        throw ConfigError(std::string("pattern: ") + e.what());
    }
}

inline const char* axis_string(RotationAxis a) {
    switch (a) {
        case RotationAxis::X: return "x";
        case RotationAxis::Y: return "y";
        case RotationAxis::Z: return "z";
    }
    return "z";
}

inline RotationAxis parse_axis(const std::string& s) {
    if (s == "x") return RotationAxis::X;
    if (s == "y") return RotationAxis::Y;
    if (s == "z") return RotationAxis::Z;
    throw ConfigError("rotation axis must be x, y or z, got '" + s + "'");
}

inline std::string join_doubles(std::span<const double> v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
    return s;
}

/// Kernel spec in the config format (keys prefixed `kernel.`).
inline std::string spec_to_config(const KernelSpec& spec) {
    std::string s;
    s += "kernel.variant = " + std::string(to_string(spec.variant)) + "\n";
    s += "kernel.depth = " + std::to_string(spec.depth) + "\n";
    s += "kernel.mode = " + mode_string(spec.estimation.mode, spec.estimation.shots) + "\n";
    s += "kernel.seed = " + std::to_string(spec.estimation.master_seed) + "\n";
    s += "kernel.restricted_state = " + std::string(spec.restricted_state ? "true" : "false") + "\n";
    s += "kernel.partitions = " + std::to_string(spec.partitions.size()) + "\n";
    for (std::size_t p = 0; p < spec.partitions.size(); ++p) {
        const auto& part = spec.partitions[p];
        const std::string k = "kernel.p" + std::to_string(p + 1) + ".";
        s += k + "qubits = " + std::to_string(part.num_qubits()) + "\n";
        s += k + "pattern = " + pattern_string(part.pattern) + "\n";
        s += k + "state = " + join_doubles(part.state.weights()) + "\n";
        if (!part.theta.empty()) {
            s += k + "axis = " + axis_string(part.theta.axis) + "\n";
            std::string t;
            for (std::size_t b = 0; b < part.theta.blocks.size(); ++b) t += (b ? ";" : "") + join_doubles(part.theta.blocks[b]);
            s += k + "theta = " + t + "\n";
        }
    }
    return s;
}

inline KernelSpec spec_from_config(const KeyValues& kv) {
    KernelSpec spec;
    const auto variant = parse_variant(kv.get_or("kernel.variant", "sqkl"));
    if (!variant) throw ConfigError(kv.where("kernel.variant") + ": unknown kernel variant");
    spec.variant = *variant;
    spec.depth = static_cast<int>(kv.get_u64("kernel.depth", 1));
    spec.estimation = parse_mode(kv.get_or("kernel.mode", "exact"), kv.get_u64("kernel.seed", 0));
    spec.restricted_state = kv.get_bool("kernel.restricted_state", false);
    const auto parts = kv.get_u64("kernel.partitions", 1);
    for (std::uint64_t p = 1; p <= parts; ++p) {
        const std::string k = "kernel.p" + std::to_string(p) + ".";
        const int q = static_cast<int>(kv.get_u64(k + "qubits", 0));
        if (q < 1) throw ConfigError(kv.where(k + "qubits") + ": partition needs a qubit count");
        Partition part{parse_pattern(kv.get_or(k + "pattern", "chain"), q), DiagonalMixedState::basis(q, 0), {}};
        if (auto st = kv.get(k + "state")) {
            std::vector<double> w;
            for (const auto& t : split(*st, ',')) w.push_back(parse_double(trim(t), kv.where(k + "state")));
            part.state = DiagonalMixedState(std::move(w));
        }
        if (auto th = kv.get(k + "theta")) {
            part.theta.axis = parse_axis(kv.get_or(k + "axis", "z"));
            for (const auto& b : split(*th, ';')) {
                std::vector<double> angles;
                for (const auto& t : split(b, ',')) angles.push_back(parse_double(trim(t), kv.where(k + "theta")));
                part.theta.blocks.push_back(std::move(angles));
            }
        }
        spec.partitions.push_back(std::move(part));
    }
    validate(spec);
    return spec;
}

}  // namespace qmkl
