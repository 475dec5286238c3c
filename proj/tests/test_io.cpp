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
#include <random>

#include "qmkl/data.hpp"
#include "qmkl/io.hpp"
#include "qmkl/svm.hpp"

namespace qmkl {
namespace {

namespace fs = std::filesystem;

class TempDir : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("qmkl_io_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    fs::path dir_;
};

TEST(FormatDouble, RoundTripsExactly) {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    for (int i = 0; i < 2000; ++i) {
        const double v = u(gen);
        EXPECT_EQ(std::strtod(format_double(v).c_str(), nullptr), v);
    }
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(1.0), "1");
    EXPECT_EQ(format_double(-0.5), "-0.5");
}

TEST(ParseNumbers, RejectsGarbage) {
    EXPECT_EQ(parse_double("2.5", "x"), 2.5);
    EXPECT_THROW(parse_double("2.5x", "x"), ParseError);
    EXPECT_THROW(parse_double("", "x"), ParseError);
    EXPECT_EQ(parse_u64("42", "x"), 42U);
    EXPECT_THROW(parse_u64("-1", "x"), ParseError);
    EXPECT_THROW(parse_u64("99999999999999999999999", "x"), ParseError);
}

TEST(Mode, ParsesExactAndShots) {
    EXPECT_EQ(parse_mode("exact").mode, EstimationMode::Exact);
    const auto s = parse_mode("shots:2120", 9);
    EXPECT_EQ(s.mode, EstimationMode::Shots);
    EXPECT_EQ(s.shots, 2120U);
    EXPECT_EQ(s.master_seed, 9U);
    EXPECT_EQ(mode_string(s.mode, s.shots), "shots:2120");
    EXPECT_THROW(parse_mode("shots:1"), ConfigError);
    EXPECT_THROW(parse_mode("shots:"), ParseError);
    EXPECT_THROW(parse_mode("sampled"), ConfigError);
}

TEST_F(TempDir, GramRoundTrip) {
    Eigen::MatrixXd m(3, 3);
    m << 1.0, 0.1234567890123456789, -0.3, 0.1234567890123456789, 1.0, 1e-17, -0.3, 1e-17, 1.0;
    const GramMatrix g{m, {EstimationMode::Shots, 1060, 77}};
    write_gram(g, dir_ / "k", Json{{"note", "x"}});
    ASSERT_TRUE(fs::exists(dir_ / "k.csv"));
    const GramMatrix back = read_gram(dir_ / "k.json");
    EXPECT_EQ(back.values, m);
    EXPECT_EQ(back.provenance.mode, EstimationMode::Shots);
    EXPECT_EQ(back.provenance.shots, 1060U);
    EXPECT_EQ(back.provenance.master_seed, 77U);
    EXPECT_EQ(parse_matrix_csv(read_file(dir_ / "k.csv"), "csv"), m);
    EXPECT_EQ(Json::parse(read_file(dir_ / "k.json")).at("note"), "x");
}

TEST_F(TempDir, GramRejectsForeignJson) {
    write_text(dir_ / "x.json", "{\"format\": \"other\"}");
    EXPECT_THROW(read_gram(dir_ / "x.json"), ParseError);
    write_text(dir_ / "y.json", "not json");
    EXPECT_THROW(read_gram(dir_ / "y.json"), ParseError);
    EXPECT_THROW(read_gram(dir_ / "missing.json"), IoError);
}

TEST(MatrixCsv, RejectsRaggedRows) {
    EXPECT_THROW(parse_matrix_csv("1,2\n3\n", "m"), Error);
    EXPECT_THROW(parse_matrix_csv("1,a\n", "m"), ParseError);
}

TEST(Model, JsonRoundTrip) {
    Eigen::MatrixXd k(4, 4);
    k << 1, 0.5, 0.1, 0.2, 0.5, 1, 0.3, 0.1, 0.1, 0.3, 1, 0.6, 0.2, 0.1, 0.6, 1;
    const std::vector<int> y{1, 1, -1, -1};
    TrainedModel m = train(GramMatrix{k, {}}, y);
    m.training_ref = "train.json";
    const TrainedModel back = model_from_json(Json::parse(model_json(m).dump()));
    EXPECT_EQ(back.duals, m.duals);
    EXPECT_EQ(back.beta, m.beta);
    EXPECT_EQ(back.bias, m.bias);
    EXPECT_EQ(back.support_indices, m.support_indices);
    EXPECT_EQ(back.box_c, m.box_c);
    EXPECT_EQ(back.training_ref, "train.json");
    EXPECT_EQ(decide(back, k), decide(m, k));
    EXPECT_THROW(model_from_json(Json{{"format", "qmkl-gram"}}), ParseError);
}

TEST_F(TempDir, DatasetRoundTrip) {
    const Dataset d = generate_circles(30, 0.8, 0.1, 4);
    write_dataset(d, dir_ / "circles.csv");
    const Dataset back = read_dataset(dir_ / "circles.csv");
    EXPECT_EQ(back.features, d.features);
    EXPECT_EQ(back.labels, d.labels);
    EXPECT_EQ(back.name, "circles");
    EXPECT_EQ(back.seed, 4U);
    EXPECT_EQ(back.scaling, d.scaling);
    for (Eigen::Index r = 0; r < d.raw.rows(); ++r)
        for (Eigen::Index c = 0; c < d.raw.cols(); ++c) EXPECT_NEAR(back.raw(r, c), d.raw(r, c), 1e-9);
}

TEST_F(TempDir, DatasetWithoutSidecar) {
    write_text(dir_ / "d.csv", "f0,f1,label\n0.5,1.5,1\n2,3,-1\n");
    const Dataset d = read_dataset(dir_ / "d.csv");
    EXPECT_EQ(d.size(), 2U);
    EXPECT_EQ(d.features(1, 1), 3.0);
    EXPECT_EQ(d.labels, (std::vector<int>{1, -1}));
    EXPECT_TRUE(d.scaling.empty());
}

TEST_F(TempDir, DatasetParseErrors) {
    write_text(dir_ / "a.csv", "f0,label\n0.5,2\n");
    EXPECT_THROW(read_dataset(dir_ / "a.csv"), ParseError);
    write_text(dir_ / "b.csv", "f0,label\n0.5,1,7\n");
    EXPECT_THROW(read_dataset(dir_ / "b.csv"), ParseError);
    write_text(dir_ / "c.csv", "f0,y\n0.5,1\n");
    EXPECT_THROW(read_dataset(dir_ / "c.csv"), ParseError);
}

TEST(KeyValuesTest, ParsesCommentsAndTypes) {
    const auto kv = KeyValues::parse_string(
        "# experiment\n"
        "dataset = circles   # trailing comment\n"
        "\n"
        "  depth=2\n"
        "tune.h = 0.1, 0.2 ,0.3\n"
        "trace = false\n"
        "seed = 18446744073709551615\n");
    EXPECT_EQ(kv.get_or("dataset", ""), "circles");
    EXPECT_EQ(kv.get_u64("depth", 0), 2U);
    EXPECT_EQ(kv.get_doubles("tune.h", {}), (std::vector<double>{0.1, 0.2, 0.3}));
    EXPECT_FALSE(kv.get_bool("trace", true));
    EXPECT_EQ(kv.get_u64("seed", 0), 18446744073709551615ULL);
    EXPECT_EQ(kv.get_double("missing", 1.5), 1.5);
    EXPECT_NO_THROW(kv.check_all_used());
}

TEST(KeyValuesTest, Errors) {
    EXPECT_THROW(KeyValues::parse_string("a = 1\na = 2\n"), ConfigError);
    EXPECT_THROW(KeyValues::parse_string("just words\n"), ConfigError);
    EXPECT_THROW(KeyValues::parse_string(" = 3\n"), ConfigError);
    const auto kv = KeyValues::parse_string("depht = 2\nflag = maybe\nlist = 1,,2\nn = 2.5\n");
    EXPECT_THROW(kv.get_bool("flag", false), ConfigError);
    EXPECT_THROW(kv.get_ints("list", {}), ConfigError);
    EXPECT_THROW(kv.get_ints("n", {}), ConfigError);
    try {
        kv.check_all_used();
        FAIL() << "unknown key not reported";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("depht"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find(":1"), std::string::npos);
    }
}

TEST(PatternText, RoundTrip) {
    const auto chain = EncodingPattern::chain(3);
    EXPECT_EQ(parse_pattern(pattern_string(chain), 3), chain);
    EXPECT_EQ(parse_pattern("all-pairs", 4), EncodingPattern::all_pairs(4));
    const auto custom = parse_pattern("1;2;1,2", 2);
    EXPECT_EQ(pattern_string(custom), "1;2;1,2");
    EXPECT_THROW(parse_pattern("1;5", 2), ConfigError);
}

TEST(KernelSpecConfig, RoundTripsPartitionedSpec) {
    KernelSpec s = make_partitioned(
        KernelVariant::AdditiveMultiplicative, 2,
        {Partition{EncodingPattern::chain(2), DiagonalMixedState({0.1, 0.2, 0.3, 0.4}), KernelParameters::zeros(2, 2, RotationAxis::Y)},
         Partition{EncodingPattern::singletons(1), DiagonalMixedState({0.25, 0.75}), {}}});
    s.partitions[0].theta.blocks[1][0] = 0.123456789;
    s.estimation = Estimation::with_shots(500, 3);
    const KernelSpec back = spec_from_config(KeyValues::parse_string(spec_to_config(s)));
    EXPECT_EQ(back, s);
}

TEST(KernelSpecConfig, RoundTripsNamedVariants) {
    for (const auto& s : {make_sqkl(EncodingPattern::chain(2), 3), make_fixed_qmkl(EncodingPattern::chain(4), 1)}) {
        EXPECT_EQ(spec_from_config(KeyValues::parse_string(spec_to_config(s))), s);
    }
}

TEST(KernelSpecConfig, InvalidSpecsAreRejected) {
    EXPECT_THROW(spec_from_config(KeyValues::parse_string("kernel.variant = nonsense\nkernel.p1.qubits = 2\n")), ConfigError);
    EXPECT_THROW(spec_from_config(KeyValues::parse_string("kernel.variant = fixed-qmkl\nkernel.p1.qubits = 2\n")), ConfigError);
    EXPECT_THROW(spec_from_config(KeyValues::parse_string("kernel.p1.qubits = 0\n")), ConfigError);
}

}  // namespace
}  // namespace qmkl
