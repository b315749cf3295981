#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mimgan/data.hpp"
#include "mimgan/metrics.hpp"

using namespace mimgan;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
    const fs::path p = fs::temp_directory_path() / ("mimgan_test_" + tag);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("sample_gaussian: moments at n=16000") {
    const TabularDataset ds = sample_gaussian(4.0, 1.25, 16000, 2024);
    REQUIRE(ds.n() == 16000);
    REQUIRE(ds.dim() == 1);
    double s = 0.0, s2 = 0.0;
    for (double v : ds.features.data()) {
        s += v;
        s2 += v * v;
    }
    const double mean = s / 16000.0;
    const double sd = std::sqrt(s2 / 16000.0 - mean * mean);
    CHECK(std::abs(mean - 4.0) < 0.05);
    CHECK(std::abs(sd - 1.25) < 0.05);
}

TEST_CASE("sample_gaussian: edge cases") {
    CHECK(sample_gaussian(0.0, 1.0, 0, 1).n() == 0);
    const TabularDataset tight = sample_gaussian(2.0, 1e-6, 100, 3);
    for (double v : tight.features.data()) CHECK(std::abs(v - 2.0) < 1e-5);
    CHECK_THROWS_AS(sample_gaussian(0.0, 0.0, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(sample_gaussian(0.0, -1.0, 10, 1), std::invalid_argument);
}

TEST_CASE("synth benchmark: labels and fraction bookkeeping") {
    const TabularDataset ds = synth_anomaly_benchmark(950, 50, 6, 3.0, 7);
    CHECK(ds.n() == 1000);
    CHECK(ds.dim() == 6);
    CHECK(ds.anomaly_fraction() == doctest::Approx(0.05));

    const TabularDataset clean = synth_anomaly_benchmark(100, 0, 2, 3.0, 7);
    for (int l : clean.labels) CHECK(l == 0);
}

TEST_CASE("synth benchmark: zero separation is indistinguishable") {
    // any fixed scorer should hover at AUC 1/2; use distance from origin
    double auc_sum = 0.0;
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        const TabularDataset ds = synth_anomaly_benchmark(400, 100, 4, 0.0, seed);
        std::vector<double> scores(ds.n());
        for (std::size_t i = 0; i < ds.n(); ++i) {
            double d2 = 0.0;
            for (std::size_t j = 0; j < ds.dim(); ++j)
                d2 += ds.features.at(i, j) * ds.features.at(i, j);
            scores[i] = d2;
        }
        auc_sum += roc_auc(scores, ds.labels).auc;
    }
    CHECK(std::abs(auc_sum / 3.0 - 0.5) < 0.1);
}

TEST_CASE("csv: load with and without label column") {
    const fs::path dir = temp_dir("csv");
    {
        std::ofstream f(dir / "mini.csv");
        f << "a,b,label\n1,2,0\n3,4,1\n";
    }
    const TabularDataset ds = load_tabular_csv((dir / "mini.csv").string(), "label");
    REQUIRE(ds.n() == 2);
    REQUIRE(ds.dim() == 2);
    CHECK(ds.features.at(0, 0) == 1);
    CHECK(ds.features.at(1, 1) == 4);
    REQUIRE(ds.has_labels());
    CHECK(ds.labels[0] == 0);
    CHECK(ds.labels[1] == 1);
    CHECK(ds.feature_names[0] == "a");

    const TabularDataset no_labels = load_tabular_csv((dir / "mini.csv").string());
    CHECK_FALSE(no_labels.has_labels());
    CHECK(no_labels.dim() == 3);
}

TEST_CASE("csv: error contracts name the offending cell") {
    const fs::path dir = temp_dir("csv_err");
    {
        std::ofstream f(dir / "bad.csv");
        f << "a,b\n1,2\n3,4\n5,6\n7,8\n9,x\n";
    }
    try {
        load_tabular_csv((dir / "bad.csv").string());
        FAIL("expected malformed-cell error");
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        CHECK(msg.find("row 5") != std::string::npos);
        CHECK(msg.find("b") != std::string::npos);
        CHECK(msg.find("'x'") != std::string::npos);
    }
    CHECK_THROWS_AS(load_tabular_csv((dir / "absent.csv").string()), std::runtime_error);
    CHECK_THROWS_AS(load_tabular_csv((dir / "bad.csv").string(), "nope"), std::invalid_argument);
}

TEST_CASE("csv: write/load round trip is stable") {
    const fs::path dir = temp_dir("csv_rt");
    TabularDataset ds = synth_anomaly_benchmark(20, 5, 3, 2.0, 99);
    const std::string p1 = (dir / "one.csv").string();
    const std::string p2 = (dir / "two.csv").string();
    save_tabular_csv(ds, p1);
    const TabularDataset back = load_tabular_csv(p1, "label");
    save_tabular_csv(back, p2);
    CHECK(slurp(p1) == slurp(p2));
    CHECK(back.labels == ds.labels);
}

TEST_CASE("split: normal-only training protocol") {
    TabularDataset ds = synth_anomaly_benchmark(100, 10, 2, 3.0, 5);
    const auto [train, test] = split_train_test(ds, 0.8, SplitMode::NormalOnlyTrain, 11);
    CHECK(train.n() == 80);
    CHECK(test.n() == 30);
    for (int l : train.labels) CHECK(l == 0);
    std::size_t anomalies = 0;
    for (int l : test.labels) anomalies += (l == 1);
    CHECK(anomalies == 10);
}

TEST_CASE("split: random mode and determinism") {
    TabularDataset ds = synth_anomaly_benchmark(8, 2, 2, 3.0, 5);
    const auto [a_train, a_test] = split_train_test(ds, 0.5, SplitMode::Random, 21);
    CHECK(a_train.n() == 5);
    CHECK(a_test.n() == 5);
    const auto [b_train, b_test] = split_train_test(ds, 0.5, SplitMode::Random, 21);
    CHECK(a_train.features.data() == b_train.features.data());
    CHECK(a_test.labels == b_test.labels);

    TabularDataset unlabeled = sample_gaussian(0.0, 1.0, 10, 1);
    CHECK_THROWS_AS(split_train_test(unlabeled, 0.8, SplitMode::NormalOnlyTrain, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(split_train_test(ds, 1.0, SplitMode::Random, 1), std::invalid_argument);
}

TEST_CASE("normalization: train stats applied unchanged to test") {
    TabularDataset train;
    train.features = DenseMatrix::from_rows({{0.0, 10.0}, {2.0, 30.0}});
    train.feature_names = default_feature_names(2);
    const NormStats st = fit_minmax(train);
    CHECK(st.min[0] == 0.0);
    CHECK(st.max[1] == 30.0);

    const TabularDataset tn = apply_minmax(train, st);
    CHECK(tn.features.at(0, 0) == doctest::Approx(-1.0));
    CHECK(tn.features.at(1, 0) == doctest::Approx(1.0));

    TabularDataset test;
    test.features = DenseMatrix::from_rows({{1.0, 40.0}});
    test.feature_names = train.feature_names;
    const TabularDataset sn = apply_minmax(test, st);
    CHECK(sn.features.at(0, 0) == doctest::Approx(0.0));
    // outside the train range maps outside [-1,1]; stats are not refitted
    CHECK(sn.features.at(0, 1) == doctest::Approx(2.0));
    REQUIRE(sn.norm.has_value());
}

TEST_CASE("normalization: constant feature maps to zero") {
    TabularDataset train;
    train.features = DenseMatrix::from_rows({{5.0}, {5.0}});
    train.feature_names = {"c"};
    const TabularDataset tn = apply_minmax(train, fit_minmax(train));
    CHECK(tn.features.at(0, 0) == 0.0);
    CHECK(tn.features.at(1, 0) == 0.0);
}
