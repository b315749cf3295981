#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mimgan/cli.hpp"

using mimgan::cli::dispatch;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
    const fs::path p = fs::temp_directory_path() / ("mimgan_cli_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Pull a named numeric field out of a one-row csv written by analyze.
double csv_field(const fs::path& file, const std::string& column) {
    std::ifstream in(file);
    std::string header, row;
    REQUIRE(std::getline(in, header));
    REQUIRE(std::getline(in, row));
    std::vector<std::string> names, cells;
    std::string tok;
    std::stringstream hs(header);
    while (std::getline(hs, tok, ',')) names.push_back(tok);
    std::stringstream rs(row);
    while (std::getline(rs, tok, ',')) cells.push_back(tok);
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == column) return std::stod(cells[i]);
    FAIL("column not found: ", column);
    return 0.0;
}

}  // namespace

TEST_CASE("cli: usage errors exit 1") {
    CHECK(dispatch({"frobnicate"}) == 1);
    CHECK(dispatch({"train", "--no-such-flag"}) == 1);
    CHECK(dispatch({}) == 1);
    CHECK(dispatch({"eval", "--scores", "definitely_missing.csv"}) == 1);
}

TEST_CASE("cli: analyze upsilon single point matches the closed forms") {
    const fs::path dir = fresh_dir("analyze");
    REQUIRE(dispatch({"analyze", "--table", "upsilon", "--p", "0.01", "--eps", "0.1", "--gamma",
                      "1", "--out", dir.string()}) == 0);
    CHECK(std::abs(csv_field(dir / "upsilon.csv", "mim_approx") - 0.0104876) < 1e-6);
    CHECK(std::abs(csv_field(dir / "upsilon.csv", "kl_approx") - 0.0104822) < 1e-6);
    CHECK(fs::exists(dir / "manifest.json"));
}

TEST_CASE("cli: analyze stability and renyi tables exist and parse") {
    const fs::path dir = fresh_dir("analyze2");
    REQUIRE(dispatch({"analyze", "--table", "stability", "--out", dir.string()}) == 0);
    REQUIRE(dispatch({"analyze", "--table", "renyi", "--out", dir.string()}) == 0);
    CHECK(slurp(dir / "stability.csv").rfind("scenario,eps,", 0) == 0);
    CHECK(slurp(dir / "renyi.csv").rfind("q,renyi_half,", 0) == 0);
}

TEST_CASE("cli: train with zero iterations leaves initial models and an empty log") {
    const fs::path a = fresh_dir("train0a");
    const fs::path b = fresh_dir("train0b");
    const std::vector<std::string> base = {"train",  "--objective", "mim", "--data",
                                           "gauss",  "--iters",     "0",   "--n",
                                           "512",    "--seed",      "9"};
    auto with_out = [&](const fs::path& d) {
        std::vector<std::string> v = base;
        v.push_back("--out");
        v.push_back(d.string());
        return v;
    };
    REQUIRE(dispatch(with_out(a)) == 0);
    REQUIRE(dispatch(with_out(b)) == 0);
    CHECK(slurp(a / "training_log.csv") == "iteration,d_loss,g_loss,g_objective\n");
    CHECK(slurp(a / "generator.json") == slurp(b / "generator.json"));
    CHECK(slurp(a / "discriminator.json") == slurp(b / "discriminator.json"));
}

TEST_CASE("cli: synth is deterministic per seed") {
    const fs::path a = fresh_dir("syntha");
    const fs::path b = fresh_dir("synthb");
    REQUIRE(dispatch({"synth", "--data", "synth", "--n-normal", "40", "--n-anomaly", "4", "--dim",
                      "3", "--seed", "5", "--out", a.string()}) == 0);
    REQUIRE(dispatch({"synth", "--data", "synth", "--n-normal", "40", "--n-anomaly", "4", "--dim",
                      "3", "--seed", "5", "--out", b.string()}) == 0);
    CHECK(slurp(a / "dataset.csv") == slurp(b / "dataset.csv"));
    CHECK(slurp(a / "dataset.csv").rfind("f0,f1,f2,label\n", 0) == 0);
}

TEST_CASE("cli: train -> detect -> eval round trip on the synthetic benchmark") {
    const fs::path dir = fresh_dir("pipeline");
    REQUIRE(dispatch({"train", "--objective", "mim", "--data", "synth", "--n-normal", "160",
                      "--n-anomaly", "16", "--dim", "3", "--iters", "400", "--batch", "64",
                      "--hidden", "24", "--seed", "3", "--out", dir.string()}) == 0);
    REQUIRE(fs::exists(dir / "generator.json"));
    REQUIRE(fs::exists(dir / "test_split.csv"));

    REQUIRE(dispatch({"detect", "--gen", (dir / "generator.json").string(), "--disc",
                      (dir / "discriminator.json").string(), "--data",
                      "csv:" + (dir / "test_split.csv").string(), "--label-col", "label",
                      "--inv-iters", "60", "--gamma-threshold", "auto", "--seed", "4", "--out",
                      dir.string()}) == 0);
    REQUIRE(fs::exists(dir / "scores.csv"));
    REQUIRE(fs::exists(dir / "summary.json"));

    REQUIRE(dispatch({"eval", "--scores", (dir / "scores.csv").string(), "--out",
                      dir.string()}) == 0);
    const std::string metrics = slurp(dir / "metrics.json");
    CHECK(metrics.find("auc") != std::string::npos);
    CHECK(slurp(dir / "roc.csv").rfind("fpr,tpr\n", 0) == 0);
}

TEST_CASE("cli: detect with a fixed threshold") {
    const fs::path dir = fresh_dir("fixed_gamma");
    REQUIRE(dispatch({"train", "--objective", "ls", "--data", "synth", "--n-normal", "120",
                      "--n-anomaly", "12", "--dim", "2", "--iters", "200", "--batch", "64",
                      "--hidden", "16", "--seed", "6", "--out", dir.string()}) == 0);
    REQUIRE(dispatch({"detect", "--gen", (dir / "generator.json").string(), "--disc",
                      (dir / "discriminator.json").string(), "--data",
                      "csv:" + (dir / "test_split.csv").string(), "--label-col", "label",
                      "--inv-iters", "40", "--gamma-threshold", "0.75", "--seed", "4", "--out",
                      dir.string()}) == 0);
    const std::string summary = slurp(dir / "summary.json");
    CHECK(summary.find("\"threshold\": 0.75") != std::string::npos);
    CHECK(summary.find("\"threshold_mode\": \"fixed\"") != std::string::npos);
}

TEST_CASE("cli: MIMGAN_SEED env var is the seed fallback") {
    const fs::path a = fresh_dir("envseed_a");
    const fs::path b = fresh_dir("envseed_b");
    setenv("MIMGAN_SEED", "777", 1);
    REQUIRE(dispatch({"synth", "--data", "gauss", "--n", "32", "--out", a.string()}) == 0);
    unsetenv("MIMGAN_SEED");
    REQUIRE(dispatch({"synth", "--data", "gauss", "--n", "32", "--seed", "777", "--out",
                      b.string()}) == 0);
    CHECK(slurp(a / "dataset.csv") == slurp(b / "dataset.csv"));
    CHECK(slurp(a / "manifest.json").find("\"seed\": 777") != std::string::npos);
}

TEST_CASE("cli: missing model files exit 1") {
    const fs::path dir = fresh_dir("missing");
    CHECK(dispatch({"detect", "--gen", (dir / "g.json").string(), "--disc",
                    (dir / "d.json").string(), "--data", "csv:" + (dir / "t.csv").string()}) == 1);
}
