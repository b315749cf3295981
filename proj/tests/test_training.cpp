#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "mimgan/data.hpp"
#include "mimgan/model_io.hpp"
#include "mimgan/training.hpp"

using namespace mimgan;

namespace {

DenseMatrix gauss_data(std::size_t n, std::uint64_t seed) {
    return sample_gaussian(4.0, 1.25, n, seed).features;
}

GanConfig small_cfg(ObjectiveKind k, std::size_t iters, std::uint64_t seed) {
    GanConfig cfg = GanConfig::defaults(k, 1, 32);
    cfg.iterations = iters;
    cfg.batch_size = 64;
    cfg.seed = seed;
    return cfg;
}

bool params_equal(const MlpModel& a, const MlpModel& b) {
    const auto pa = a.parameters();
    const auto pb = b.parameters();
    if (pa.size() != pb.size()) return false;
    for (std::size_t i = 0; i < pa.size(); ++i)
        if (pa[i]->data() != pb[i]->data()) return false;
    return true;
}

}  // namespace

TEST_CASE("train_adversarial: zero iterations returns the initialization") {
    const DenseMatrix data = gauss_data(512, 1);
    const TrainResult a = train_adversarial(small_cfg(ObjectiveKind::Mim, 0, 9), data);
    const TrainResult b = train_adversarial(small_cfg(ObjectiveKind::Mim, 0, 9), data);
    CHECK(a.log.records.empty());
    CHECK_FALSE(a.log.aborted);
    CHECK(params_equal(a.generator, b.generator));
    CHECK(params_equal(a.discriminator, b.discriminator));
}

TEST_CASE("train_adversarial: identical seeds give bitwise-identical logs") {
    const DenseMatrix data = gauss_data(512, 2);
    const GanConfig cfg = small_cfg(ObjectiveKind::Mim, 40, 123);
    const TrainResult a = train_adversarial(cfg, data);
    const TrainResult b = train_adversarial(cfg, data);
    REQUIRE(a.log.records.size() == 40);
    REQUIRE(b.log.records.size() == 40);
    for (std::size_t i = 0; i < 40; ++i) {
        CHECK(a.log.records[i].d_loss == b.log.records[i].d_loss);
        CHECK(a.log.records[i].g_loss == b.log.records[i].g_loss);
        CHECK(a.log.records[i].g_objective == b.log.records[i].g_objective);
    }
    CHECK(params_equal(a.generator, b.generator));
}

TEST_CASE("train_adversarial: completed runs never log non-finite losses") {
    const DenseMatrix data = gauss_data(512, 3);
    for (ObjectiveKind k : {ObjectiveKind::Mim, ObjectiveKind::KlSaturating,
                            ObjectiveKind::KlNonSaturating, ObjectiveKind::LeastSquares,
                            ObjectiveKind::Wasserstein}) {
        const TrainResult r = train_adversarial(small_cfg(k, 30, 5), data);
        REQUIRE_FALSE(r.log.aborted);
        for (const auto& rec : r.log.records) {
            CHECK(std::isfinite(rec.d_loss));
            CHECK(std::isfinite(rec.g_loss));
            CHECK(std::isfinite(rec.g_objective));
        }
    }
}

TEST_CASE("train_adversarial: wasserstein keeps discriminator weights clipped") {
    const DenseMatrix data = gauss_data(512, 4);
    GanConfig cfg = small_cfg(ObjectiveKind::Wasserstein, 25, 6);
    const TrainResult r = train_adversarial(cfg, data);
    for (const DenseMatrix* p : r.discriminator.parameters())
        for (double v : p->data()) CHECK(std::abs(v) <= cfg.w_clip + 1e-15);
}

TEST_CASE("train_adversarial: exploding step aborts with a diagnostic") {
    const DenseMatrix data = gauss_data(256, 5);
    GanConfig cfg = small_cfg(ObjectiveKind::Wasserstein, 20, 7);
    cfg.gen_lr = 1e308;
    const TrainResult r = train_adversarial(cfg, data);
    CHECK(r.log.aborted);
    CHECK_FALSE(r.log.abort_reason.empty());
}

TEST_CASE("train_adversarial: config validation") {
    const DenseMatrix data = gauss_data(64, 6);
    GanConfig cfg = small_cfg(ObjectiveKind::Mim, 1, 1);
    cfg.disc_layers.back().fan_out = 2;
    CHECK_THROWS_AS(train_adversarial(cfg, data), std::invalid_argument);
    CHECK_THROWS_AS(train_adversarial(small_cfg(ObjectiveKind::Mim, 1, 1), DenseMatrix(0, 1)),
                    std::invalid_argument);
}

TEST_CASE("sample: shapes, ranges and reproducibility") {
    SplitRng rng(31);
    MlpModel gen =
        MlpModel::glorot({{8, 16, Activation::LeakyRelu}, {16, 2, Activation::Tanh}}, rng);
    const DenseMatrix empty = sample(gen, 0, 1);
    CHECK(empty.rows() == 0);
    CHECK(empty.cols() == 2);

    const DenseMatrix s = sample(gen, 200, 42);
    CHECK(s.rows() == 200);
    for (double v : s.data()) {
        CHECK(v > -1.0);
        CHECK(v < 1.0);
    }
    const DenseMatrix s2 = sample(gen, 200, 42);
    CHECK(s.data() == s2.data());
}

TEST_CASE("train_adversarial: learns the 1-D gaussian at desk scale") {
    const DenseMatrix data = gauss_data(4096, 77);
    GanConfig cfg = GanConfig::defaults(ObjectiveKind::Mim, 1, 32);
    cfg.batch_size = 256;
    cfg.iterations = 2000;
    cfg.seed = 7;
    const TrainResult r = train_adversarial(cfg, data);
    REQUIRE_FALSE(r.log.aborted);

    const DenseMatrix s = sample(r.generator, 10000, 99);
    double sum = 0.0, sum2 = 0.0;
    for (double v : s.data()) {
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / 10000.0;
    const double sd = std::sqrt(sum2 / 10000.0 - mean * mean);
    CHECK(mean > 3.5);
    CHECK(mean < 4.5);
    CHECK(sd > 0.85);
    CHECK(sd < 1.65);

    // near equilibrium the held-out objective sits in the 2*sqrt(e) band
    SplitRng eval_rng(1234);
    DenseMatrix xh(2048, 1), zh(2048, cfg.latent_dim);
    for (auto& v : xh.data()) v = eval_rng.normal(4.0, 1.25);
    for (auto& v : zh.data()) v = eval_rng.normal();
    const double obj = evaluate_objective(ObjectiveKind::Mim, r.discriminator, r.generator, xh, zh);
    CHECK(obj > two_sqrt_e() - 0.6);
    CHECK(obj < two_sqrt_e() + 0.3);
}

TEST_CASE("model io: save/load round trip preserves predictions bit-exactly") {
    SplitRng rng(41);
    MlpModel gen =
        MlpModel::glorot({{4, 8, Activation::LeakyRelu}, {8, 2, Activation::Tanh}}, rng);
    gen.set_output_affine({2.0, 3.0}, {-1.0, 0.5});
    const auto dir = std::filesystem::temp_directory_path() / "mimgan_test_model_io";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "gen.json").string();

    NormStats st;
    st.min = {0.0, -2.0};
    st.max = {1.0, 2.0};
    save_model(gen, path, st);
    const SavedModel back = load_model(path);

    DenseMatrix z(5, 4);
    for (auto& v : z.data()) v = rng.normal();
    const DenseMatrix a = gen.predict(z);
    const DenseMatrix b = back.model.predict(z);
    CHECK(a.data() == b.data());
    REQUIRE(back.norm.has_value());
    CHECK(back.norm->min == st.min);
    CHECK(back.norm->max == st.max);

    std::ofstream(dir / "junk.json") << "{\"magic\": \"nope\"}\n";
    CHECK_THROWS_AS(load_model((dir / "junk.json").string()), std::runtime_error);
}

TEST_CASE("sigmoid-head discriminator keeps outputs strictly inside (0,1)") {
    SplitRng rng(43);
    MlpModel disc =
        MlpModel::glorot({{2, 16, Activation::LeakyRelu}, {16, 1, Activation::Sigmoid}}, rng);
    DenseMatrix x(64, 2);
    for (auto& v : x.data()) v = rng.normal(0.0, 20.0);  // extreme inputs
    const DenseMatrix d = disc.predict(x);
    for (double v : d.data()) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
        // exponential-objective loss terms stay inside (1, e) per sample
        CHECK(std::exp(1.0 - v) > 1.0);
        CHECK(std::exp(1.0 - v) < std::exp(1.0));
        CHECK(std::exp(v) > 1.0);
        CHECK(std::exp(v) < std::exp(1.0));
    }
}

TEST_CASE("fixed discriminator: empty phase when g_iters is zero") {
    const DenseMatrix data = gauss_data(512, 8);
    const FixedDiscriminatorResult r =
        train_generator_fixed_discriminator(small_cfg(ObjectiveKind::Mim, 10, 3), data, 10, 0);
    CHECK(r.log.records.empty());
    CHECK_FALSE(r.log.aborted);
}

TEST_CASE("fixed discriminator: deterministic per seed") {
    const DenseMatrix data = gauss_data(512, 9);
    const GanConfig cfg = small_cfg(ObjectiveKind::Mim, 5, 17);
    const FixedDiscriminatorResult a = train_generator_fixed_discriminator(cfg, data, 5, 4);
    const FixedDiscriminatorResult b = train_generator_fixed_discriminator(cfg, data, 5, 4);
    REQUIRE(a.log.records.size() == 4);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(a.log.records[i].g_objective == b.log.records[i].g_objective);
}

TEST_CASE("fixed discriminator: generator objective trends downward") {
    const DenseMatrix data = gauss_data(4096, 10);
    GanConfig cfg = GanConfig::defaults(ObjectiveKind::Mim, 1, 32);
    cfg.batch_size = 256;
    cfg.seed = 21;
    const FixedDiscriminatorResult r =
        train_generator_fixed_discriminator(cfg, data, 500, 300);
    REQUIRE_FALSE(r.log.aborted);
    REQUIRE(r.log.records.size() == 300);
    double lead = 0.0, trail = 0.0;
    for (std::size_t i = 0; i < 100; ++i) lead += r.log.records[i].g_objective;
    for (std::size_t i = 200; i < 300; ++i) trail += r.log.records[i].g_objective;
    CHECK(trail / 100.0 <= lead / 100.0);
}
