#pragma once

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mimgan/data.hpp"
#include "mimgan/mlp.hpp"
#include "mimgan/objectives.hpp"
#include "mimgan/optimizer.hpp"

namespace mimgan {

struct GanConfig {
    ObjectiveKind objective = ObjectiveKind::Mim;
    std::size_t latent_dim = 8;
    std::vector<LayerSpec> gen_layers;
    std::vector<LayerSpec> disc_layers;
    OptimizerKind gen_optimizer = OptimizerKind::Adam;
    OptimizerKind disc_optimizer = OptimizerKind::Adam;
    double gen_lr = 0.001;
    double disc_lr = 0.001;
    std::size_t batch_size = 256;
    std::size_t iterations = 2000;
    std::size_t d_steps_per_g_step = 1;
    std::uint64_t seed = 0;
    double w_clip = 0.01;  // Wasserstein discriminator weight clip

    // Single-hidden-layer pair: generator latent -> hidden (leaky) -> data (tanh),
    // discriminator data -> hidden (leaky) -> 1 (sigmoid; identity for Wasserstein).
    static GanConfig defaults(ObjectiveKind k, std::size_t data_dim, std::size_t hidden = 64,
                              std::size_t latent = 8) {
        GanConfig cfg;
        cfg.objective = k;
        cfg.latent_dim = latent;
        cfg.gen_layers = {{cfg.latent_dim, hidden, Activation::LeakyRelu},
                          {hidden, data_dim, Activation::Tanh}};
        const Activation head =
            k == ObjectiveKind::Wasserstein ? Activation::Identity : Activation::Sigmoid;
        cfg.disc_layers = {{data_dim, hidden, Activation::LeakyRelu}, {hidden, 1, head}};
        return cfg;
    }

    void validate(std::size_t data_dim) const {
        if (gen_layers.empty() || disc_layers.empty())
            throw std::invalid_argument("training: missing layer specs");
        if (gen_layers.front().fan_in != latent_dim)
            throw std::invalid_argument("training: generator input != latent_dim");
        if (gen_layers.back().fan_out != data_dim)
            throw std::invalid_argument("training: generator output " +
                                        std::to_string(gen_layers.back().fan_out) +
                                        " != data dim " + std::to_string(data_dim));
        if (disc_layers.front().fan_in != data_dim)
            throw std::invalid_argument("training: discriminator input != data dim");
        if (disc_layers.back().fan_out != 1)
            throw std::invalid_argument("training: discriminator output dim must be 1");
        if (batch_size == 0) throw std::invalid_argument("training: batch_size must be positive");
        if (d_steps_per_g_step == 0)
            throw std::invalid_argument("training: d_steps_per_g_step must be positive");
    }
};

struct TrainingRecord {
    std::size_t iteration;
    double d_loss;
    double g_loss;
    double g_objective;  // generator loss re-evaluated on a fresh batch
};

struct TrainingLog {
    std::vector<TrainingRecord> records;
    bool aborted = false;
    std::string abort_reason;

    void to_csv(std::ostream& out) const {
        out << "iteration,d_loss,g_loss,g_objective\n";
        char buf[128];
        for (const auto& r : records) {
            std::snprintf(buf, sizeof(buf), "%zu,%.12g,%.12g,%.12g\n", r.iteration, r.d_loss,
                          r.g_loss, r.g_objective);
            out << buf;
        }
    }
};

struct TrainResult {
    MlpModel generator;
    MlpModel discriminator;
    TrainingLog log;
};

// Generator objective curves in the fixed-discriminator experiment are
// measured on this many fresh latent samples per iteration.
inline constexpr std::size_t kCurveEvalSamples = 16000;

namespace detail {

inline DenseMatrix latent_batch(std::size_t n, std::size_t dim, SplitRng& rng) {
    DenseMatrix z(n, dim);
    for (auto& v : z.data()) v = rng.normal();
    return z;
}

inline DenseMatrix row_batch(const DenseMatrix& data, std::size_t n, SplitRng& rng) {
    DenseMatrix b(n, data.cols());
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = static_cast<std::size_t>(rng.below(data.rows()));
        for (std::size_t j = 0; j < data.cols(); ++j) b.at(i, j) = data.at(r, j);
    }
    return b;
}

inline void clip_parameters(MlpModel& m, double bound) {
    for (DenseMatrix* p : m.parameters())
        for (auto& v : p->data()) v = std::clamp(v, -bound, bound);
}

// Map a tanh head onto the data's per-feature range.
inline void fit_output_affine(MlpModel& gen, const DenseMatrix& data) {
    if (gen.layers().back().activation != Activation::Tanh) return;
    const std::size_t d = data.cols();
    std::vector<double> scale(d), offset(d);
    for (std::size_t j = 0; j < d; ++j) {
        double lo = data.at(0, j), hi = lo;
        for (std::size_t i = 1; i < data.rows(); ++i) {
            lo = std::min(lo, data.at(i, j));
            hi = std::max(hi, data.at(i, j));
        }
        scale[j] = 0.5 * (hi - lo);
        offset[j] = 0.5 * (hi + lo);
    }
    gen.set_output_affine(std::move(scale), std::move(offset));
}

inline double generator_objective_value(ObjectiveKind k, const MlpModel& disc,
                                        const MlpModel& gen, const DenseMatrix& z) {
    return generator_loss(k, disc.predict(gen.predict(z)).data());
}

inline double discriminator_loss_value(ObjectiveKind k, const MlpModel& disc, const MlpModel& gen,
                                       const DenseMatrix& x, const DenseMatrix& z) {
    return discriminator_loss(k, disc.predict(x).data(), disc.predict(gen.predict(z)).data());
}

}  // namespace detail

// Two-player objective value L(D, G) in its game orientation, for reporting:
// the quantity whose equilibrium is 2*sqrt(e) for the exponential objective.
inline double evaluate_objective(ObjectiveKind k, const MlpModel& disc, const MlpModel& gen,
                                 const DenseMatrix& x, const DenseMatrix& z) {
    const DenseMatrix dr = disc.predict(x);
    const DenseMatrix df = disc.predict(gen.predict(z));
    switch (k) {
        case ObjectiveKind::Mim:
            return discriminator_loss(k, dr.data(), df.data());
        case ObjectiveKind::KlSaturating:
        case ObjectiveKind::KlNonSaturating:
            return -discriminator_loss(ObjectiveKind::KlSaturating, dr.data(), df.data());
        case ObjectiveKind::LeastSquares:
            return discriminator_loss(k, dr.data(), df.data());
        case ObjectiveKind::Wasserstein:
            return -discriminator_loss(k, dr.data(), df.data());
    }
    throw std::logic_error("training: unreachable");
}

// Alternating two-player loop: d_steps_per_g_step discriminator updates, then
// one generator update, both descending their own losses. Deterministic in
// (config, data, seed); aborts with a diagnostic instead of training through
// non-finite losses.
inline TrainResult train_adversarial(const GanConfig& cfg, const DenseMatrix& data) {
    if (data.rows() == 0) throw std::invalid_argument("training: empty dataset");
    data.require_finite("training: data");
    cfg.validate(data.cols());

    SplitRng root(cfg.seed);
    SplitRng rng_init_g = root.split(1);
    SplitRng rng_init_d = root.split(2);
    SplitRng rng_data = root.split(3);
    SplitRng rng_latent = root.split(4);
    SplitRng rng_eval = root.split(5);

    TrainResult out;
    out.generator = MlpModel::glorot(cfg.gen_layers, rng_init_g);
    out.discriminator = MlpModel::glorot(cfg.disc_layers, rng_init_d);
    detail::fit_output_affine(out.generator, data);

    OptimizerState opt_g{cfg.gen_optimizer, cfg.gen_lr};
    OptimizerState opt_d{cfg.disc_optimizer, cfg.disc_lr};

    for (std::size_t iter = 0; iter < cfg.iterations; ++iter) {
        try {
            double d_loss = 0.0;
            for (std::size_t s = 0; s < cfg.d_steps_per_g_step; ++s) {
                const DenseMatrix xb = detail::row_batch(data, cfg.batch_size, rng_data);
                const DenseMatrix zb = detail::latent_batch(cfg.batch_size, cfg.latent_dim, rng_latent);
                Tape t;
                const int real = out.discriminator.forward(t, t.input(xb));
                const int fake = out.discriminator.forward(t, out.generator.forward(t, t.input(zb)));
                const int loss = discriminator_loss_node(t, cfg.objective, real, fake);
                d_loss = t.scalar(loss);
                t.backward(loss);
                optimizer_step(opt_d, out.discriminator.parameters(),
                               out.discriminator.gradients(t));
                if (cfg.objective == ObjectiveKind::Wasserstein)
                    detail::clip_parameters(out.discriminator, cfg.w_clip);
            }

            const DenseMatrix zg = detail::latent_batch(cfg.batch_size, cfg.latent_dim, rng_latent);
            Tape t;
            const int fake = out.discriminator.forward(t, out.generator.forward(t, t.input(zg)));
            const int loss = generator_loss_node(t, cfg.objective, fake);
            const double g_loss = t.scalar(loss);
            t.backward(loss);
            optimizer_step(opt_g, out.generator.parameters(), out.generator.gradients(t));

            const DenseMatrix ze = detail::latent_batch(cfg.batch_size, cfg.latent_dim, rng_eval);
            const double g_obj = detail::generator_objective_value(cfg.objective,
                                                                   out.discriminator,
                                                                   out.generator, ze);
            out.log.records.push_back({iter, d_loss, g_loss, g_obj});
        } catch (const std::runtime_error& e) {
            out.log.aborted = true;
            out.log.abort_reason = "iteration " + std::to_string(iter) + ": " + e.what();
            break;
        }
    }
    return out;
}

struct FixedDiscriminatorResult {
    MlpModel generator;
    MlpModel discriminator;
    TrainingLog log;  // phase-2 records only, one per generator iteration
};

// Phase 1 trains both players normally for d_pretrain_iters; phase 2 freezes
// the discriminator and trains only the generator, logging its objective each
// step on kCurveEvalSamples fresh latent samples.
inline FixedDiscriminatorResult train_generator_fixed_discriminator(const GanConfig& cfg,
                                                                    const DenseMatrix& data,
                                                                    std::size_t d_pretrain_iters,
                                                                    std::size_t g_iters) {
    GanConfig pre = cfg;
    pre.iterations = d_pretrain_iters;
    TrainResult warm = train_adversarial(pre, data);

    FixedDiscriminatorResult out;
    out.generator = std::move(warm.generator);
    out.discriminator = std::move(warm.discriminator);
    if (warm.log.aborted) {
        out.log.aborted = true;
        out.log.abort_reason = "pretrain: " + warm.log.abort_reason;
        return out;
    }

    SplitRng root(cfg.seed);
    SplitRng rng_data = root.split(6);
    SplitRng rng_latent = root.split(7);
    SplitRng rng_eval = root.split(8);

    OptimizerState opt_g{cfg.gen_optimizer, cfg.gen_lr};
    for (std::size_t iter = 0; iter < g_iters; ++iter) {
        try {
            const DenseMatrix xb = detail::row_batch(data, cfg.batch_size, rng_data);
            const DenseMatrix zb = detail::latent_batch(cfg.batch_size, cfg.latent_dim, rng_latent);
            const double d_loss = detail::discriminator_loss_value(cfg.objective,
                                                                   out.discriminator,
                                                                   out.generator, xb, zb);

            Tape t;
            const int fake = out.discriminator.forward(t, out.generator.forward(t, t.input(zb)));
            const int loss = generator_loss_node(t, cfg.objective, fake);
            const double g_loss = t.scalar(loss);
            t.backward(loss);
            optimizer_step(opt_g, out.generator.parameters(), out.generator.gradients(t));

            const DenseMatrix ze =
                detail::latent_batch(kCurveEvalSamples, cfg.latent_dim, rng_eval);
            const double g_obj = detail::generator_objective_value(cfg.objective,
                                                                   out.discriminator,
                                                                   out.generator, ze);
            out.log.records.push_back({iter, d_loss, g_loss, g_obj});
        } catch (const std::runtime_error& e) {
            out.log.aborted = true;
            out.log.abort_reason = "iteration " + std::to_string(iter) + ": " + e.what();
            break;
        }
    }
    return out;
}

// n generated rows G(z), z ~ N(0, I).
inline DenseMatrix sample(const MlpModel& generator, std::size_t n, std::uint64_t seed) {
    SplitRng rng(seed);
    const DenseMatrix z = detail::latent_batch(n, generator.input_dim(), rng);
    if (n == 0) return DenseMatrix(0, generator.output_dim());
    return generator.predict(z);
}

}  // namespace mimgan
