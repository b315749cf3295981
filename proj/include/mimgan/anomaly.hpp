#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "mimgan/data.hpp"
#include "mimgan/metrics.hpp"
#include "mimgan/mlp.hpp"
#include "mimgan/objectives.hpp"
#include "mimgan/optimizer.hpp"
#include "mimgan/rng.hpp"

namespace mimgan {

struct AnomalyConfig {
    double lambda = 0.1;  // cross-entropy weight inside the reconstruction loss
    double eta = 0.05;    // discriminator weight inside the anomaly score
    double beta = 1.0;    // cross-entropy target
    double p_norm = 2.0;
    double inversion_lr = 0.003;
    std::size_t inversion_iters = 500;

    void validate_reconstruction() const {
        if (!(lambda > 0.0 && lambda < 1.0))
            throw std::invalid_argument("anomaly: lambda must be in (0,1)");
        if (p_norm < 1.0) throw std::invalid_argument("anomaly: p_norm must be >= 1");
    }

    void validate() const {
        validate_reconstruction();
        if (!(eta > 0.0 && eta < 1.0))
            throw std::invalid_argument("anomaly: eta must be in (0,1)");
    }
};

// -beta*ln(sigma(d)) - (1-beta)*ln(1-sigma(d)), applied to the discriminator's
// [0,1] output as written (not to a logit). Simplifies to
// log1p(e^-d) + (1-beta)*d, which never hits a log singularity.
inline double sigmoid_cross_entropy(double d, double beta) {
    return std::log1p(std::exp(-d)) + (1.0 - beta) * d;
}

// Tape form over a 1x1 discriminator-output node.
inline int sigmoid_cross_entropy_node(Tape& t, int d, double beta) {
    const int h = t.log(t.affine(t.exp(t.affine(d, -1.0, 0.0)), 1.0, 1.0));
    if (beta == 1.0) return h;
    return t.affine(h, d, 1.0, 1.0 - beta, 0.0);
}

// (1-lambda)*||x - G(z)||_p + lambda*H_ce(D(G(z)), beta); x and z are single
// rows. The residual pulls G(z) toward x, the cross entropy keeps G(z) on the
// learned data manifold.
inline int reconstruction_loss_node(Tape& t, int x, int z, const MlpModel& gen,
                                    const MlpModel& disc, const AnomalyConfig& cfg) {
    const int gz = gen.forward(t, z);
    const int residual = t.norm(t.affine(x, gz, 1.0, -1.0, 0.0), cfg.p_norm);
    const int hce = sigmoid_cross_entropy_node(t, disc.forward(t, gz), cfg.beta);
    return t.affine(residual, hce, 1.0 - cfg.lambda, cfg.lambda, 0.0);
}

inline double reconstruction_loss(const DenseMatrix& x, const DenseMatrix& z, const MlpModel& gen,
                                  const MlpModel& disc, const AnomalyConfig& cfg) {
    cfg.validate_reconstruction();
    Tape t;
    return t.scalar(reconstruction_loss_node(t, t.input(x), t.input(z), gen, disc, cfg));
}

struct InversionResult {
    DenseMatrix z;  // best-seen latent, not merely the last iterate
    double loss = std::numeric_limits<double>::infinity();
    std::size_t restarts = 0;
};

// Adam descent on z from a standard-normal start, minimizing the
// reconstruction loss. Divergence restarts from a fresh z (at most 3 times);
// the best-seen z across all attempts is returned.
inline InversionResult invert_latent(const DenseMatrix& x, const MlpModel& gen,
                                     const MlpModel& disc, const AnomalyConfig& cfg,
                                     SplitRng rng) {
    cfg.validate_reconstruction();
    if (x.rows() != 1 || x.cols() != gen.output_dim())
        throw std::invalid_argument("anomaly: invert_latent expects a single 1x" +
                                    std::to_string(gen.output_dim()) + " sample");

    auto fresh_z = [&]() {
        DenseMatrix z(1, gen.input_dim());
        for (auto& v : z.data()) v = rng.normal();
        return z;
    };

    InversionResult best;
    DenseMatrix z = fresh_z();
    best.z = z;
    OptimizerState opt = OptimizerState::adam(cfg.inversion_lr);

    std::size_t iter = 0;
    while (true) {
        try {
            Tape t;
            const int zid = t.input(z);
            const int loss = reconstruction_loss_node(t, t.input(x), zid, gen, disc, cfg);
            const double value = t.scalar(loss);
            if (value < best.loss) {
                best.loss = value;
                best.z = z;
            }
            if (iter >= cfg.inversion_iters) break;
            t.backward(loss);
            optimizer_step(opt, {&z}, {t.adjoint(zid)});
            ++iter;
        } catch (const std::runtime_error&) {
            if (best.restarts >= 3) break;
            ++best.restarts;
            z = fresh_z();
            opt = OptimizerState::adam(cfg.inversion_lr);
        }
    }
    return best;
}

// S = (1-eta)*J_error(x, z_opt) + eta*H_ce(D(x), beta). The formula itself
// accepts any eta; pipeline configs are held to (0,1) by validate().
inline double anomaly_score(const DenseMatrix& x, const DenseMatrix& z_opt, const MlpModel& gen,
                            const MlpModel& disc, const AnomalyConfig& cfg) {
    const double j = reconstruction_loss(x, z_opt, gen, disc, cfg);
    const double d = disc.predict(x)[0];
    return (1.0 - cfg.eta) * j + cfg.eta * sigmoid_cross_entropy(d, cfg.beta);
}

struct ScoredSample {
    std::size_t id = 0;
    double score = 0.0;
    int decision = 0;
    int truth = -1;  // -1 = unknown
};

// Strict threshold: decision 1 iff score > gamma.
inline std::vector<ScoredSample> classify(std::vector<ScoredSample> samples, double gamma) {
    for (auto& s : samples) {
        if (!std::isfinite(s.score))
            throw std::invalid_argument("anomaly: non-finite score for sample " +
                                        std::to_string(s.id));
        s.decision = s.score > gamma ? 1 : 0;
    }
    return samples;
}

// Threshold maximizing F1 on labeled samples; the smallest such threshold is
// returned so the choice is deterministic.
inline double resolve_auto_threshold(const std::vector<ScoredSample>& samples) {
    if (samples.empty())
        throw std::invalid_argument("anomaly: auto threshold on empty sample set");
    std::vector<int> labels;
    std::vector<double> scores;
    for (const auto& s : samples) {
        if (s.truth != 0 && s.truth != 1)
            throw std::invalid_argument("anomaly: auto threshold requested without labels");
        labels.push_back(s.truth);
        scores.push_back(s.score);
    }
    if (std::count(labels.begin(), labels.end(), 1) == 0)
        throw std::invalid_argument("anomaly: auto threshold needs at least one labeled anomaly");

    std::vector<double> candidates = scores;
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    candidates.insert(candidates.begin(), candidates.front() - 1.0);

    double best_gamma = candidates.front();
    double best_f1 = -1.0;
    std::vector<int> decisions(scores.size());
    for (double g : candidates) {
        for (std::size_t i = 0; i < scores.size(); ++i) decisions[i] = scores[i] > g ? 1 : 0;
        const double f1 = f1_score(decisions, labels);
        if (f1 > best_f1) {
            best_f1 = f1;
            best_gamma = g;
        }
    }
    return best_gamma;
}

// FNV-1a over the row's bit patterns; used to key per-sample rng streams.
inline std::uint64_t row_fingerprint(const DenseMatrix& x) {
    std::uint64_t h = 1469598103934665603ull;
    for (double v : x.data()) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        for (int k = 0; k < 8; ++k) {
            h ^= (bits >> (8 * k)) & 0xff;
            h *= 1099511628211ull;
        }
    }
    return h;
}

// Scores every row of a test set. Each sample gets its own rng sub-stream
// keyed by the row's contents, so scores do not depend on evaluation order.
inline std::vector<ScoredSample> score_dataset(const TabularDataset& test, const MlpModel& gen,
                                               const MlpModel& disc, const AnomalyConfig& cfg,
                                               std::uint64_t seed) {
    cfg.validate();
    test.validate();
    SplitRng root(seed);
    std::vector<ScoredSample> out;
    out.reserve(test.n());
    for (std::size_t i = 0; i < test.n(); ++i) {
        DenseMatrix x(1, test.dim());
        for (std::size_t j = 0; j < test.dim(); ++j) x.at(0, j) = test.features.at(i, j);
        const InversionResult inv = invert_latent(x, gen, disc, cfg, root.split(row_fingerprint(x)));
        ScoredSample s;
        s.id = i;
        s.score = anomaly_score(x, inv.z, gen, disc, cfg);
        if (test.has_labels()) s.truth = test.labels[i];
        out.push_back(s);
    }
    return out;
}

inline void write_score_report_csv(const std::vector<ScoredSample>& samples,
                                   const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("anomaly: cannot write '" + path + "'");
    out << "id,score,decision,truth\n";
    char buf[96];
    for (const auto& s : samples) {
        std::snprintf(buf, sizeof(buf), "%zu,%.12g,%d,%d\n", s.id, s.score, s.decision, s.truth);
        out << buf;
    }
}

inline std::vector<ScoredSample> read_score_report_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("anomaly: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line.rfind("id,score,decision,truth", 0) != 0)
        throw std::invalid_argument("anomaly: '" + path + "' is not a score report");
    std::vector<ScoredSample> out;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++row;
        const auto bad = [&]() {
            return std::invalid_argument("anomaly: malformed report row " + std::to_string(row));
        };
        char* end = nullptr;
        ScoredSample s;
        s.id = std::strtoull(line.c_str(), &end, 10);
        if (*end != ',') throw bad();
        s.score = std::strtod(end + 1, &end);
        if (*end != ',') throw bad();
        s.decision = static_cast<int>(std::strtol(end + 1, &end, 10));
        if (*end != ',') throw bad();
        s.truth = static_cast<int>(std::strtol(end + 1, &end, 10));
        if (*end != '\0' || !std::isfinite(s.score)) throw bad();
        out.push_back(s);
    }
    return out;
}

}  // namespace mimgan
