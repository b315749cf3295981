#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "mimgan/autodiff.hpp"
#include "mimgan/matrix.hpp"

namespace mimgan {

// The four adversarial objectives under comparison. The exponential objective
// pairs a minimizing discriminator with a maximizing generator; the classic
// log objectives invert the roles. Every loss returned below is in descent
// form: the owning player minimizes it, whatever the sign conventions of the
// underlying two-player game.
enum class ObjectiveKind { Mim, KlSaturating, KlNonSaturating, LeastSquares, Wasserstein };

inline std::string objective_name(ObjectiveKind k) {
    switch (k) {
        case ObjectiveKind::Mim: return "mim";
        case ObjectiveKind::KlSaturating: return "kl";
        case ObjectiveKind::KlNonSaturating: return "kl-ns";
        case ObjectiveKind::LeastSquares: return "ls";
        case ObjectiveKind::Wasserstein: return "w";
    }
    return "?";
}

inline ObjectiveKind objective_from_name(const std::string& s) {
    if (s == "mim") return ObjectiveKind::Mim;
    if (s == "kl") return ObjectiveKind::KlSaturating;
    if (s == "kl-ns") return ObjectiveKind::KlNonSaturating;
    if (s == "ls") return ObjectiveKind::LeastSquares;
    if (s == "w") return ObjectiveKind::Wasserstein;
    throw std::invalid_argument("objectives: unknown objective '" + s + "'");
}

inline bool is_kl(ObjectiveKind k) {
    return k == ObjectiveKind::KlSaturating || k == ObjectiveKind::KlNonSaturating;
}

// 2*sqrt(e), the equilibrium value of the exponential objective.
inline double two_sqrt_e() { return 2.0 * std::exp(0.5); }

// Finite discrete distribution; entries sum to 1 within 1e-12.
class DiscreteDist {
public:
    explicit DiscreteDist(std::vector<double> probs) : p_(std::move(probs)) {
        if (p_.empty()) throw std::invalid_argument("objectives: empty distribution");
        double s = 0.0;
        for (double v : p_) {
            if (v < 0.0) throw std::invalid_argument("objectives: negative probability");
            s += v;
        }
        if (std::abs(s - 1.0) > 1e-12)
            throw std::invalid_argument("objectives: probabilities sum to " + std::to_string(s));
    }

    std::size_t size() const { return p_.size(); }
    double operator[](std::size_t i) const { return p_[i]; }
    const std::vector<double>& probs() const { return p_; }

private:
    std::vector<double> p_;
};

namespace detail {

inline void require_unit_interval(ObjectiveKind k, const DenseMatrix& d, const char* who) {
    // Exp/square forms tolerate the closed interval; log forms need the log
    // argument strictly positive and fail inside Tape::log anyway.
    if (k == ObjectiveKind::Wasserstein) return;
    for (double v : d.data())
        if (v < 0.0 || v > 1.0)
            throw std::domain_error("objectives: " + std::string(who) + " value " +
                                    std::to_string(v) + " outside [0,1] for " +
                                    objective_name(k));
}

}  // namespace detail

// Discriminator loss node over column batches of discriminator outputs.
// Mim:  mean(exp(1-d_real)) + mean(exp(d_fake))
// Kl:   -(mean(ln d_real) + mean(ln(1-d_fake)))
// Ls:   0.5*mean((d_real-1)^2) + 0.5*mean(d_fake^2)
// W:    mean(d_fake) - mean(d_real)   (weight clipping is the training loop's job)
inline int discriminator_loss_node(Tape& t, ObjectiveKind k, int d_real, int d_fake) {
    switch (k) {
        case ObjectiveKind::Mim: {
            int real = t.mean(t.exp(t.affine(d_real, -1.0, 1.0)));
            int fake = t.mean(t.exp(d_fake));
            return t.affine(real, fake, 1.0, 1.0, 0.0);
        }
        case ObjectiveKind::KlSaturating:
        case ObjectiveKind::KlNonSaturating: {
            int real = t.mean(t.log(d_real));
            int fake = t.mean(t.log(t.affine(d_fake, -1.0, 1.0)));
            return t.affine(real, fake, -1.0, -1.0, 0.0);
        }
        case ObjectiveKind::LeastSquares: {
            int real = t.mean(t.power(t.affine(d_real, 1.0, -1.0), 2.0));
            int fake = t.mean(t.power(d_fake, 2.0));
            return t.affine(real, fake, 0.5, 0.5, 0.0);
        }
        case ObjectiveKind::Wasserstein:
            return t.affine(t.mean(d_fake), t.mean(d_real), 1.0, -1.0, 0.0);
    }
    throw std::logic_error("objectives: unreachable");
}

// Generator loss node (descent form).
// Mim:   -mean(exp(d_fake))        (only the fake term of the game depends on G)
// KlSat:  mean(ln(1-d_fake))
// KlNs:  -mean(ln d_fake)
// Ls:     0.5*mean((d_fake-1)^2)
// W:     -mean(d_fake)
inline int generator_loss_node(Tape& t, ObjectiveKind k, int d_fake) {
    switch (k) {
        case ObjectiveKind::Mim:
            return t.affine(t.mean(t.exp(d_fake)), -1.0, 0.0);
        case ObjectiveKind::KlSaturating:
            return t.mean(t.log(t.affine(d_fake, -1.0, 1.0)));
        case ObjectiveKind::KlNonSaturating:
            return t.affine(t.mean(t.log(d_fake)), -1.0, 0.0);
        case ObjectiveKind::LeastSquares:
            return t.affine(t.mean(t.power(t.affine(d_fake, 1.0, -1.0), 2.0)), 0.5, 0.0);
        case ObjectiveKind::Wasserstein:
            return t.affine(t.mean(d_fake), -1.0, 0.0);
    }
    throw std::logic_error("objectives: unreachable");
}

inline double discriminator_loss(ObjectiveKind k, const std::vector<double>& d_real,
                                 const std::vector<double>& d_fake) {
    if (d_real.empty() || d_fake.empty())
        throw std::invalid_argument("objectives: empty discriminator batch");
    DenseMatrix real(d_real.size(), 1, d_real), fake(d_fake.size(), 1, d_fake);
    detail::require_unit_interval(k, real, "d_real");
    detail::require_unit_interval(k, fake, "d_fake");
    Tape t;
    return t.scalar(discriminator_loss_node(t, k, t.input(real), t.input(fake)));
}

inline double generator_loss(ObjectiveKind k, const std::vector<double>& d_fake) {
    if (d_fake.empty()) throw std::invalid_argument("objectives: empty discriminator batch");
    DenseMatrix fake(d_fake.size(), 1, d_fake);
    detail::require_unit_interval(k, fake, "d_fake");
    Tape t;
    return t.scalar(generator_loss_node(t, k, t.input(fake)));
}

// Pointwise objective density a*exp(1-d) + b*exp(d); its minimizer over d is
// the closed-form optimal discriminator below.
inline double mim_pointwise_objective(double p_real, double p_gen, double d) {
    return p_real * std::exp(1.0 - d) + p_gen * std::exp(d);
}

// Closed-form optimal discriminator for a fixed generator.
// Mim: 1/2 + 1/2*ln(p/p_g)  (may leave [0,1]); Kl: p/(p+p_g).
inline double optimal_discriminator(ObjectiveKind k, double p_real, double p_gen) {
    if (p_real <= 0.0 || p_gen <= 0.0)
        throw std::invalid_argument("objectives: optimal_discriminator needs positive densities");
    if (k == ObjectiveKind::Mim) return 0.5 + 0.5 * std::log(p_real / p_gen);
    if (is_kl(k)) return p_real / (p_real + p_gen);
    throw std::invalid_argument("objectives: no closed-form discriminator for " +
                                objective_name(k));
}

// Objective value under the optimal discriminator on a discrete support:
// 2*sqrt(e) * sum_x sqrt(P(x)Q(x)). Maximal (= 2*sqrt(e)) iff P == Q.
inline double equilibrium_objective(ObjectiveKind k, const DiscreteDist& p, const DiscreteDist& q) {
    if (k != ObjectiveKind::Mim)
        throw std::invalid_argument("objectives: equilibrium_objective implemented for mim only");
    if (p.size() != q.size())
        throw std::invalid_argument("objectives: support mismatch " + std::to_string(p.size()) +
                                    " vs " + std::to_string(q.size()));
    double bc = 0.0;  // Bhattacharyya coefficient, accumulated in log space
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0 && q[i] > 0.0) bc += std::exp(0.5 * (std::log(p[i]) + std::log(q[i])));
    }
    return two_sqrt_e() * bc;
}

}  // namespace mimgan
