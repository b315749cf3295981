#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "mimgan/objectives.hpp"

namespace mimgan {

// Binary real/generated pair P = {p, 1-p}, Q = {q, 1-q} with q = p + eps*p^gamma.
// The small atom p is the rare-event class; the regime of interest is p << 1/2.
struct BinaryPerturbation {
    double p;
    double epsilon;
    double gamma;

    BinaryPerturbation(double p_, double epsilon_, double gamma_)
        : p(p_), epsilon(epsilon_), gamma(gamma_) {
        if (!(p > 0.0 && p < 0.5))
            throw std::invalid_argument("analysis: p must lie in (0, 1/2), got " +
                                        std::to_string(p));
        if (gamma < 1.0)
            throw std::invalid_argument("analysis: gamma must be >= 1, got " +
                                        std::to_string(gamma));
        const double qv = q();
        if (!(qv > 0.0 && qv < 0.5))
            throw std::invalid_argument("analysis: q = p + eps*p^gamma = " + std::to_string(qv) +
                                        " outside (0, 1/2)");
    }

    double q() const { return p + epsilon * std::pow(p, gamma); }
};

// Discriminator disturbance scenarios: around the ideal perfect discriminator
// (D~* = 0 on generated data, eps in [0,1]) or around the equilibrium
// discriminator (D* = 1/2, |eps| < 1/2).
enum class StabilityScenario { PerfectDiscriminator, WorstDiscriminator };

enum class ProportionMode { Exact, Approx };

// Renyi divergence (1/(alpha-1)) ln sum_x P(x) (P(x)/Q(x))^(alpha-1).
// At alpha = 1/2 it is symmetric and ties to the exponential-objective
// equilibrium: L(D*, G) = 2*sqrt(e) * exp(-R_1/2(P||Q)/2).
inline double renyi_divergence(const DiscreteDist& p, const DiscreteDist& q, double alpha) {
    if (alpha <= 0.0 || alpha == 1.0)
        throw std::invalid_argument("analysis: renyi alpha must be positive and != 1, got " +
                                    std::to_string(alpha));
    if (p.size() != q.size())
        throw std::invalid_argument("analysis: renyi support mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (q[i] <= 0.0)
            throw std::invalid_argument("analysis: renyi requires Q > 0 wherever P > 0 (atom " +
                                        std::to_string(i) + ")");
        s += std::exp(alpha * std::log(p[i]) - (alpha - 1.0) * std::log(q[i]));
    }
    return std::log(s) / (alpha - 1.0);
}

namespace detail {

// sqrt(a*b) in log space; zero if either atom is zero.
inline double sqrt_prod(double a, double b) {
    if (a <= 0.0 || b <= 0.0) return 0.0;
    return std::exp(0.5 * (std::log(a) + std::log(b)));
}

}  // namespace detail

// Proportion of the optimal-discriminator objective contributed by the rare
// atom. Exact mode evaluates the unexpanded ratio; Approx evaluates the
// second-order closed form (1/8 curvature for the exponential objective,
// 1/(8 ln 2) for the log objective).
inline double rare_event_proportion(ObjectiveKind kind, ProportionMode mode,
                                    const BinaryPerturbation& bp) {
    const double p = bp.p;
    const double q = bp.q();

    if (kind == ObjectiveKind::Mim) {
        if (mode == ProportionMode::Exact) {
            const double rare = detail::sqrt_prod(p, q);
            const double common = detail::sqrt_prod(1.0 - p, 1.0 - q);
            return rare / (rare + common);
        }
        const double curv = bp.epsilon * bp.epsilon * std::pow(p, 2.0 * bp.gamma - 1.0) / 8.0;
        return (0.5 * (p + q) - curv) / (1.0 - curv / (1.0 - p));
    }

    if (is_kl(kind)) {
        if (mode == ProportionMode::Exact) {
            // Rare-atom terms of E_P[ln D*] + E_Q[ln(1-D*)] with D* = p/(p+q),
            // over the full objective value.
            const double rare = p * std::log(p / (p + q)) + q * std::log(q / (p + q));
            const double common = (1.0 - p) * std::log((1.0 - p) / (2.0 - p - q)) +
                                  (1.0 - q) * std::log((1.0 - q) / (2.0 - p - q));
            return rare / (rare + common);
        }
        const double curv =
            bp.epsilon * bp.epsilon * std::pow(p, 2.0 * bp.gamma - 1.0) / (8.0 * std::log(2.0));
        return (0.5 * (p + q) - curv) / (1.0 - curv / (1.0 - p));
    }

    throw std::invalid_argument("analysis: rare_event_proportion defined for mim and kl only");
}

// Magnitude of the multiplicative factor a discriminator disturbance eps puts
// on E[grad_x D * grad_theta g]. Exponential objective: e^eps (perfect) and
// e^(1/2+eps) (worst). Log objectives: 1/(1-eps) and 1/eps (perfect),
// 1/(1/2-eps) and 1/(1/2+eps) (worst).
inline double stability_factor(ObjectiveKind kind, StabilityScenario scenario, double epsilon) {
    if (scenario == StabilityScenario::PerfectDiscriminator) {
        if (epsilon < 0.0 || epsilon > 1.0)
            throw std::invalid_argument("analysis: perfect-discriminator eps must be in [0,1]");
        switch (kind) {
            case ObjectiveKind::Mim:
                return std::exp(epsilon);
            case ObjectiveKind::KlSaturating:
                if (epsilon == 1.0)
                    throw std::domain_error("analysis: stability factor diverges at eps = 1");
                return 1.0 / (1.0 - epsilon);
            case ObjectiveKind::KlNonSaturating:
                if (epsilon <= 0.0)
                    throw std::domain_error(
                        "analysis: non-saturating perfect-discriminator factor needs eps > 0");
                return 1.0 / epsilon;
            default:
                break;
        }
    } else {
        if (!(std::abs(epsilon) < 0.5))
            throw std::invalid_argument("analysis: worst-discriminator eps must satisfy |eps| < 1/2");
        switch (kind) {
            case ObjectiveKind::Mim:
                return std::exp(0.5 + epsilon);
            case ObjectiveKind::KlSaturating:
                return 1.0 / (0.5 - epsilon);
            case ObjectiveKind::KlNonSaturating:
                return 1.0 / (0.5 + epsilon);
            default:
                break;
        }
    }
    throw std::invalid_argument("analysis: stability_factor defined for mim and kl variants");
}

// Share of the optimal-discriminator objective carried by a subset of atoms:
// sum_{x in subset} sqrt(P(x)Q(x)) / sum_x sqrt(P(x)Q(x)).
inline double large_event_proportion(const DiscreteDist& p, const DiscreteDist& q,
                                     const std::vector<std::size_t>& large_support) {
    if (p.size() != q.size())
        throw std::invalid_argument("analysis: large_event_proportion support mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) total += detail::sqrt_prod(p[i], q[i]);
    if (total <= 0.0) throw std::invalid_argument("analysis: empty total support");
    double sub = 0.0;
    for (std::size_t i : large_support) {
        if (i >= p.size())
            throw std::out_of_range("analysis: large-support index " + std::to_string(i) +
                                    " out of range");
        sub += detail::sqrt_prod(p[i], q[i]);
    }
    return sub / total;
}

}  // namespace mimgan
