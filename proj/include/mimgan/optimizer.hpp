#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mimgan/matrix.hpp"

namespace mimgan {

enum class OptimizerKind { Sgd, Adam };

struct OptimizerState {
    OptimizerKind kind = OptimizerKind::Sgd;
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    // Adam moment buffers, shaped like the parameters on first use.
    std::vector<DenseMatrix> first_moment;
    std::vector<DenseMatrix> second_moment;
    long step_count = 0;

    static OptimizerState sgd(double lr) { return {OptimizerKind::Sgd, lr}; }
    static OptimizerState adam(double lr) { return {OptimizerKind::Adam, lr}; }
};

// One update step. SGD: p -= lr*g. Adam: bias-corrected update with the
// stored beta1/beta2/epsilon.
inline void optimizer_step(OptimizerState& st, std::vector<DenseMatrix*> params,
                           const std::vector<DenseMatrix>& grads) {
    if (params.size() != grads.size())
        throw std::invalid_argument("optimizer: " + std::to_string(params.size()) +
                                    " params vs " + std::to_string(grads.size()) + " grads");
    for (std::size_t i = 0; i < params.size(); ++i) {
        require_same_shape(*params[i], grads[i], "optimizer: param/grad");
        grads[i].require_finite("optimizer: gradient");
    }

    if (st.kind == OptimizerKind::Adam && st.first_moment.empty()) {
        for (const DenseMatrix* p : params) {
            st.first_moment.emplace_back(p->rows(), p->cols());
            st.second_moment.emplace_back(p->rows(), p->cols());
        }
    }
    if (st.kind == OptimizerKind::Adam && st.first_moment.size() != params.size())
        throw std::invalid_argument("optimizer: parameter list changed mid-run");

    ++st.step_count;
    if (st.kind == OptimizerKind::Sgd) {
        for (std::size_t i = 0; i < params.size(); ++i)
            axpy(*params[i], grads[i], -st.learning_rate);
        return;
    }

    const double c1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step_count));
    const double c2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step_count));
    for (std::size_t i = 0; i < params.size(); ++i) {
        DenseMatrix& p = *params[i];
        DenseMatrix& m = st.first_moment[i];
        DenseMatrix& v = st.second_moment[i];
        require_same_shape(m, p, "optimizer: moment buffer");
        const DenseMatrix& g = grads[i];
        for (std::size_t j = 0; j < p.size(); ++j) {
            m[j] = st.beta1 * m[j] + (1.0 - st.beta1) * g[j];
            v[j] = st.beta2 * v[j] + (1.0 - st.beta2) * g[j] * g[j];
            const double mhat = m[j] / c1;
            const double vhat = v[j] / c2;
            p[j] -= st.learning_rate * mhat / (std::sqrt(vhat) + st.epsilon);
        }
    }
}

}  // namespace mimgan
