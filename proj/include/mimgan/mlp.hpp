#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mimgan/autodiff.hpp"
#include "mimgan/matrix.hpp"
#include "mimgan/rng.hpp"

namespace mimgan {

enum class Activation { Identity, Sigmoid, Tanh, LeakyRelu };

// Negative-input slope for leaky ReLU.
inline constexpr double kLeakySlope = 0.2;

inline std::string activation_name(Activation a) {
    switch (a) {
        case Activation::Identity: return "identity";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Tanh: return "tanh";
        case Activation::LeakyRelu: return "leaky-relu";
    }
    return "?";
}

inline Activation activation_from_name(const std::string& s) {
    if (s == "identity") return Activation::Identity;
    if (s == "sigmoid") return Activation::Sigmoid;
    if (s == "tanh") return Activation::Tanh;
    if (s == "leaky-relu") return Activation::LeakyRelu;
    throw std::invalid_argument("mlp: unknown activation '" + s + "'");
}

struct LayerSpec {
    std::size_t fan_in = 0;
    std::size_t fan_out = 0;
    Activation activation = Activation::Identity;
};

// Fully connected network. Weights are (fan_in x fan_out), biases (1 x fan_out).
// An optional per-feature output affine (value*scale + offset) maps a tanh head
// onto the training data's range; it is part of the model and serialized with it.
class MlpModel {
public:
    MlpModel() = default;

    explicit MlpModel(std::vector<LayerSpec> layers) : layers_(std::move(layers)) {
        if (layers_.empty()) throw std::invalid_argument("mlp: empty layer list");
        for (std::size_t i = 0; i + 1 < layers_.size(); ++i)
            if (layers_[i].fan_out != layers_[i + 1].fan_in)
                throw std::invalid_argument("mlp: layer " + std::to_string(i) + " fan_out " +
                                            std::to_string(layers_[i].fan_out) +
                                            " != next fan_in " +
                                            std::to_string(layers_[i + 1].fan_in));
        for (const auto& l : layers_) {
            if (l.fan_in == 0 || l.fan_out == 0)
                throw std::invalid_argument("mlp: zero layer dimension");
            weights.emplace_back(l.fan_in, l.fan_out);
            biases.emplace_back(1, l.fan_out);
        }
    }

    // Uniform init in +/- sqrt(6/(fan_in+fan_out)), biases zero.
    static MlpModel glorot(std::vector<LayerSpec> layers, SplitRng& rng) {
        MlpModel m(std::move(layers));
        for (std::size_t i = 0; i < m.layers_.size(); ++i) {
            const double bound =
                std::sqrt(6.0 / static_cast<double>(m.layers_[i].fan_in + m.layers_[i].fan_out));
            for (auto& w : m.weights[i].data()) w = rng.uniform(-bound, bound);
        }
        return m;
    }

    const std::vector<LayerSpec>& layers() const { return layers_; }
    std::size_t input_dim() const { return layers_.front().fan_in; }
    std::size_t output_dim() const { return layers_.back().fan_out; }

    void set_output_affine(std::vector<double> scale, std::vector<double> offset) {
        if (scale.size() != output_dim() || offset.size() != output_dim())
            throw std::invalid_argument("mlp: output affine size != output dim");
        output_scale = std::move(scale);
        output_offset = std::move(offset);
    }

    bool has_output_affine() const { return !output_scale.empty(); }

    // Records the whole computation on the tape; parameters register through
    // Tape::param so repeated forwards of the same model share nodes.
    int forward(Tape& t, int x) const {
        if (t.value(x).cols() != input_dim())
            throw std::invalid_argument("mlp: batch has " + std::to_string(t.value(x).cols()) +
                                        " columns, model expects " + std::to_string(input_dim()));
        int h = x;
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            h = t.matmul(h, t.param(&weights[i]));
            h = t.add_bias(h, t.param(&biases[i]));
            switch (layers_[i].activation) {
                case Activation::Identity: break;
                case Activation::Sigmoid: h = t.sigmoid(h); break;
                case Activation::Tanh: h = t.tanh(h); break;
                case Activation::LeakyRelu: h = t.leaky_relu(h, kLeakySlope); break;
            }
        }
        if (has_output_affine()) {
            const std::size_t d = output_dim();
            DenseMatrix diag(d, d);
            for (std::size_t j = 0; j < d; ++j) diag.at(j, j) = output_scale[j];
            DenseMatrix off(1, d, output_offset);
            h = t.matmul(h, t.input(diag));
            h = t.add_bias(h, t.input(off));
        }
        return h;
    }

    // Tape-free inference; same math as forward(), no recording.
    DenseMatrix predict(const DenseMatrix& batch) const {
        if (batch.cols() != input_dim())
            throw std::invalid_argument("mlp: batch has " + std::to_string(batch.cols()) +
                                        " columns, model expects " + std::to_string(input_dim()));
        batch.require_finite("mlp: predict input");
        DenseMatrix cur = batch, next;
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            matmul_into(cur, weights[i], next);
            const DenseMatrix& b = biases[i];
            for (std::size_t r = 0; r < next.rows(); ++r)
                for (std::size_t c = 0; c < next.cols(); ++c) next.at(r, c) += b[c];
            switch (layers_[i].activation) {
                case Activation::Identity: break;
                case Activation::Sigmoid:
                    for (auto& v : next.data()) v = 1.0 / (1.0 + std::exp(-v));
                    break;
                case Activation::Tanh:
                    for (auto& v : next.data()) v = std::tanh(v);
                    break;
                case Activation::LeakyRelu:
                    for (auto& v : next.data()) v = v > 0.0 ? v : kLeakySlope * v;
                    break;
            }
            std::swap(cur, next);
        }
        if (has_output_affine()) {
            for (std::size_t r = 0; r < cur.rows(); ++r)
                for (std::size_t c = 0; c < cur.cols(); ++c)
                    cur.at(r, c) = cur.at(r, c) * output_scale[c] + output_offset[c];
        }
        cur.require_finite("mlp: predict");
        return cur;
    }

    std::vector<DenseMatrix*> parameters() {
        std::vector<DenseMatrix*> ps;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            ps.push_back(&weights[i]);
            ps.push_back(&biases[i]);
        }
        return ps;
    }

    std::vector<const DenseMatrix*> parameters() const {
        std::vector<const DenseMatrix*> ps;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            ps.push_back(&weights[i]);
            ps.push_back(&biases[i]);
        }
        return ps;
    }

    // Adjoints for every parameter, aligned with parameters(); parameters the
    // loss never reached get zeros.
    std::vector<DenseMatrix> gradients(const Tape& t) const {
        std::vector<DenseMatrix> gs;
        for (const DenseMatrix* p : parameters()) {
            int id = t.grad_node(p);
            gs.push_back(id >= 0 ? t.adjoint(id) : DenseMatrix(p->rows(), p->cols()));
        }
        return gs;
    }

    std::vector<DenseMatrix> weights;
    std::vector<DenseMatrix> biases;
    std::vector<double> output_scale;
    std::vector<double> output_offset;

private:
    std::vector<LayerSpec> layers_;
};

// Builds a scalar loss node for `model` on a fresh tape. Must be deterministic:
// it is re-evaluated many times while perturbing parameters.
using LossBuilder = std::function<int(Tape&, const MlpModel&, const DenseMatrix&)>;

// Max over parameters of |analytic - central difference| / (|analytic| + |central| + 1e-12).
inline double finite_diff_check(MlpModel& model, const LossBuilder& loss,
                                const DenseMatrix& batch, double step) {
    if (step <= 0.0) throw std::invalid_argument("mlp: finite_diff_check requires step > 0");

    Tape t;
    int l = loss(t, model, batch);
    t.backward(l);
    const std::vector<DenseMatrix> analytic = model.gradients(t);

    auto eval = [&]() {
        Tape tt;
        return tt.scalar(loss(tt, model, batch));
    };

    double worst = 0.0;
    std::vector<DenseMatrix*> params = model.parameters();
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        DenseMatrix& p = *params[pi];
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double saved = p[i];
            p[i] = saved + step;
            const double fp = eval();
            p[i] = saved - step;
            const double fm = eval();
            p[i] = saved;
            const double central = (fp - fm) / (2.0 * step);
            const double a = analytic[pi][i];
            const double err = std::abs(a - central) / (std::abs(a) + std::abs(central) + 1e-12);
            if (err > worst) worst = err;
        }
    }
    return worst;
}

}  // namespace mimgan
