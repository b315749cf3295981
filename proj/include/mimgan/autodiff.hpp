#pragma once

#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "mimgan/matrix.hpp"

namespace mimgan {

// Reverse-mode differentiation over a small op set. The tape is rebuilt per
// forward pass (define-by-run); nodes are appended in topological order and
// backward() traverses them exactly once in reverse.

enum class Op {
    Input,
    MatMul,
    AddBias,
    Sigmoid,
    Tanh,
    LeakyRelu,
    Exp,
    Log,
    Mean,
    Affine,
    Power,
    Norm,
};

struct TapeNode {
    Op op;
    int a = -1;
    int b = -1;
    // Per-op coefficients: Affine uses all three (k0*A + k1*B + k2),
    // LeakyRelu keeps its slope in k0, Power/Norm their exponent in k0.
    double k0 = 0.0;
    double k1 = 0.0;
    double k2 = 0.0;
    DenseMatrix value;
    DenseMatrix adjoint;
};

class Tape {
public:
    int input(const DenseMatrix& m) {
        m.require_finite("autodiff: input");
        TapeNode n{Op::Input};
        n.value = m;
        return push(std::move(n));
    }

    // Parameter leaf, deduplicated by address: a model used twice on one tape
    // (e.g. a discriminator applied to real and fake batches) shares one node,
    // so its adjoint accumulates contributions from every use.
    int param(const DenseMatrix* p) {
        auto it = params_.find(p);
        if (it != params_.end()) return it->second;
        int id = input(*p);
        params_.emplace(p, id);
        return id;
    }

    int matmul(int a, int b) {
        TapeNode n{Op::MatMul, a, b};
        n.value = mimgan::matmul(value(a), value(b));
        return push_checked(std::move(n), "autodiff: matmul");
    }

    // x (n x m) + bias (1 x m) broadcast over rows
    int add_bias(int x, int bias) {
        const DenseMatrix& xv = value(x);
        const DenseMatrix& bv = value(bias);
        if (bv.rows() != 1 || bv.cols() != xv.cols())
            throw std::invalid_argument("autodiff: add_bias expects 1x" + std::to_string(xv.cols()) +
                                        " bias, got " + std::to_string(bv.rows()) + "x" +
                                        std::to_string(bv.cols()));
        TapeNode n{Op::AddBias, x, bias};
        n.value = xv;
        for (std::size_t i = 0; i < xv.rows(); ++i)
            for (std::size_t j = 0; j < xv.cols(); ++j) n.value.at(i, j) += bv[j];
        return push_checked(std::move(n), "autodiff: add_bias");
    }

    int sigmoid(int a) {
        TapeNode n{Op::Sigmoid, a};
        n.value = map(a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); });
        return push_checked(std::move(n), "autodiff: sigmoid");
    }

    int tanh(int a) {
        TapeNode n{Op::Tanh, a};
        n.value = map(a, [](double x) { return std::tanh(x); });
        return push_checked(std::move(n), "autodiff: tanh");
    }

    int leaky_relu(int a, double slope) {
        TapeNode n{Op::LeakyRelu, a};
        n.k0 = slope;
        n.value = map(a, [slope](double x) { return x > 0.0 ? x : slope * x; });
        return push_checked(std::move(n), "autodiff: leaky_relu");
    }

    int exp(int a) {
        TapeNode n{Op::Exp, a};
        n.value = map(a, [](double x) { return std::exp(x); });
        return push_checked(std::move(n), "autodiff: exp");
    }

    int log(int a) {
        for (double v : value(a).data())
            if (v <= 0.0) throw std::domain_error("autodiff: log of non-positive value");
        TapeNode n{Op::Log, a};
        n.value = map(a, [](double x) { return std::log(x); });
        return push_checked(std::move(n), "autodiff: log");
    }

    // Mean over all entries -> 1x1
    int mean(int a) {
        TapeNode n{Op::Mean, a};
        n.value = DenseMatrix(1, 1, mean_of(value(a)));
        return push_checked(std::move(n), "autodiff: mean");
    }

    // alpha*A + gamma, elementwise
    int affine(int a, double alpha, double gamma) {
        TapeNode n{Op::Affine, a};
        n.k0 = alpha;
        n.k2 = gamma;
        n.value = map(a, [alpha, gamma](double x) { return alpha * x + gamma; });
        return push_checked(std::move(n), "autodiff: affine");
    }

    // alpha*A + beta*B + gamma, elementwise over same-shaped operands
    int affine(int a, int b, double alpha, double beta, double gamma) {
        require_same_shape(value(a), value(b), "autodiff: affine");
        TapeNode n{Op::Affine, a, b};
        n.k0 = alpha;
        n.k1 = beta;
        n.k2 = gamma;
        n.value = value(a);
        for (std::size_t i = 0; i < n.value.size(); ++i)
            n.value[i] = alpha * value(a)[i] + beta * value(b)[i] + gamma;
        return push_checked(std::move(n), "autodiff: affine");
    }

    int power(int a, double p) {
        TapeNode n{Op::Power, a};
        n.k0 = p;
        n.value = map(a, [p](double x) { return std::pow(x, p); });
        return push_checked(std::move(n), "autodiff: power");
    }

    // (sum_i |x_i|^p)^(1/p) -> 1x1
    int norm(int a, double p) {
        if (p < 1.0) throw std::invalid_argument("autodiff: norm requires p >= 1");
        double s = 0.0;
        for (double v : value(a).data()) s += std::pow(std::abs(v), p);
        TapeNode n{Op::Norm, a};
        n.k0 = p;
        n.value = DenseMatrix(1, 1, std::pow(s, 1.0 / p));
        return push_checked(std::move(n), "autodiff: norm");
    }

    const DenseMatrix& value(int id) const { return node(id).value; }

    const DenseMatrix& adjoint(int id) const {
        if (!backward_done_) throw std::logic_error("autodiff: adjoint requested before backward");
        return node(id).adjoint;
    }

    double scalar(int id) const {
        const DenseMatrix& v = value(id);
        if (v.rows() != 1 || v.cols() != 1)
            throw std::invalid_argument("autodiff: expected scalar node, got " +
                                        std::to_string(v.rows()) + "x" + std::to_string(v.cols()));
        return v[0];
    }

    // Seeds the loss adjoint and propagates through the tape in reverse.
    void backward(int loss, double seed = 1.0) {
        if (nodes_.empty()) throw std::logic_error("autodiff: backward before forward");
        const DenseMatrix& lv = value(loss);
        if (lv.rows() != 1 || lv.cols() != 1)
            throw std::invalid_argument("autodiff: backward requires a scalar loss");
        for (auto& n : nodes_) n.adjoint = DenseMatrix(n.value.rows(), n.value.cols());
        nodes_[static_cast<std::size_t>(loss)].adjoint[0] = seed;

        for (int id = static_cast<int>(nodes_.size()) - 1; id >= 0; --id) {
            TapeNode& n = nodes_[static_cast<std::size_t>(id)];
            const DenseMatrix& d = n.adjoint;
            switch (n.op) {
                case Op::Input:
                    break;
                case Op::MatMul: {
                    axpy(adj(n.a), mimgan::matmul(d, transpose(value(n.b))));
                    axpy(adj(n.b), mimgan::matmul(transpose(value(n.a)), d));
                    break;
                }
                case Op::AddBias: {
                    axpy(adj(n.a), d);
                    DenseMatrix& db = adj(n.b);
                    for (std::size_t i = 0; i < d.rows(); ++i)
                        for (std::size_t j = 0; j < d.cols(); ++j) db[j] += d.at(i, j);
                    break;
                }
                case Op::Sigmoid: {
                    DenseMatrix& da = adj(n.a);
                    for (std::size_t i = 0; i < d.size(); ++i) {
                        const double s = n.value[i];
                        da[i] += d[i] * s * (1.0 - s);
                    }
                    break;
                }
                case Op::Tanh: {
                    DenseMatrix& da = adj(n.a);
                    for (std::size_t i = 0; i < d.size(); ++i) {
                        const double t = n.value[i];
                        da[i] += d[i] * (1.0 - t * t);
                    }
                    break;
                }
                case Op::LeakyRelu: {
                    DenseMatrix& da = adj(n.a);
                    const DenseMatrix& x = value(n.a);
                    for (std::size_t i = 0; i < d.size(); ++i)
                        da[i] += d[i] * (x[i] > 0.0 ? 1.0 : n.k0);
                    break;
                }
                case Op::Exp: {
                    DenseMatrix& da = adj(n.a);
                    for (std::size_t i = 0; i < d.size(); ++i) da[i] += d[i] * n.value[i];
                    break;
                }
                case Op::Log: {
                    DenseMatrix& da = adj(n.a);
                    const DenseMatrix& x = value(n.a);
                    for (std::size_t i = 0; i < d.size(); ++i) da[i] += d[i] / x[i];
                    break;
                }
                case Op::Mean: {
                    DenseMatrix& da = adj(n.a);
                    const double g = d[0] / static_cast<double>(da.size());
                    for (std::size_t i = 0; i < da.size(); ++i) da[i] += g;
                    break;
                }
                case Op::Affine: {
                    axpy(adj(n.a), d, n.k0);
                    if (n.b >= 0) axpy(adj(n.b), d, n.k1);
                    break;
                }
                case Op::Power: {
                    DenseMatrix& da = adj(n.a);
                    const DenseMatrix& x = value(n.a);
                    for (std::size_t i = 0; i < d.size(); ++i)
                        da[i] += d[i] * n.k0 * std::pow(x[i], n.k0 - 1.0);
                    break;
                }
                case Op::Norm: {
                    DenseMatrix& da = adj(n.a);
                    const DenseMatrix& x = value(n.a);
                    const double y = n.value[0];
                    if (y > 0.0) {
                        const double yp = std::pow(y, 1.0 - n.k0);
                        for (std::size_t i = 0; i < da.size(); ++i) {
                            const double sgn = x[i] > 0.0 ? 1.0 : (x[i] < 0.0 ? -1.0 : 0.0);
                            da[i] += d[0] * sgn * std::pow(std::abs(x[i]), n.k0 - 1.0) * yp;
                        }
                    }
                    break;
                }
            }
        }
        backward_done_ = true;
    }

    // Tape node for a parameter registered with param(); -1 if never used.
    int grad_node(const DenseMatrix* p) const {
        auto it = params_.find(p);
        return it == params_.end() ? -1 : it->second;
    }

    std::size_t size() const { return nodes_.size(); }

private:
    const TapeNode& node(int id) const {
        if (id < 0 || id >= static_cast<int>(nodes_.size()))
            throw std::out_of_range("autodiff: bad node id " + std::to_string(id));
        return nodes_[static_cast<std::size_t>(id)];
    }

    DenseMatrix& adj(int id) { return nodes_[static_cast<std::size_t>(id)].adjoint; }

    template <typename F>
    DenseMatrix map(int a, F f) const {
        DenseMatrix out = value(a);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(out[i]);
        return out;
    }

    int push(TapeNode n) {
        nodes_.push_back(std::move(n));
        return static_cast<int>(nodes_.size()) - 1;
    }

    int push_checked(TapeNode n, const std::string& where) {
        n.value.require_finite(where);
        return push(std::move(n));
    }

    std::vector<TapeNode> nodes_;
    std::unordered_map<const DenseMatrix*, int> params_;
    bool backward_done_ = false;
};

}  // namespace mimgan
