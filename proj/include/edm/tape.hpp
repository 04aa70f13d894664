#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "edm/tensor.hpp"

namespace edm {

using VarId = std::size_t;

/// Reverse-mode tape over dense tensors.
///
/// Nodes are appended in construction order, so every operand precedes its
/// consumers and one reverse sweep propagates all adjoints. Primitives are
/// tensor-level (matmul, activations, reductions), not per-scalar. Gradients
/// flow only into nodes created with requires_grad (leaves opt in; interior
/// nodes inherit from their operands), so input gradients cost nothing
/// unless requested.
class Tape {
public:
    /// Register an input tensor. requires_grad marks a differentiable leaf.
    VarId leaf(Tensor value, bool requires_grad = false) {
        return push(std::move(value), requires_grad, nullptr);
    }

    const Tensor& value(VarId id) const { return nodes_[id].value; }

    /// Adjoint of a node. Zero for nodes untouched by the last backward pass.
    const Tensor& grad(VarId id) {
        ensure_grad(id);
        return nodes_[id].grad;
    }

    std::size_t size() const { return nodes_.size(); }

    /// [m,k] x [k,n] -> [m,n]
    VarId matmul(VarId a, VarId b) {
        const Tensor& A = nodes_[a].value;
        const Tensor& B = nodes_[b].value;
        if (A.rank() != 2 || B.rank() != 2 || A.cols() != B.rows())
            throw std::invalid_argument("matmul: incompatible shapes " +
                                        shape_string(A.shape) + " x " + shape_string(B.shape));
        const std::size_t m = A.rows(), k = A.cols(), n = B.cols();
        Tensor out = Tensor::zeros({m, n});
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t p = 0; p < k; ++p) {
                const double av = A(i, p);
                for (std::size_t j = 0; j < n; ++j) out(i, j) += av * B(p, j);
            }
        return push(std::move(out), needs(a) || needs(b), [a, b](Tape& t, VarId self) {
            const Tensor& A = t.nodes_[a].value;
            const Tensor& B = t.nodes_[b].value;
            const Tensor& G = t.nodes_[self].grad;
            const std::size_t m = A.rows(), k = A.cols(), n = B.cols();
            if (t.needs(a)) {
                Tensor& dA = t.grad_ref(a);
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t j = 0; j < n; ++j) {
                        const double g = G(i, j);
                        for (std::size_t p = 0; p < k; ++p) dA(i, p) += g * B(p, j);
                    }
            }
            if (t.needs(b)) {
                Tensor& dB = t.grad_ref(b);
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t p = 0; p < k; ++p) {
                        const double av = A(i, p);
                        for (std::size_t j = 0; j < n; ++j) dB(p, j) += av * G(i, j);
                    }
            }
        });
    }

    /// [m,n] + [n], bias broadcast over rows.
    VarId add_bias(VarId x, VarId bias) {
        const Tensor& X = nodes_[x].value;
        const Tensor& B = nodes_[bias].value;
        if (X.rank() != 2 || B.rank() != 1 || X.cols() != B.numel())
            throw std::invalid_argument("add_bias: incompatible shapes " +
                                        shape_string(X.shape) + " + " + shape_string(B.shape));
        Tensor out = X;
        for (std::size_t i = 0; i < X.rows(); ++i)
            for (std::size_t j = 0; j < X.cols(); ++j) out(i, j) += B[j];
        return push(std::move(out), needs(x) || needs(bias), [x, bias](Tape& t, VarId self) {
            const Tensor& G = t.nodes_[self].grad;
            if (t.needs(x)) {
                Tensor& dX = t.grad_ref(x);
                for (std::size_t i = 0; i < G.numel(); ++i) dX[i] += G[i];
            }
            if (t.needs(bias)) {
                Tensor& dB = t.grad_ref(bias);
                for (std::size_t i = 0; i < G.rows(); ++i)
                    for (std::size_t j = 0; j < G.cols(); ++j) dB[j] += G(i, j);
            }
        });
    }

    VarId add(VarId a, VarId b) { return binary(a, b, "add", [](double x, double y) { return x + y; }, 1.0, 1.0); }
    VarId sub(VarId a, VarId b) { return binary(a, b, "sub", [](double x, double y) { return x - y; }, 1.0, -1.0); }

    /// Elementwise product.
    VarId mul(VarId a, VarId b) {
        check_same_shape(a, b, "mul");
        const Tensor& A = nodes_[a].value;
        const Tensor& B = nodes_[b].value;
        Tensor out = A;
        for (std::size_t i = 0; i < out.numel(); ++i) out[i] = A[i] * B[i];
        return push(std::move(out), needs(a) || needs(b), [a, b](Tape& t, VarId self) {
            const Tensor& G = t.nodes_[self].grad;
            const Tensor& A = t.nodes_[a].value;
            const Tensor& B = t.nodes_[b].value;
            if (t.needs(a)) {
                Tensor& dA = t.grad_ref(a);
                for (std::size_t i = 0; i < G.numel(); ++i) dA[i] += G[i] * B[i];
            }
            if (t.needs(b)) {
                Tensor& dB = t.grad_ref(b);
                for (std::size_t i = 0; i < G.numel(); ++i) dB[i] += G[i] * A[i];
            }
        });
    }

    VarId scale(VarId a, double c) {
        Tensor out = nodes_[a].value;
        for (double& v : out.data) v *= c;
        return push(std::move(out), needs(a), [a, c](Tape& t, VarId self) {
            if (!t.needs(a)) return;
            const Tensor& G = t.nodes_[self].grad;
            Tensor& dA = t.grad_ref(a);
            for (std::size_t i = 0; i < G.numel(); ++i) dA[i] += c * G[i];
        });
    }

    VarId neg(VarId a) { return scale(a, -1.0); }

    VarId relu(VarId a) {
        return unary(a, [](double x) { return x > 0.0 ? x : 0.0; },
                     [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
    }

    VarId elu(VarId a) {
        return unary(a, [](double x) { return x > 0.0 ? x : std::expm1(x); },
                     [](double x, double y) { return x > 0.0 ? 1.0 : y + 1.0; });
    }

    VarId tanh(VarId a) {
        return unary(a, [](double x) { return std::tanh(x); },
                     [](double, double y) { return 1.0 - y * y; });
    }

    VarId square(VarId a) {
        return unary(a, [](double x) { return x * x; },
                     [](double x, double) { return 2.0 * x; });
    }

    /// |x| with subgradient fixed to 0 at x = 0.
    VarId abs(VarId a) {
        return unary(a, [](double x) { return std::fabs(x); },
                     [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
    }

    /// Numerically stable logsumexp along `axis`. Rank-1 input reduces to a
    /// scalar (axis must be 0); rank-2 reduces the given axis.
    VarId logsumexp(VarId a, std::size_t axis) {
        const Tensor& A = nodes_[a].value;
        if (A.rank() == 0 || axis >= A.rank())
            throw std::invalid_argument("logsumexp: axis " + std::to_string(axis) +
                                        " invalid for shape " + shape_string(A.shape));
        if (A.shape[axis] == 0)
            throw std::invalid_argument("logsumexp: empty axis");
        // Normalize to reducing the last axis of an [outer, inner] view.
        const bool transpose = (A.rank() == 2 && axis == 0);
        const std::size_t outer = A.rank() == 1 ? 1 : (transpose ? A.cols() : A.rows());
        const std::size_t inner = A.rank() == 1 ? A.numel() : (transpose ? A.rows() : A.cols());
        auto at = [&](std::size_t o, std::size_t i) -> double {
            if (A.rank() == 1) return A[i];
            return transpose ? A(i, o) : A(o, i);
        };
        Tensor out = A.rank() == 1 ? Tensor::scalar(0.0) : Tensor::zeros({outer});
        for (std::size_t o = 0; o < outer; ++o) {
            double mx = at(o, 0);
            for (std::size_t i = 1; i < inner; ++i) mx = std::max(mx, at(o, i));
            double s = 0.0;
            for (std::size_t i = 0; i < inner; ++i) s += std::exp(at(o, i) - mx);
            out[o] = mx + std::log(s);
        }
        return push(std::move(out), needs(a), [a, transpose, outer, inner](Tape& t, VarId self) {
            if (!t.needs(a)) return;
            const Tensor& A = t.nodes_[a].value;
            const Tensor& Y = t.nodes_[self].value;
            const Tensor& G = t.nodes_[self].grad;
            Tensor& dA = t.grad_ref(a);
            for (std::size_t o = 0; o < outer; ++o)
                for (std::size_t i = 0; i < inner; ++i) {
                    const std::size_t idx = A.rank() == 1 ? i : (transpose ? i * A.cols() + o : o * A.cols() + i);
                    dA[idx] += G[o] * std::exp(A.data[idx] - Y[o]);
                }
        });
    }

    /// Reduce the last axis: [m,n] -> [m].
    VarId logsumexp_rows(VarId a) { return logsumexp(a, nodes_[a].value.rank() - 1); }

    /// out[i] = X[i, cols[i]] for a rank-2 X.
    VarId gather_rows(VarId x, std::vector<std::size_t> cols) {
        const Tensor& X = nodes_[x].value;
        if (X.rank() != 2 || cols.size() != X.rows())
            throw std::invalid_argument("gather_rows: need one column index per row");
        for (std::size_t i = 0; i < cols.size(); ++i)
            if (cols[i] >= X.cols())
                throw std::invalid_argument("gather_rows: column index out of range at row " + std::to_string(i));
        Tensor out = Tensor::zeros({X.rows()});
        for (std::size_t i = 0; i < X.rows(); ++i) out[i] = X(i, cols[i]);
        return push(std::move(out), needs(x), [x, cols = std::move(cols)](Tape& t, VarId self) {
            if (!t.needs(x)) return;
            const Tensor& G = t.nodes_[self].grad;
            Tensor& dX = t.grad_ref(x);
            const std::size_t n = t.nodes_[x].value.cols();
            for (std::size_t i = 0; i < G.numel(); ++i) dX[i * n + cols[i]] += G[i];
        });
    }

    /// Elementwise product with detached per-element factors (no gradient
    /// into the factors). Rank-1 x rank-1, or rank-2 scaled row by row.
    VarId rowwise_scale(VarId x, std::vector<double> factors) {
        const Tensor& X = nodes_[x].value;
        const std::size_t groups = X.rank() <= 1 ? X.numel() : X.rows();
        if (factors.size() != groups)
            throw std::invalid_argument("rowwise_scale: factor count mismatch");
        const std::size_t stride = X.rank() <= 1 ? 1 : X.cols();
        Tensor out = X;
        for (std::size_t g = 0; g < groups; ++g)
            for (std::size_t j = 0; j < stride; ++j) out[g * stride + j] *= factors[g];
        return push(std::move(out), needs(x), [x, factors = std::move(factors), stride](Tape& t, VarId self) {
            if (!t.needs(x)) return;
            const Tensor& G = t.nodes_[self].grad;
            Tensor& dX = t.grad_ref(x);
            for (std::size_t g = 0; g < factors.size(); ++g)
                for (std::size_t j = 0; j < stride; ++j)
                    dX[g * stride + j] += factors[g] * G[g * stride + j];
        });
    }

    /// Scalar sum_i w[i] * x[i] with detached weights.
    VarId weighted_sum(VarId x, std::vector<double> weights) {
        const Tensor& X = nodes_[x].value;
        if (weights.size() != X.numel())
            throw std::invalid_argument("weighted_sum: weight count mismatch");
        double s = 0.0;
        for (std::size_t i = 0; i < X.numel(); ++i) s += weights[i] * X[i];
        return push(Tensor::scalar(s), needs(x), [x, weights = std::move(weights)](Tape& t, VarId self) {
            if (!t.needs(x)) return;
            const double g = t.nodes_[self].grad[0];
            Tensor& dX = t.grad_ref(x);
            for (std::size_t i = 0; i < weights.size(); ++i) dX[i] += weights[i] * g;
        });
    }

    VarId sum(VarId a) {
        const Tensor& A = nodes_[a].value;
        double s = 0.0;
        for (double v : A.data) s += v;
        return push(Tensor::scalar(s), needs(a), [a](Tape& t, VarId self) {
            if (!t.needs(a)) return;
            const double g = t.nodes_[self].grad[0];
            Tensor& dA = t.grad_ref(a);
            for (std::size_t i = 0; i < dA.numel(); ++i) dA[i] += g;
        });
    }

    VarId mean(VarId a) {
        const std::size_t n = nodes_[a].value.numel();
        if (n == 0) throw std::invalid_argument("mean: empty tensor");
        return scale(sum(a), 1.0 / static_cast<double>(n));
    }

    /// Reverse sweep from a scalar output. Adjoints accumulate into every
    /// differentiable node that participated; other leaves stay zero.
    void backward(VarId out) {
        if (nodes_[out].value.numel() != 1)
            throw std::invalid_argument("backward: output must be a scalar, got shape " +
                                        shape_string(nodes_[out].value.shape));
        for (Node& n : nodes_) {
            if (!n.grad.data.empty())
                std::fill(n.grad.data.begin(), n.grad.data.end(), 0.0);
        }
        ensure_grad(out);
        nodes_[out].grad[0] = 1.0;
        for (std::size_t i = out + 1; i-- > 0;) {
            Node& n = nodes_[i];
            if (n.back && n.requires_grad) n.back(*this, i);
        }
    }

private:
    struct Node {
        Tensor value;
        Tensor grad;  // allocated lazily, zero until backward touches it
        bool requires_grad;
        std::function<void(Tape&, VarId)> back;
    };

    std::vector<Node> nodes_;

    bool needs(VarId id) const { return nodes_[id].requires_grad; }

    void ensure_grad(VarId id) {
        if (nodes_[id].grad.data.empty())
            nodes_[id].grad = Tensor::zeros(nodes_[id].value.shape);
    }

    Tensor& grad_ref(VarId id) {
        ensure_grad(id);
        return nodes_[id].grad;
    }

    VarId push(Tensor value, bool requires_grad, std::function<void(Tape&, VarId)> back) {
        nodes_.push_back(Node{std::move(value), Tensor{}, requires_grad, std::move(back)});
        return nodes_.size() - 1;
    }

    void check_same_shape(VarId a, VarId b, const char* op) const {
        if (!nodes_[a].value.same_shape(nodes_[b].value))
            throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                        shape_string(nodes_[a].value.shape) + " vs " +
                                        shape_string(nodes_[b].value.shape));
    }

    template <typename F>
    VarId binary(VarId a, VarId b, const char* name, F f, double da, double db) {
        check_same_shape(a, b, name);
        const Tensor& A = nodes_[a].value;
        const Tensor& B = nodes_[b].value;
        Tensor out = A;
        for (std::size_t i = 0; i < out.numel(); ++i) out[i] = f(A[i], B[i]);
        return push(std::move(out), needs(a) || needs(b), [a, b, da, db](Tape& t, VarId self) {
            const Tensor& G = t.nodes_[self].grad;
            if (t.needs(a)) {
                Tensor& dA = t.grad_ref(a);
                for (std::size_t i = 0; i < G.numel(); ++i) dA[i] += da * G[i];
            }
            if (t.needs(b)) {
                Tensor& dB = t.grad_ref(b);
                for (std::size_t i = 0; i < G.numel(); ++i) dB[i] += db * G[i];
            }
        });
    }

    /// Elementwise op; dfn receives (x, y) where y is the stored output.
    template <typename F, typename D>
    VarId unary(VarId a, F f, D dfn) {
        const Tensor& A = nodes_[a].value;
        Tensor out = A;
        for (std::size_t i = 0; i < out.numel(); ++i) out[i] = f(A[i]);
        return push(std::move(out), needs(a), [a, dfn](Tape& t, VarId self) {
            if (!t.needs(a)) return;
            const Tensor& G = t.nodes_[self].grad;
            const Tensor& X = t.nodes_[a].value;
            const Tensor& Y = t.nodes_[self].value;
            Tensor& dA = t.grad_ref(a);
            for (std::size_t i = 0; i < G.numel(); ++i) dA[i] += dfn(X[i], Y[i]) * G[i];
        });
    }
};

}  // namespace edm
