#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "edm/params.hpp"
#include "edm/rng.hpp"
#include "edm/tape.hpp"

namespace edm {

enum class Activation { Elu, Relu, Tanh };

inline const char* activation_name(Activation a) {
    switch (a) {
        case Activation::Elu: return "elu";
        case Activation::Relu: return "relu";
        case Activation::Tanh: return "tanh";
    }
    throw std::logic_error("activation_name: bad enum");
}

inline Activation activation_from_name(const std::string& s) {
    if (s == "elu") return Activation::Elu;
    if (s == "relu") return Activation::Relu;
    if (s == "tanh") return Activation::Tanh;
    throw std::invalid_argument("unknown activation '" + s + "'");
}

/// Fully connected network: input -> hidden... -> output logits. Hidden may
/// be empty, giving a single linear map (used for tabular lookup policies).
struct MlpSpec {
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden;
    std::size_t output_dim = 0;
    Activation activation = Activation::Elu;

    std::vector<std::size_t> layer_dims() const {
        std::vector<std::size_t> dims;
        dims.push_back(input_dim);
        for (std::size_t h : hidden) dims.push_back(h);
        dims.push_back(output_dim);
        return dims;
    }

    std::size_t n_layers() const { return hidden.size() + 1; }
};

/// Weights uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)], biases zero.
/// Draw order is fixed (layer by layer, row-major) so results are seed-stable.
inline ParamStore init_mlp(const MlpSpec& spec, Rng& rng) {
    if (spec.input_dim == 0 || spec.output_dim == 0)
        throw std::invalid_argument("init_mlp: zero input or output dimension");
    ParamStore params;
    const auto dims = spec.layer_dims();
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const std::size_t fan_in = dims[l], fan_out = dims[l + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        Tensor w = Tensor::zeros({fan_in, fan_out});
        for (double& v : w.data) v = rng.uniform(-bound, bound);
        params.add("W" + std::to_string(l), std::move(w));
        params.add("b" + std::to_string(l), Tensor::zeros({fan_out}));
    }
    return params;
}

inline void check_mlp_params(const ParamStore& params, const MlpSpec& spec) {
    const auto dims = spec.layer_dims();
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const Tensor& w = params.at("W" + std::to_string(l));
        const Tensor& b = params.at("b" + std::to_string(l));
        if (w.shape != std::vector<std::size_t>{dims[l], dims[l + 1]})
            throw std::invalid_argument("layer " + std::to_string(l) + ": weight shape " +
                                        shape_string(w.shape) + " does not match spec " +
                                        shape_string({dims[l], dims[l + 1]}));
        if (b.shape != std::vector<std::size_t>{dims[l + 1]})
            throw std::invalid_argument("layer " + std::to_string(l) + ": bias shape " +
                                        shape_string(b.shape) + " does not match spec");
    }
}

/// A ParamStore bound onto a tape as differentiable leaves, in entry order.
struct TapedMlp {
    const MlpSpec* spec;
    std::vector<VarId> leaves;  // same order as params.entries

    std::vector<Tensor> grads(Tape& tape) const {
        std::vector<Tensor> out;
        out.reserve(leaves.size());
        for (VarId id : leaves) out.push_back(tape.grad(id));
        return out;
    }
};

inline TapedMlp bind_mlp(Tape& tape, const ParamStore& params, const MlpSpec& spec) {
    check_mlp_params(params, spec);
    TapedMlp bound;
    bound.spec = &spec;
    for (const ParamStore::Entry& e : params.entries)
        bound.leaves.push_back(tape.leaf(e.value, /*requires_grad=*/true));
    return bound;
}

/// Forward pass for a [batch, input_dim] input already on the tape.
/// Records every primitive; activation applies to hidden layers only.
inline VarId forward_mlp(Tape& tape, const TapedMlp& net, VarId input) {
    const MlpSpec& spec = *net.spec;
    const Tensor& x = tape.value(input);
    if (x.rank() != 2 || x.cols() != spec.input_dim)
        throw std::invalid_argument("forward_mlp: input shape " + shape_string(x.shape) +
                                    " does not match layer 0 input width " +
                                    std::to_string(spec.input_dim));
    VarId h = input;
    for (std::size_t l = 0; l < spec.n_layers(); ++l) {
        const VarId w = net.leaves[2 * l];
        const VarId b = net.leaves[2 * l + 1];
        h = tape.add_bias(tape.matmul(h, w), b);
        if (l + 1 < spec.n_layers()) {
            switch (spec.activation) {
                case Activation::Elu: h = tape.elu(h); break;
                case Activation::Relu: h = tape.relu(h); break;
                case Activation::Tanh: h = tape.tanh(h); break;
            }
        }
    }
    return h;
}

/// Plain forward for one state; loop order mirrors the taped kernels so the
/// two paths produce identical doubles.
inline std::vector<double> mlp_forward(const ParamStore& params, const MlpSpec& spec,
                                       const std::vector<double>& x) {
    if (x.size() != spec.input_dim)
        throw std::invalid_argument("mlp_forward: input size " + std::to_string(x.size()) +
                                    " does not match layer 0 input width " +
                                    std::to_string(spec.input_dim));
    std::vector<double> h = x;
    for (std::size_t l = 0; l < spec.n_layers(); ++l) {
        const Tensor& w = params.at("W" + std::to_string(l));
        const Tensor& b = params.at("b" + std::to_string(l));
        if (h.size() != w.rows())
            throw std::invalid_argument("mlp_forward: layer " + std::to_string(l) + " width mismatch");
        std::vector<double> out(w.cols(), 0.0);
        for (std::size_t p = 0; p < w.rows(); ++p) {
            const double hv = h[p];
            for (std::size_t j = 0; j < w.cols(); ++j) out[j] += hv * w(p, j);
        }
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += b[j];
        if (l + 1 < spec.n_layers()) {
            for (double& v : out) {
                switch (spec.activation) {
                    case Activation::Elu: v = v > 0.0 ? v : std::expm1(v); break;
                    case Activation::Relu: v = v > 0.0 ? v : 0.0; break;
                    case Activation::Tanh: v = std::tanh(v); break;
                }
            }
        }
        h = std::move(out);
    }
    return h;
}

/// Stable logsumexp of a plain vector (max-shift form, exact for one element).
inline double logsumexp(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("logsumexp: empty vector");
    double mx = v[0];
    for (double x : v) mx = std::max(mx, x);
    double s = 0.0;
    for (double x : v) s += std::exp(x - mx);
    return mx + std::log(s);
}

}  // namespace edm
