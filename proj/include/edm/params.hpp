#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "edm/tensor.hpp"
#include "edm/textio.hpp"

namespace edm {

/// Named parameter tensors plus per-parameter Adam state. Entry order is
/// fixed at insertion and defines the gradient vector layout used by
/// adam_step and the checkpoint file.
struct ParamStore {
    struct Entry {
        std::string name;
        Tensor value;
        Tensor m;  // first moment
        Tensor v;  // second moment
    };

    std::vector<Entry> entries;
    std::int64_t step = 0;

    void add(std::string name, Tensor value) {
        if (find(name) != nullptr)
            throw std::invalid_argument("ParamStore: duplicate parameter '" + name + "'");
        Tensor m = Tensor::zeros(value.shape);
        Tensor v = Tensor::zeros(value.shape);
        entries.push_back(Entry{std::move(name), std::move(value), std::move(m), std::move(v)});
    }

    Entry* find(const std::string& name) {
        for (Entry& e : entries)
            if (e.name == name) return &e;
        return nullptr;
    }

    const Entry* find(const std::string& name) const {
        for (const Entry& e : entries)
            if (e.name == name) return &e;
        return nullptr;
    }

    Tensor& at(const std::string& name) {
        Entry* e = find(name);
        if (!e) throw std::invalid_argument("ParamStore: no parameter '" + name + "'");
        return e->value;
    }

    const Tensor& at(const std::string& name) const {
        const Entry* e = find(name);
        if (!e) throw std::invalid_argument("ParamStore: no parameter '" + name + "'");
        return e->value;
    }

    std::size_t total_size() const {
        std::size_t n = 0;
        for (const Entry& e : entries) n += e.value.numel();
        return n;
    }
};

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// One Adam update with bias correction. grads must be ordered like
/// params.entries. Aborts on non-finite gradients, naming the parameter.
inline void adam_step(ParamStore& params, const std::vector<Tensor>& grads, double lr,
                      const AdamConfig& cfg = {}) {
    if (grads.size() != params.entries.size())
        throw std::invalid_argument("adam_step: gradient count mismatch");
    for (std::size_t i = 0; i < grads.size(); ++i) {
        if (!grads[i].same_shape(params.entries[i].value))
            throw std::invalid_argument("adam_step: gradient shape mismatch for '" +
                                        params.entries[i].name + "'");
        if (!grads[i].all_finite())
            throw std::runtime_error("adam_step: non-finite gradient for '" +
                                     params.entries[i].name + "'");
    }
    params.step += 1;
    const double t = static_cast<double>(params.step);
    const double bc1 = 1.0 - std::pow(cfg.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.beta2, t);
    for (std::size_t i = 0; i < grads.size(); ++i) {
        ParamStore::Entry& e = params.entries[i];
        const Tensor& g = grads[i];
        for (std::size_t j = 0; j < g.numel(); ++j) {
            e.m[j] = cfg.beta1 * e.m[j] + (1.0 - cfg.beta1) * g[j];
            e.v[j] = cfg.beta2 * e.v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
            const double mhat = e.m[j] / bc1;
            const double vhat = e.v[j] / bc2;
            e.value[j] -= lr * mhat / (std::sqrt(vhat) + cfg.epsilon);
        }
    }
}

/// Versioned decimal-text container: name -> shape -> values, 17 significant
/// digits, bit-exact round trip. Extra header lines written by callers (e.g.
/// an architecture descriptor) go through the `extras` hook.
inline void save_params(const ParamStore& params, std::ostream& out,
                        const std::vector<std::string>& extras = {}) {
    out << "edmckpt 1\n";
    for (const std::string& line : extras) out << line << "\n";
    out << "params " << params.entries.size() << "\n";
    for (const ParamStore::Entry& e : params.entries) {
        out << e.name << " " << e.value.rank();
        for (std::size_t d : e.value.shape) out << " " << d;
        out << "\n";
        for (std::size_t i = 0; i < e.value.numel(); ++i) {
            if (i) out << " ";
            out << g17(e.value[i]);
        }
        out << "\n";
    }
}

/// Reads the container written by save_params. Lines before the "params"
/// marker are returned through `extras` for the caller to interpret.
inline ParamStore load_params(std::istream& in, std::vector<std::string>* extras = nullptr) {
    std::string line;
    if (!std::getline(in, line) || trim(line) != "edmckpt 1")
        throw std::runtime_error("checkpoint: unrecognized version line '" + line + "'");
    std::size_t n_params = 0;
    while (std::getline(in, line)) {
        auto toks = split_ws(line);
        if (!toks.empty() && toks[0] == "params") {
            if (toks.size() != 2)
                throw std::runtime_error("checkpoint: malformed params line");
            n_params = static_cast<std::size_t>(parse_int(toks[1], "checkpoint params count"));
            break;
        }
        if (extras) extras->push_back(line);
    }
    ParamStore params;
    for (std::size_t p = 0; p < n_params; ++p) {
        if (!std::getline(in, line))
            throw std::runtime_error("checkpoint: truncated at parameter " + std::to_string(p));
        auto toks = split_ws(line);
        if (toks.size() < 2)
            throw std::runtime_error("checkpoint: malformed shape line '" + line + "'");
        const std::string name = toks[0];
        const std::size_t rank = static_cast<std::size_t>(parse_int(toks[1], "checkpoint rank"));
        if (toks.size() != 2 + rank)
            throw std::runtime_error("checkpoint: shape arity mismatch for '" + name + "'");
        std::vector<std::size_t> shape;
        for (std::size_t d = 0; d < rank; ++d)
            shape.push_back(static_cast<std::size_t>(parse_int(toks[2 + d], "checkpoint dim")));
        if (!std::getline(in, line))
            throw std::runtime_error("checkpoint: missing values for '" + name + "'");
        auto vals = split_ws(line);
        if (vals.size() != Tensor::numel_of(shape))
            throw std::runtime_error("checkpoint: value count mismatch for '" + name + "'");
        std::vector<double> data;
        data.reserve(vals.size());
        for (const std::string& v : vals) data.push_back(parse_double(v, "checkpoint value"));
        params.add(name, Tensor(shape, std::move(data)));
    }
    return params;
}

}  // namespace edm
