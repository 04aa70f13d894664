#pragma once

#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <stdexcept>
#include <vector>

#include "edm/mlp.hpp"
#include "edm/policy.hpp"
#include "edm/rng.hpp"
#include "edm/tape.hpp"

namespace edm {

/// Langevin sampler knobs: s' = s - step_size * dE/ds + noise * N(0, I),
/// run for chain_length steps per draw.
struct SgldConfig {
    double step_size = 0.01;
    double noise = 0.01;
    std::size_t chain_length = 20;
    /// Optional clamp of chain states to the buffer init range. Off by
    /// default; useful when stiff energies would otherwise blow chains up.
    bool clamp_to_init_range = false;

    void validate() const {
        if (!(step_size > 0.0)) throw std::invalid_argument("SgldConfig: step_size must be > 0");
        if (!(noise >= 0.0)) throw std::invalid_argument("SgldConfig: noise must be >= 0");
        if (chain_length < 1) throw std::invalid_argument("SgldConfig: chain_length must be >= 1");
    }
};

/// Persistent contrastive-divergence reservoir: chains start from a stored
/// endpoint with probability 1-delta, otherwise uniform in the init range.
/// Eviction beyond capacity is strictly FIFO.
class PcdBuffer {
public:
    explicit PcdBuffer(std::size_t capacity = 10000, double delta = 0.05)
        : capacity_(capacity), delta_(delta) {
        if (capacity_ == 0) throw std::invalid_argument("PcdBuffer: capacity must be positive");
        if (!(delta_ >= 0.0 && delta_ <= 1.0))
            throw std::invalid_argument("PcdBuffer: delta must lie in [0,1]");
    }

    void set_init_range(std::vector<double> lo, std::vector<double> hi) {
        if (lo.size() != hi.size() || lo.empty())
            throw std::invalid_argument("PcdBuffer: bad init range");
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (!(lo[i] <= hi[i])) throw std::invalid_argument("PcdBuffer: lo > hi in init range");
        lo_ = std::move(lo);
        hi_ = std::move(hi);
    }

    /// Per-dimension [min, max] of the given states, expanded by `pad`
    /// fraction of the span (the uniform reference for unbounded spaces).
    void init_range_from_states(const std::vector<std::vector<double>>& states, double pad = 0.1) {
        if (states.empty()) throw std::invalid_argument("PcdBuffer: no states for init range");
        std::vector<double> lo = states[0], hi = states[0];
        for (const auto& s : states)
            for (std::size_t i = 0; i < s.size(); ++i) {
                lo[i] = std::min(lo[i], s[i]);
                hi[i] = std::max(hi[i], s[i]);
            }
        for (std::size_t i = 0; i < lo.size(); ++i) {
            const double span = hi[i] - lo[i];
            lo[i] -= pad * span;
            hi[i] += pad * span;
        }
        set_init_range(std::move(lo), std::move(hi));
    }

    bool has_init_range() const { return !lo_.empty(); }
    std::size_t dim() const { return lo_.size(); }
    std::size_t size() const { return storage_.size(); }
    std::size_t capacity() const { return capacity_; }
    double delta() const { return delta_; }
    const std::vector<double>& lo() const { return lo_; }
    const std::vector<double>& hi() const { return hi_; }
    const std::vector<double>& at(std::size_t i) const { return storage_[i]; }

    std::vector<double> uniform_state(Rng& rng) const {
        if (!has_init_range()) throw std::invalid_argument("PcdBuffer: init range not set");
        std::vector<double> s(dim());
        for (std::size_t i = 0; i < dim(); ++i) s[i] = rng.uniform(lo_[i], hi_[i]);
        return s;
    }

    /// Chain start: stored state w.p. 1-delta (when any exist), else uniform.
    std::vector<double> sample_start(Rng& rng) {
        const double u = rng.uniform();
        if (!storage_.empty() && u >= delta_) return storage_[rng.index(storage_.size())];
        return uniform_state(rng);
    }

    void push(std::vector<double> state) {
        if (state.size() != dim())
            throw std::invalid_argument("PcdBuffer: state dimension mismatch");
        storage_.push_back(std::move(state));
        while (storage_.size() > capacity_) storage_.pop_front();
    }

private:
    std::size_t capacity_;
    double delta_;
    std::vector<double> lo_, hi_;
    std::deque<std::vector<double>> storage_;
};

/// Batched energy oracle: fills energies[i] = E(states[i]) and grads[i] =
/// dE/ds at states[i].
using BatchEnergyFn = std::function<void(const std::vector<std::vector<double>>& states,
                                         std::vector<double>& energies,
                                         std::vector<std::vector<double>>& grads)>;

/// Energy of a policy network, E(s) = -logsumexp_a f(s)[a], with input
/// gradients from one taped forward/backward over the whole batch.
inline BatchEnergyFn policy_energy(const PolicyNet& net) {
    return [&net](const std::vector<std::vector<double>>& states, std::vector<double>& energies,
                  std::vector<std::vector<double>>& grads) {
        const std::size_t n = states.size(), d = net.spec.input_dim;
        Tensor batch = Tensor::zeros({n, d});
        for (std::size_t i = 0; i < n; ++i) {
            if (states[i].size() != d)
                throw std::invalid_argument("policy_energy: state dimension mismatch");
            for (std::size_t j = 0; j < d; ++j) batch(i, j) = states[i][j];
        }
        Tape tape;
        TapedMlp bound = bind_mlp(tape, net.params, net.spec);
        const VarId input = tape.leaf(std::move(batch), /*requires_grad=*/true);
        const VarId energy = tape.neg(tape.logsumexp_rows(forward_mlp(tape, bound, input)));
        tape.backward(tape.sum(energy));  // rows are independent
        const Tensor& e = tape.value(energy);
        const Tensor& g = tape.grad(input);
        energies.assign(e.data.begin(), e.data.end());
        grads.assign(n, std::vector<double>(d));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j) grads[i][j] = g(i, j);
    };
}

struct SgldStats {
    std::size_t restarts = 0;  // chains reset after producing non-finite states
};

/// Draws n approximate samples from exp(-E): each chain starts from the PCD
/// buffer (or uniform), runs chain_length Langevin steps, and its endpoint
/// is pushed back into the buffer. Chains use split RNG streams, so results
/// do not depend on any interleaving.
inline std::vector<std::vector<double>> sgld_sample(const BatchEnergyFn& energy, PcdBuffer& buffer,
                                                    const SgldConfig& cfg, std::size_t n, Rng& rng,
                                                    SgldStats* stats = nullptr) {
    cfg.validate();
    if (!buffer.has_init_range())
        throw std::invalid_argument("sgld_sample: buffer init range not set");
    const std::size_t d = buffer.dim();

    std::vector<Rng> chain_rng;
    chain_rng.reserve(n);
    const Rng base = rng.split("chains");
    for (std::size_t c = 0; c < n; ++c) chain_rng.push_back(base.split(c));
    rng.next_u64();  // advance the caller's stream so successive calls differ

    std::vector<std::vector<double>> states(n);
    for (std::size_t c = 0; c < n; ++c) states[c] = buffer.sample_start(chain_rng[c]);

    std::vector<double> energies;
    std::vector<std::vector<double>> grads;
    for (std::size_t step = 0; step < cfg.chain_length; ++step) {
        energy(states, energies, grads);
        for (std::size_t c = 0; c < n; ++c) {
            bool finite = true;
            for (std::size_t j = 0; j < d; ++j) {
                double v = states[c][j] - cfg.step_size * grads[c][j] +
                           cfg.noise * chain_rng[c].normal();
                if (cfg.clamp_to_init_range)
                    v = std::min(std::max(v, buffer.lo()[j]), buffer.hi()[j]);
                states[c][j] = v;
                finite = finite && std::isfinite(v);
            }
            if (!finite) {
                states[c] = buffer.uniform_state(chain_rng[c]);
                if (stats) stats->restarts += 1;
            }
        }
    }
    for (std::size_t c = 0; c < n; ++c) buffer.push(states[c]);
    return states;
}

}  // namespace edm
