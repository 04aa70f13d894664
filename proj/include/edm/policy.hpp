#pragma once

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "edm/mlp.hpp"
#include "edm/params.hpp"
#include "edm/rollout.hpp"
#include "edm/textio.hpp"

namespace edm {

/// Softmax policy over logits f(s)[a]; the same logits define the state
/// energy E(s) = -logsumexp_a f(s)[a], an unnormalized model of state
/// visitation. Logits are never centered: the energy term is what pins
/// the otherwise free additive offset.
struct PolicyNet {
    MlpSpec spec;
    ParamStore params;

    static PolicyNet init(MlpSpec spec, Rng& rng) {
        PolicyNet net;
        net.params = init_mlp(spec, rng);
        net.spec = std::move(spec);
        return net;
    }

    /// Conventional architecture: two hidden layers of 64 units, ELU.
    static MlpSpec default_spec(std::size_t state_dim, std::size_t n_actions) {
        return MlpSpec{state_dim, {64, 64}, n_actions, Activation::Elu};
    }

    std::vector<double> logits(const std::vector<double>& s) const {
        return mlp_forward(params, spec, s);
    }

    std::vector<double> action_probs(const std::vector<double>& s) const {
        std::vector<double> f = logits(s);
        const double lse = edm::logsumexp(f);
        for (double& v : f) v = std::exp(v - lse);
        return f;
    }

    double state_energy(const std::vector<double>& s) const {
        return -edm::logsumexp(logits(s));
    }

    StochasticPolicy as_policy() const {
        return [net = *this](const std::vector<double>& s) { return net.action_probs(s); };
    }
};

/// Reward implied by reading the logits as a soft Q-function and inverting
/// the Bellman equation along the observed transition:
///   Rhat(s,a) = f(s)[a] - gamma * logsumexp_a' f(s')[a'],
/// with zero continuation on terminal transitions. Requires triple data.
inline double implied_reward(const PolicyNet& net, const Transition& tr, double gamma) {
    const std::vector<double> f = net.logits(tr.state);
    if (tr.action >= f.size())
        throw std::invalid_argument("implied_reward: action index out of range");
    if (tr.done) return f[tr.action];
    if (!tr.has_next())
        throw std::invalid_argument(
            "implied_reward: transition lacks next_state (triple-requiring computation on pair-only data)");
    return f[tr.action] - gamma * edm::logsumexp(net.logits(tr.next_state));
}

inline void save_policy(const PolicyNet& net, std::ostream& out) {
    std::ostringstream arch;
    arch << "arch " << net.spec.input_dim;
    for (std::size_t h : net.spec.hidden) arch << " " << h;
    arch << " " << net.spec.output_dim << " " << activation_name(net.spec.activation);
    save_params(net.params, out, {arch.str()});
}

inline PolicyNet load_policy(std::istream& in) {
    std::vector<std::string> extras;
    ParamStore params = load_params(in, &extras);
    MlpSpec spec;
    bool have_arch = false;
    for (const std::string& line : extras) {
        auto toks = split_ws(line);
        if (toks.empty() || toks[0] != "arch") continue;
        if (toks.size() < 4)
            throw std::runtime_error("policy checkpoint: malformed arch line '" + line + "'");
        spec.input_dim = static_cast<std::size_t>(parse_int(toks[1], "arch input"));
        for (std::size_t i = 2; i + 2 < toks.size(); ++i)
            spec.hidden.push_back(static_cast<std::size_t>(parse_int(toks[i], "arch hidden")));
        spec.output_dim = static_cast<std::size_t>(parse_int(toks[toks.size() - 2], "arch output"));
        spec.activation = activation_from_name(toks.back());
        have_arch = true;
    }
    if (!have_arch) throw std::runtime_error("policy checkpoint: missing arch line");
    check_mlp_params(params, spec);
    PolicyNet net;
    net.spec = std::move(spec);
    net.params = std::move(params);
    return net;
}

inline void save_policy_file(const PolicyNet& net, const std::string& path) {
    auto f = open_out(path);
    save_policy(net, f);
}

inline PolicyNet load_policy_file(const std::string& path) {
    auto f = open_in(path);
    return load_policy(f);
}

}  // namespace edm
