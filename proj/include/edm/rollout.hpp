#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "edm/cartpole.hpp"
#include "edm/mdp.hpp"
#include "edm/rng.hpp"

namespace edm {

/// One demonstration record. next_state is empty only in pair-only datasets
/// loaded from external files; everything generated in-repo stores triples.
struct Transition {
    std::vector<double> state;
    std::size_t action = 0;
    std::vector<double> next_state;
    bool done = false;

    bool has_next() const { return !next_state.empty(); }
};

struct Trajectory {
    std::vector<Transition> steps;
    double undiscounted_return = 0.0;
    std::uint64_t seed = 0;  // per-episode stream, for provenance
};

/// Maps state features to a probability vector over actions.
using StochasticPolicy = std::function<std::vector<double>(const std::vector<double>&)>;

/// Inverse-CDF draw from a probability vector.
inline std::size_t sample_action(const std::vector<double>& probs, Rng& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t a = 0; a < probs.size(); ++a) {
        acc += probs[a];
        if (u < acc) return a;
    }
    return probs.size() - 1;
}

inline StochasticPolicy uniform_policy(std::size_t n_actions) {
    return [n_actions](const std::vector<double>&) {
        return std::vector<double>(n_actions, 1.0 / static_cast<double>(n_actions));
    };
}

/// Wraps a tabular policy table (rows = states) for one-hot features.
inline StochasticPolicy table_policy(std::vector<double> table, std::size_t n_actions) {
    return [table = std::move(table), n_actions](const std::vector<double>& f) {
        std::size_t s = 0;
        for (std::size_t i = 1; i < f.size(); ++i)
            if (f[i] > f[s]) s = i;
        std::vector<double> row(n_actions);
        for (std::size_t a = 0; a < n_actions; ++a) row[a] = table[s * n_actions + a];
        return row;
    };
}

/// Episodes are independently seeded from the run seed, so the set of
/// trajectories does not depend on evaluation order.
inline std::uint64_t episode_seed(std::uint64_t run_seed, std::size_t episode) {
    return Rng(run_seed).split("episode").split(static_cast<std::uint64_t>(episode)).state();
}

inline Rng episode_rng(std::uint64_t run_seed, std::size_t episode) {
    return Rng(episode_seed(run_seed, episode));
}

inline Trajectory rollout_episode(const TabularMdp& mdp, const StochasticPolicy& policy,
                                  std::size_t horizon, Rng rng, std::uint64_t provenance) {
    Trajectory traj;
    traj.seed = provenance;
    std::size_t s = sample_initial_state(mdp, rng);
    for (std::size_t t = 0; t < horizon && !mdp.is_terminal(s); ++t) {
        const std::vector<double> probs = policy(mdp.feature(s));
        if (probs.size() != mdp.n_actions)
            throw std::invalid_argument("rollout: policy output size does not match action count");
        const std::size_t a = sample_action(probs, rng);
        const StepResult step = env_step(mdp, s, a, rng);
        traj.steps.push_back(Transition{mdp.feature(s), a, mdp.feature(step.next_state), step.done});
        traj.undiscounted_return += step.reward;
        s = step.next_state;
    }
    return traj;
}

inline Trajectory rollout_episode(const Cartpole& env, const StochasticPolicy& policy,
                                  std::size_t horizon, Rng rng, std::uint64_t provenance) {
    Trajectory traj;
    traj.seed = provenance;
    std::vector<double> s = env.reset(rng);
    for (std::size_t t = 0; t < horizon; ++t) {
        const std::vector<double> probs = policy(s);
        if (probs.size() != Cartpole::n_actions)
            throw std::invalid_argument("rollout: policy output size does not match action count");
        const std::size_t a = sample_action(probs, rng);
        Cartpole::Step step = env.step(s, a);
        traj.undiscounted_return += step.reward;
        traj.steps.push_back(Transition{s, a, step.next, step.done});
        if (step.done) break;
        s = std::move(step.next);
    }
    return traj;
}

template <typename Env>
std::vector<Trajectory> rollout(const Env& env, const StochasticPolicy& policy,
                                std::size_t n_episodes, std::size_t horizon,
                                std::uint64_t run_seed) {
    std::vector<Trajectory> out;
    out.reserve(n_episodes);
    for (std::size_t e = 0; e < n_episodes; ++e) {
        const std::uint64_t s = episode_seed(run_seed, e);
        out.push_back(rollout_episode(env, policy, horizon, Rng(s), s));
    }
    return out;
}

}  // namespace edm
