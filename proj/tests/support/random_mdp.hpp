#pragma once

// Random MDP instances for property tests (no terminal states unless asked).

#include <cmath>
#include <vector>

#include "edm/mdp.hpp"
#include "edm/rng.hpp"

namespace testutil {

inline edm::TabularMdp random_mdp(std::size_t n_states, std::size_t n_actions, double gamma,
                                  edm::Rng& rng) {
    edm::TabularMdp mdp;
    mdp.name = "random";
    mdp.n_states = n_states;
    mdp.n_actions = n_actions;
    mdp.gamma = gamma;
    mdp.transition.assign(n_states * n_actions * n_states, 0.0);
    mdp.reward.assign(n_states * n_actions, 0.0);
    mdp.initial_dist.assign(n_states, 0.0);
    mdp.terminal.assign(n_states, 0);
    for (std::size_t s = 0; s < n_states; ++s)
        for (std::size_t a = 0; a < n_actions; ++a) {
            double sum = 0.0;
            std::vector<double> row(n_states);
            for (std::size_t s2 = 0; s2 < n_states; ++s2) {
                row[s2] = -std::log(1.0 - rng.uniform());  // exponential
                sum += row[s2];
            }
            double acc = 0.0;
            for (std::size_t s2 = 0; s2 + 1 < n_states; ++s2) {
                row[s2] /= sum;
                acc += row[s2];
            }
            row[n_states - 1] = 1.0 - acc;  // exact normalization
            for (std::size_t s2 = 0; s2 < n_states; ++s2) mdp.t(s, a, s2) = row[s2];
            mdp.r(s, a) = rng.uniform(-1.0, 1.0);
        }
    double isum = 0.0;
    std::vector<double> init(n_states);
    for (std::size_t s = 0; s < n_states; ++s) {
        init[s] = rng.uniform(0.01, 1.0);
        isum += init[s];
    }
    double acc = 0.0;
    for (std::size_t s = 0; s + 1 < n_states; ++s) {
        init[s] /= isum;
        acc += init[s];
    }
    init[n_states - 1] = 1.0 - acc;
    mdp.initial_dist = init;
    mdp.validate();
    return mdp;
}

inline std::vector<double> random_policy_table(std::size_t n_states, std::size_t n_actions,
                                               edm::Rng& rng) {
    std::vector<double> table(n_states * n_actions);
    for (std::size_t s = 0; s < n_states; ++s) {
        double sum = 0.0;
        for (std::size_t a = 0; a < n_actions; ++a) {
            table[s * n_actions + a] = -std::log(1.0 - rng.uniform());
            sum += table[s * n_actions + a];
        }
        double acc = 0.0;
        for (std::size_t a = 0; a + 1 < n_actions; ++a) {
            table[s * n_actions + a] /= sum;
            acc += table[s * n_actions + a];
        }
        table[s * n_actions + n_actions - 1] = 1.0 - acc;
    }
    return table;
}

inline std::vector<double> random_q(std::size_t n_states, std::size_t n_actions, edm::Rng& rng,
                                    double lo = -2.0, double hi = 2.0) {
    std::vector<double> q(n_states * n_actions);
    for (double& v : q) v = rng.uniform(lo, hi);
    return q;
}

}  // namespace testutil
