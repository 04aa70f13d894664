#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "edm/rng.hpp"
#include "edm/textio.hpp"

namespace edm {

/// Finite MDP with exact dynamics: transition tensor T[s][a][s'], reward
/// table R[s][a], discount, initial distribution, and absorbing terminal
/// states (self-loop, zero reward). State features are one-hot.
struct TabularMdp {
    std::string name;
    std::size_t n_states = 0;
    std::size_t n_actions = 0;
    std::vector<double> transition;  // [s][a][s'], rows sum to 1
    std::vector<double> reward;      // [s][a]
    double gamma = 0.0;
    std::vector<double> initial_dist;
    std::vector<std::uint8_t> terminal;

    double t(std::size_t s, std::size_t a, std::size_t s2) const {
        return transition[(s * n_actions + a) * n_states + s2];
    }
    double& t(std::size_t s, std::size_t a, std::size_t s2) {
        return transition[(s * n_actions + a) * n_states + s2];
    }
    double r(std::size_t s, std::size_t a) const { return reward[s * n_actions + a]; }
    double& r(std::size_t s, std::size_t a) { return reward[s * n_actions + a]; }
    bool is_terminal(std::size_t s) const { return terminal[s] != 0; }

    std::vector<double> feature(std::size_t s) const {
        std::vector<double> f(n_states, 0.0);
        f[s] = 1.0;
        return f;
    }

    std::size_t state_from_feature(const std::vector<double>& f) const {
        std::size_t best = 0;
        for (std::size_t i = 1; i < f.size(); ++i)
            if (f[i] > f[best]) best = i;
        return best;
    }

    /// All one-hot feature vectors, state order.
    std::vector<std::vector<double>> all_features() const {
        std::vector<std::vector<double>> out;
        out.reserve(n_states);
        for (std::size_t s = 0; s < n_states; ++s) out.push_back(feature(s));
        return out;
    }

    void validate() const {
        if (n_states == 0 || n_actions == 0)
            throw std::invalid_argument("TabularMdp: empty state or action space");
        if (!(gamma > 0.0 && gamma < 1.0))
            throw std::invalid_argument("TabularMdp: discount must lie in (0,1)");
        for (std::size_t s = 0; s < n_states; ++s)
            for (std::size_t a = 0; a < n_actions; ++a) {
                double sum = 0.0;
                for (std::size_t s2 = 0; s2 < n_states; ++s2) {
                    const double p = t(s, a, s2);
                    if (p < 0.0) throw std::invalid_argument("TabularMdp: negative transition probability");
                    sum += p;
                }
                if (std::fabs(sum - 1.0) > 1e-12)
                    throw std::invalid_argument("TabularMdp: transition row does not sum to 1 at s=" +
                                                std::to_string(s) + " a=" + std::to_string(a));
            }
        double isum = 0.0;
        for (double p : initial_dist) isum += p;
        if (std::fabs(isum - 1.0) > 1e-12)
            throw std::invalid_argument("TabularMdp: initial distribution does not sum to 1");
        for (std::size_t s = 0; s < n_states; ++s) {
            if (!is_terminal(s)) continue;
            for (std::size_t a = 0; a < n_actions; ++a) {
                if (std::fabs(t(s, a, s) - 1.0) > 1e-12)
                    throw std::invalid_argument("TabularMdp: terminal state " + std::to_string(s) +
                                                " is not absorbing");
                if (r(s, a) != 0.0)
                    throw std::invalid_argument("TabularMdp: terminal state " + std::to_string(s) +
                                                " has nonzero reward");
            }
        }
    }
};

/// Gridworld actions, also the perpendicular-slip pairs.
enum GridAction : std::size_t { kNorth = 0, kEast = 1, kSouth = 2, kWest = 3 };

/// width x height grid, 4 actions. Intended move with probability 1-slip,
/// each perpendicular neighbor with slip/2; walls block (stay in place).
/// The goal cell is absorbing; R(s,a) = step_cost + goal_reward * P(next is
/// goal | s,a). Goal is the bottom-right cell; episodes start at the
/// top-left cell, or uniformly over non-goal cells with uniform_start.
inline TabularMdp build_gridworld(std::size_t width, std::size_t height, double slip,
                                  double goal_reward, double step_cost, double gamma,
                                  bool uniform_start = false) {
    if (width * height < 2)
        throw std::invalid_argument("build_gridworld: need at least 2 cells");
    if (!(slip >= 0.0 && slip < 1.0))
        throw std::invalid_argument("build_gridworld: slip must lie in [0,1)");
    TabularMdp mdp;
    mdp.name = "gridworld-" + std::to_string(width) + "x" + std::to_string(height);
    mdp.n_states = width * height;
    mdp.n_actions = 4;
    mdp.gamma = gamma;
    mdp.transition.assign(mdp.n_states * 4 * mdp.n_states, 0.0);
    mdp.reward.assign(mdp.n_states * 4, 0.0);
    mdp.initial_dist.assign(mdp.n_states, 0.0);
    mdp.terminal.assign(mdp.n_states, 0);
    const std::size_t goal = mdp.n_states - 1;
    mdp.terminal[goal] = 1;
    if (uniform_start) {
        double acc = 0.0;
        for (std::size_t s = 0; s + 2 < mdp.n_states; ++s) {
            mdp.initial_dist[s] = 1.0 / static_cast<double>(mdp.n_states - 1);
            acc += mdp.initial_dist[s];
        }
        mdp.initial_dist[mdp.n_states - 2] = 1.0 - acc;  // exact normalization
    } else {
        mdp.initial_dist[0] = 1.0;
    }

    auto move = [&](std::size_t cell, std::size_t action) -> std::size_t {
        const std::size_t col = cell % width, row = cell / width;
        switch (action) {
            case kNorth: return row == 0 ? cell : cell - width;
            case kEast: return col + 1 == width ? cell : cell + 1;
            case kSouth: return row + 1 == height ? cell : cell + width;
            case kWest: return col == 0 ? cell : cell - 1;
        }
        throw std::logic_error("build_gridworld: bad action");
    };
    const std::size_t perp[4][2] = {{kEast, kWest}, {kNorth, kSouth}, {kEast, kWest}, {kNorth, kSouth}};

    for (std::size_t s = 0; s < mdp.n_states; ++s) {
        if (mdp.is_terminal(s)) {
            for (std::size_t a = 0; a < 4; ++a) mdp.t(s, a, s) = 1.0;
            continue;
        }
        for (std::size_t a = 0; a < 4; ++a) {
            mdp.t(s, a, move(s, a)) += 1.0 - slip;
            mdp.t(s, a, move(s, perp[a][0])) += slip / 2.0;
            mdp.t(s, a, move(s, perp[a][1])) += slip / 2.0;
            mdp.r(s, a) = step_cost + goal_reward * mdp.t(s, a, goal);
        }
    }
    mdp.validate();
    return mdp;
}

/// Linear chain of n states, 2 actions (left/right). Intended direction with
/// probability 1-slip, the reverse with slip; ends clamp. The last state is
/// the absorbing goal.
inline TabularMdp build_chain(std::size_t n, double slip, double goal_reward, double step_cost,
                              double gamma) {
    if (n < 2) throw std::invalid_argument("build_chain: need at least 2 states");
    if (!(slip >= 0.0 && slip < 1.0))
        throw std::invalid_argument("build_chain: slip must lie in [0,1)");
    TabularMdp mdp;
    mdp.name = "chain-" + std::to_string(n);
    mdp.n_states = n;
    mdp.n_actions = 2;
    mdp.gamma = gamma;
    mdp.transition.assign(n * 2 * n, 0.0);
    mdp.reward.assign(n * 2, 0.0);
    mdp.initial_dist.assign(n, 0.0);
    mdp.initial_dist[0] = 1.0;
    mdp.terminal.assign(n, 0);
    mdp.terminal[n - 1] = 1;

    auto move = [&](std::size_t s, std::size_t a) -> std::size_t {
        if (a == 0) return s == 0 ? s : s - 1;
        return s + 1 == n ? s : s + 1;
    };
    for (std::size_t s = 0; s + 1 < n; ++s) {
        for (std::size_t a = 0; a < 2; ++a) {
            mdp.t(s, a, move(s, a)) += 1.0 - slip;
            mdp.t(s, a, move(s, 1 - a)) += slip;
            mdp.r(s, a) = step_cost + goal_reward * mdp.t(s, a, n - 1);
        }
    }
    for (std::size_t a = 0; a < 2; ++a) mdp.t(n - 1, a, n - 1) = 1.0;
    mdp.validate();
    return mdp;
}

struct StepResult {
    std::size_t next_state;
    double reward;
    bool done;
};

/// One environment transition: s' ~ T[s][a], reward R[s][a]. Stepping from a
/// terminal state is a contract violation.
inline StepResult env_step(const TabularMdp& mdp, std::size_t s, std::size_t a, Rng& rng) {
    if (s >= mdp.n_states || a >= mdp.n_actions)
        throw std::invalid_argument("env_step: state or action out of range");
    if (mdp.is_terminal(s))
        throw std::invalid_argument("env_step: step from terminal state " + std::to_string(s));
    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t s2 = mdp.n_states - 1;
    for (std::size_t j = 0; j < mdp.n_states; ++j) {
        acc += mdp.t(s, a, j);
        if (u < acc) {
            s2 = j;
            break;
        }
    }
    return StepResult{s2, mdp.r(s, a), mdp.is_terminal(s2)};
}

inline std::size_t sample_initial_state(const TabularMdp& mdp, Rng& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t s = 0; s < mdp.n_states; ++s) {
        acc += mdp.initial_dist[s];
        if (u < acc) return s;
    }
    return mdp.n_states - 1;
}

/// Text dump of T and R for external inspection.
inline void export_mdp(const TabularMdp& mdp, std::ostream& out) {
    out << "mdp " << mdp.name << "\n";
    out << "n_states " << mdp.n_states << "\n";
    out << "n_actions " << mdp.n_actions << "\n";
    out << "gamma " << g17(mdp.gamma) << "\n";
    out << "transition\n";
    for (std::size_t s = 0; s < mdp.n_states; ++s)
        for (std::size_t a = 0; a < mdp.n_actions; ++a) {
            out << s << " " << a;
            for (std::size_t s2 = 0; s2 < mdp.n_states; ++s2) out << " " << g17(mdp.t(s, a, s2));
            out << "\n";
        }
    out << "reward\n";
    for (std::size_t s = 0; s < mdp.n_states; ++s) {
        out << s;
        for (std::size_t a = 0; a < mdp.n_actions; ++a) out << " " << g17(mdp.r(s, a));
        out << "\n";
    }
}

}  // namespace edm
