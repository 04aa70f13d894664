#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "edm/cartpole.hpp"
#include "edm/mdp.hpp"
#include "edm/rollout.hpp"
#include "edm/textio.hpp"

namespace edm {

/// Reference returns for scaling are baked in at generation time so
/// evaluation never re-runs the demonstrator.
struct DatasetHeader {
    int version = 1;
    std::string env_name;
    std::size_t state_dim = 0;
    std::size_t n_actions = 0;
    double gamma = 0.0;
    std::size_t n_trajectories = 0;
    std::string demonstrator;
    double demo_mean_return = 0.0;
    double random_mean_return = 0.0;
    std::uint64_t seed = 0;
    bool triples = true;
};

struct DemoDataset {
    DatasetHeader header;
    std::vector<Trajectory> trajectories;

    std::size_t n_transitions() const {
        std::size_t n = 0;
        for (const Trajectory& t : trajectories) n += t.steps.size();
        return n;
    }

    std::vector<Transition> all_transitions() const {
        std::vector<Transition> out;
        out.reserve(n_transitions());
        for (const Trajectory& t : trajectories)
            out.insert(out.end(), t.steps.begin(), t.steps.end());
        return out;
    }
};

namespace detail {
inline double mean_return(const std::vector<Trajectory>& trajs) {
    double s = 0.0;
    for (const Trajectory& t : trajs) s += t.undiscounted_return;
    return trajs.empty() ? 0.0 : s / static_cast<double>(trajs.size());
}
}  // namespace detail

/// Rolls out the demonstrator for n_traj episodes and records triples.
/// Demonstrator and random-policy reference returns are estimated over 1000
/// episodes each, on streams independent of the demonstration episodes.
template <typename Env>
DemoDataset generate_demonstrations(const Env& env, const StochasticPolicy& expert,
                                    const std::string& expert_desc, std::size_t n_traj,
                                    std::size_t horizon, double gamma, std::uint64_t seed,
                                    std::size_t n_actions, std::size_t state_dim,
                                    const std::string& env_name) {
    const Rng root(seed);
    DemoDataset ds;
    ds.trajectories = rollout(env, expert, n_traj, horizon, root.split("demos").state());
    ds.header.version = 1;
    ds.header.env_name = env_name;
    ds.header.state_dim = state_dim;
    ds.header.n_actions = n_actions;
    ds.header.gamma = gamma;
    ds.header.n_trajectories = n_traj;
    ds.header.demonstrator = expert_desc;
    ds.header.seed = seed;
    ds.header.triples = true;
    ds.header.demo_mean_return =
        detail::mean_return(rollout(env, expert, 1000, horizon, root.split("demo-ref").state()));
    ds.header.random_mean_return = detail::mean_return(
        rollout(env, uniform_policy(n_actions), 1000, horizon, root.split("random-ref").state()));
    return ds;
}

inline DemoDataset generate_demonstrations(const TabularMdp& mdp, const StochasticPolicy& expert,
                                           const std::string& expert_desc, std::size_t n_traj,
                                           std::size_t horizon, std::uint64_t seed) {
    return generate_demonstrations(mdp, expert, expert_desc, n_traj, horizon, mdp.gamma, seed,
                                   mdp.n_actions, mdp.n_states, mdp.name);
}

inline DemoDataset generate_demonstrations(const Cartpole& env, const StochasticPolicy& expert,
                                           const std::string& expert_desc, std::size_t n_traj,
                                           std::size_t horizon, double gamma, std::uint64_t seed) {
    return generate_demonstrations(env, expert, expert_desc, n_traj, horizon, gamma, seed,
                                   Cartpole::n_actions, Cartpole::state_dim, env.name);
}

/// States only, in dataset order; the dataset itself is untouched.
inline std::vector<std::vector<double>> strip_actions(const DemoDataset& ds) {
    std::vector<std::vector<double>> out;
    out.reserve(ds.n_transitions());
    for (const Trajectory& t : ds.trajectories)
        for (const Transition& tr : t.steps) out.push_back(tr.state);
    return out;
}

/// File pair: <base>.header (key = value text) and <base>.transitions (one
/// record per line: episode, t, state..., action, next_state..., done).
/// Decimal text at 17 significant digits; the round trip is bit-exact.
inline void save_dataset(const DemoDataset& ds, const std::string& base) {
    {
        auto h = open_out(base + ".header");
        h << "version = " << ds.header.version << "\n";
        h << "env = " << ds.header.env_name << "\n";
        h << "state_dim = " << ds.header.state_dim << "\n";
        h << "n_actions = " << ds.header.n_actions << "\n";
        h << "gamma = " << g17(ds.header.gamma) << "\n";
        h << "n_trajectories = " << ds.header.n_trajectories << "\n";
        h << "records = " << (ds.header.triples ? "triples" : "pairs") << "\n";
        h << "demonstrator = " << ds.header.demonstrator << "\n";
        h << "demo_mean_return = " << g17(ds.header.demo_mean_return) << "\n";
        h << "random_mean_return = " << g17(ds.header.random_mean_return) << "\n";
        h << "seed = " << ds.header.seed << "\n";
        for (std::size_t i = 0; i < ds.trajectories.size(); ++i) {
            h << "traj_seed_" << i << " = " << ds.trajectories[i].seed << "\n";
            h << "traj_return_" << i << " = " << g17(ds.trajectories[i].undiscounted_return) << "\n";
        }
    }
    auto f = open_out(base + ".transitions");
    for (std::size_t e = 0; e < ds.trajectories.size(); ++e) {
        const Trajectory& traj = ds.trajectories[e];
        for (std::size_t t = 0; t < traj.steps.size(); ++t) {
            const Transition& tr = traj.steps[t];
            f << e << " " << t;
            for (double v : tr.state) f << " " << g17(v);
            f << " " << tr.action;
            if (ds.header.triples)
                for (double v : tr.next_state) f << " " << g17(v);
            f << " " << (tr.done ? 1 : 0) << "\n";
        }
    }
}

inline DemoDataset load_dataset(const std::string& base) {
    DemoDataset ds;
    std::map<std::size_t, std::uint64_t> traj_seeds;
    std::map<std::size_t, double> traj_returns;
    {
        auto h = open_in(base + ".header");
        std::string line;
        std::size_t lineno = 0;
        bool saw_version = false;
        while (std::getline(h, line)) {
            ++lineno;
            const std::string t = trim(line);
            if (t.empty() || t[0] == '#') continue;
            const auto eq = t.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error(base + ".header:" + std::to_string(lineno) +
                                         ": expected 'key = value'");
            const std::string key = trim(t.substr(0, eq));
            const std::string val = trim(t.substr(eq + 1));
            const std::string ctx = base + ".header:" + std::to_string(lineno);
            if (key == "version") {
                ds.header.version = static_cast<int>(parse_int(val, ctx));
                if (ds.header.version != 1)
                    throw std::runtime_error(ctx + ": unsupported dataset version " + val);
                saw_version = true;
            } else if (key == "env") {
                ds.header.env_name = val;
            } else if (key == "state_dim") {
                ds.header.state_dim = static_cast<std::size_t>(parse_int(val, ctx));
            } else if (key == "n_actions") {
                ds.header.n_actions = static_cast<std::size_t>(parse_int(val, ctx));
            } else if (key == "gamma") {
                ds.header.gamma = parse_double(val, ctx);
            } else if (key == "n_trajectories") {
                ds.header.n_trajectories = static_cast<std::size_t>(parse_int(val, ctx));
            } else if (key == "records") {
                if (val == "triples") ds.header.triples = true;
                else if (val == "pairs") ds.header.triples = false;
                else throw std::runtime_error(ctx + ": records must be 'triples' or 'pairs'");
            } else if (key == "demonstrator") {
                ds.header.demonstrator = val;
            } else if (key == "demo_mean_return") {
                ds.header.demo_mean_return = parse_double(val, ctx);
            } else if (key == "random_mean_return") {
                ds.header.random_mean_return = parse_double(val, ctx);
            } else if (key == "seed") {
                ds.header.seed = static_cast<std::uint64_t>(parse_int(val, ctx));
            } else if (key.rfind("traj_seed_", 0) == 0) {
                const std::size_t i = static_cast<std::size_t>(parse_int(key.substr(10), ctx));
                traj_seeds[i] = static_cast<std::uint64_t>(parse_int(val, ctx));
            } else if (key.rfind("traj_return_", 0) == 0) {
                const std::size_t i = static_cast<std::size_t>(parse_int(key.substr(12), ctx));
                traj_returns[i] = parse_double(val, ctx);
            } else {
                throw std::runtime_error(ctx + ": unknown header key '" + key + "'");
            }
        }
        if (!saw_version) throw std::runtime_error(base + ".header: missing version");
        if (ds.header.state_dim == 0 || ds.header.n_actions == 0)
            throw std::runtime_error(base + ".header: missing dimensions");
    }

    ds.trajectories.assign(ds.header.n_trajectories, Trajectory{});
    const std::size_t d = ds.header.state_dim;
    const std::size_t expected_fields = 2 + d + 1 + (ds.header.triples ? d : 0) + 1;
    auto f = open_in(base + ".transitions");
    std::string line;
    std::size_t lineno = 0, last_valid = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto toks = split_ws(line);
        const std::string ctx = base + ".transitions:" + std::to_string(lineno);
        if (toks.size() != expected_fields)
            throw std::runtime_error(ctx + ": expected " + std::to_string(expected_fields) +
                                     " fields, got " + std::to_string(toks.size()) +
                                     " (last valid line " + std::to_string(last_valid) + ")");
        std::size_t k = 0;
        const std::size_t episode = static_cast<std::size_t>(parse_int(toks[k++], ctx));
        const std::size_t t = static_cast<std::size_t>(parse_int(toks[k++], ctx));
        if (episode >= ds.header.n_trajectories)
            throw std::runtime_error(ctx + ": episode id " + std::to_string(episode) +
                                     " out of range");
        Transition tr;
        tr.state.resize(d);
        for (std::size_t i = 0; i < d; ++i) tr.state[i] = parse_double(toks[k++], ctx);
        tr.action = static_cast<std::size_t>(parse_int(toks[k++], ctx));
        if (tr.action >= ds.header.n_actions)
            throw std::runtime_error(ctx + ": action out of range");
        if (ds.header.triples) {
            tr.next_state.resize(d);
            for (std::size_t i = 0; i < d; ++i) tr.next_state[i] = parse_double(toks[k++], ctx);
        }
        const long long done = parse_int(toks[k++], ctx);
        if (done != 0 && done != 1) throw std::runtime_error(ctx + ": done flag must be 0 or 1");
        tr.done = done == 1;
        Trajectory& traj = ds.trajectories[episode];
        if (t != traj.steps.size())
            throw std::runtime_error(ctx + ": step index " + std::to_string(t) +
                                     " not contiguous within episode " + std::to_string(episode));
        traj.steps.push_back(std::move(tr));
        last_valid = lineno;
    }
    for (std::size_t i = 0; i < ds.trajectories.size(); ++i) {
        if (ds.trajectories[i].steps.empty())
            throw std::runtime_error(base + ".transitions: header announces trajectory " +
                                     std::to_string(i) + " but no records were found");
        if (auto it = traj_seeds.find(i); it != traj_seeds.end())
            ds.trajectories[i].seed = it->second;
        if (auto it = traj_returns.find(i); it != traj_returns.end())
            ds.trajectories[i].undiscounted_return = it->second;
    }
    return ds;
}

/// One state vector per line, for the semi-supervised pipeline.
inline void save_states(const std::vector<std::vector<double>>& states, const std::string& path) {
    auto f = open_out(path);
    for (const auto& s : states) {
        for (std::size_t i = 0; i < s.size(); ++i) f << (i ? " " : "") << g17(s[i]);
        f << "\n";
    }
}

inline std::vector<std::vector<double>> load_states(const std::string& path, std::size_t dim) {
    auto f = open_in(path);
    std::vector<std::vector<double>> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto toks = split_ws(line);
        const std::string ctx = path + ":" + std::to_string(lineno);
        if (toks.size() != dim)
            throw std::runtime_error(ctx + ": expected " + std::to_string(dim) + " values");
        std::vector<double> s(dim);
        for (std::size_t i = 0; i < dim; ++i) s[i] = parse_double(toks[i], ctx);
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace edm
