#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "edm/cartpole.hpp"
#include "edm/mdp.hpp"
#include "edm/sgld.hpp"
#include "edm/textio.hpp"
#include "edm/train.hpp"

namespace edm {

inline std::size_t to_size(const std::string& v, const std::string& ctx) {
    const long long n = parse_int(v, ctx);
    if (n < 0) throw std::runtime_error(ctx + ": value must be nonnegative");
    return static_cast<std::size_t>(n);
}

inline bool to_bool(const std::string& v, const std::string& ctx) {
    if (v == "1" || v == "true" || v == "on") return true;
    if (v == "0" || v == "false" || v == "off") return false;
    throw std::runtime_error(ctx + ": expected a boolean (0/1/true/false)");
}

/// Merged view of environment, training, SGLD, and evaluation settings.
/// Precedence is defaults < config file < command-line overrides; every
/// assignment records where the value came from. Unknown keys are rejected.
struct RunConfig {
    // environment
    std::string env = "gridworld";
    std::size_t width = 5;
    std::size_t height = 5;
    std::size_t chain_states = 5;
    double slip = 0.1;
    double goal_reward = 10.0;
    double step_cost = -0.5;
    double gamma = 0.95;
    std::string start = "corner";  // gridworld start cells: corner | uniform
    std::size_t horizon = 0;  // 0 = environment default (gridworld/chain 200, cartpole 500)

    // training
    std::string algo = "edm";
    std::size_t batch_size = 64;
    std::size_t iterations = 10000;
    double learning_rate = 1e-3;
    double rcal_lambda = 1e-2;
    std::string negative_phase = "auto";  // auto: exact for tabular, sgld for cartpole
    std::size_t log_every = 100;

    // sgld / buffer
    double sgld_step_size = 0.01;
    double sgld_noise = 0.01;
    std::size_t sgld_chain_length = 20;
    std::size_t buffer_capacity = 10000;
    double buffer_delta = 0.05;
    bool sgld_clamp = false;

    // evaluation / experiment
    std::size_t eval_episodes = 300;
    std::size_t n_seeds = 20;
    double vi_tol = 1e-9;

    std::uint64_t seed = 0;

    std::map<std::string, std::string> provenance;  // key -> default|file|flag

    /// Applies one key = value assignment; throws on unknown keys or bad values.
    void set(const std::string& key, const std::string& value, const std::string& source,
             const std::string& context) {
        if (key == "env") env = value;
        else if (key == "width") width = to_size(value, context);
        else if (key == "height") height = to_size(value, context);
        else if (key == "chain_states") chain_states = to_size(value, context);
        else if (key == "slip") slip = parse_double(value, context);
        else if (key == "goal_reward") goal_reward = parse_double(value, context);
        else if (key == "step_cost") step_cost = parse_double(value, context);
        else if (key == "gamma") gamma = parse_double(value, context);
        else if (key == "start") start = value;
        else if (key == "horizon") horizon = to_size(value, context);
        else if (key == "algo") algo = value;
        else if (key == "batch_size") batch_size = to_size(value, context);
        else if (key == "iterations") iterations = to_size(value, context);
        else if (key == "learning_rate") learning_rate = parse_double(value, context);
        else if (key == "rcal_lambda") rcal_lambda = parse_double(value, context);
        else if (key == "negative_phase") negative_phase = value;
        else if (key == "log_every") log_every = to_size(value, context);
        else if (key == "sgld_step_size") sgld_step_size = parse_double(value, context);
        else if (key == "sgld_noise") sgld_noise = parse_double(value, context);
        else if (key == "sgld_chain_length") sgld_chain_length = to_size(value, context);
        else if (key == "buffer_capacity") buffer_capacity = to_size(value, context);
        else if (key == "buffer_delta") buffer_delta = parse_double(value, context);
        else if (key == "sgld_clamp") sgld_clamp = to_bool(value, context);
        else if (key == "eval_episodes") eval_episodes = to_size(value, context);
        else if (key == "n_seeds") n_seeds = to_size(value, context);
        else if (key == "vi_tol") vi_tol = parse_double(value, context);
        else if (key == "seed") seed = static_cast<std::uint64_t>(parse_int(value, context));
        else throw std::runtime_error(context + ": unknown configuration key '" + key + "'");
        provenance[key] = source;
    }

    std::size_t resolved_horizon() const {
        if (horizon != 0) return horizon;
        return env == "cartpole" ? 500 : 200;
    }

    NegativePhase resolved_negative_phase() const {
        if (negative_phase == "exact") return NegativePhase::Exact;
        if (negative_phase == "sgld") return NegativePhase::Sgld;
        if (negative_phase == "auto")
            return env == "cartpole" ? NegativePhase::Sgld : NegativePhase::Exact;
        throw std::runtime_error("negative_phase must be auto, exact, or sgld");
    }

    TrainConfig train_config() const {
        TrainConfig cfg;
        cfg.batch_size = batch_size;
        cfg.iterations = iterations;
        cfg.learning_rate = learning_rate;
        cfg.seed = seed;
        cfg.algo = algo_from_name(algo);
        cfg.rcal_lambda = rcal_lambda;
        cfg.negative_phase = resolved_negative_phase();
        cfg.log_every = log_every;
        return cfg;
    }

    SgldConfig sgld_config() const {
        SgldConfig cfg;
        cfg.step_size = sgld_step_size;
        cfg.noise = sgld_noise;
        cfg.chain_length = sgld_chain_length;
        cfg.clamp_to_init_range = sgld_clamp;
        return cfg;
    }

    PcdBuffer make_buffer() const { return PcdBuffer(buffer_capacity, buffer_delta); }
};

/// Parses `key = value` lines; '#' starts a comment, blank lines are skipped.
inline std::vector<std::pair<std::string, std::string>> parse_kv_file(const std::string& path) {
    auto f = open_in(path);
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected 'key = value'");
        out.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    return out;
}

/// defaults < file < flag overrides (each "key=value").
inline RunConfig load_run_config(const std::string& file_path,
                                 const std::vector<std::string>& flag_overrides) {
    RunConfig cfg;
    if (!file_path.empty()) {
        std::size_t i = 0;
        for (const auto& [k, v] : parse_kv_file(file_path)) {
            ++i;
            cfg.set(k, v, "file", file_path + " (entry " + std::to_string(i) + ")");
        }
    }
    for (const std::string& ov : flag_overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("flag override '" + ov + "' must look like key=value");
        cfg.set(trim(ov.substr(0, eq)), trim(ov.substr(eq + 1)), "flag", "--set " + ov);
    }
    return cfg;
}

using AnyEnv = std::variant<TabularMdp, Cartpole>;

inline AnyEnv build_env(const RunConfig& cfg) {
    if (cfg.env == "gridworld") {
        if (cfg.start != "corner" && cfg.start != "uniform")
            throw std::runtime_error("start must be corner or uniform, got '" + cfg.start + "'");
        return build_gridworld(cfg.width, cfg.height, cfg.slip, cfg.goal_reward, cfg.step_cost,
                               cfg.gamma, cfg.start == "uniform");
    }
    if (cfg.env == "chain")
        return build_chain(cfg.chain_states, cfg.slip, cfg.goal_reward, cfg.step_cost, cfg.gamma);
    if (cfg.env == "cartpole") return Cartpole{};
    throw std::runtime_error("unknown env '" + cfg.env + "' (expected gridworld, chain, cartpole)");
}

}  // namespace edm
