// Command-line front end: expert generation, demonstrations, training,
// evaluation, and deterministic sweeps over (algo, n_traj, seed).

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "edm/edm.hpp"

namespace {

using namespace edm;

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;

    RunConfig load() const { return load_run_config(config_path, overrides); }
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "plain-text key = value configuration file");
    cmd->add_option("--set", args.overrides,
                    "override a configuration key (key=value, repeatable; beats the file)");
}

std::uint64_t derived_seed(std::uint64_t root, std::string_view label, std::uint64_t salt) {
    return Rng(root).split(label).split(salt).state();
}

// ---------------------------------------------------------------- expert ---

const std::string kExpertMagic = "edmexpert 1";

void save_expert(const TabularMdp& mdp, const std::vector<double>& table,
                 const std::string& path) {
    auto f = open_out(path);
    f << kExpertMagic << "\n";
    f << "env " << mdp.name << "\n";
    f << "dims " << mdp.n_states << " " << mdp.n_actions << "\n";
    for (std::size_t s = 0; s < mdp.n_states; ++s) {
        for (std::size_t a = 0; a < mdp.n_actions; ++a)
            f << (a ? " " : "") << g17(table[s * mdp.n_actions + a]);
        f << "\n";
    }
}

std::vector<double> load_expert(const std::string& path, const TabularMdp& mdp) {
    auto f = open_in(path);
    std::string line;
    if (!std::getline(f, line) || trim(line) != kExpertMagic)
        throw std::runtime_error(path + ": not an expert policy file");
    std::getline(f, line);  // env name, informational
    if (!std::getline(f, line)) throw std::runtime_error(path + ": missing dims");
    const auto dims = split_ws(line);
    if (dims.size() != 3 || dims[0] != "dims")
        throw std::runtime_error(path + ": malformed dims line");
    const auto n_states = static_cast<std::size_t>(parse_int(dims[1], path));
    const auto n_actions = static_cast<std::size_t>(parse_int(dims[2], path));
    if (n_states != mdp.n_states || n_actions != mdp.n_actions)
        throw std::runtime_error(path + ": expert dimensions do not match the environment");
    std::vector<double> table;
    table.reserve(n_states * n_actions);
    for (std::size_t s = 0; s < n_states; ++s) {
        if (!std::getline(f, line)) throw std::runtime_error(path + ": truncated policy table");
        const auto toks = split_ws(line);
        if (toks.size() != n_actions)
            throw std::runtime_error(path + ": row " + std::to_string(s) + " has wrong arity");
        for (const std::string& t : toks) table.push_back(parse_double(t, path));
    }
    return table;
}

std::vector<double> solve_expert_table(const TabularMdp& mdp, double vi_tol) {
    const SoftQ q = soft_value_iteration(mdp, mdp.reward, vi_tol);
    return soft_policy_from_q(q);
}

int run_expert(const CommonArgs& common, const std::string& out_path) {
    const RunConfig cfg = common.load();
    const AnyEnv env = build_env(cfg);
    if (!std::holds_alternative<TabularMdp>(env))
        throw std::runtime_error("expert: soft value iteration needs a tabular environment; "
                                 "cartpole demos use the built-in controller");
    const TabularMdp& mdp = std::get<TabularMdp>(env);
    save_expert(mdp, solve_expert_table(mdp, cfg.vi_tol), out_path);
    std::cout << "expert policy written to " << out_path << "\n";
    return 0;
}

// ----------------------------------------------------------------- demos ---

DemoDataset make_demos(const RunConfig& cfg, const AnyEnv& env, const std::string& expert_path,
                       std::size_t n_traj, std::uint64_t seed) {
    if (std::holds_alternative<TabularMdp>(env)) {
        const TabularMdp& mdp = std::get<TabularMdp>(env);
        const std::vector<double> table = expert_path.empty()
                                              ? solve_expert_table(mdp, cfg.vi_tol)
                                              : load_expert(expert_path, mdp);
        return generate_demonstrations(mdp, table_policy(table, mdp.n_actions), "soft-vi expert",
                                       n_traj, cfg.resolved_horizon(), seed);
    }
    const Cartpole& pole = std::get<Cartpole>(env);
    StochasticPolicy controller = [pole](const std::vector<double>& s) {
        std::vector<double> p(Cartpole::n_actions, 0.0);
        p[pole.expert_action(s)] = 1.0;
        return p;
    };
    return generate_demonstrations(pole, controller, "pole-angle controller", n_traj,
                                   cfg.resolved_horizon(), cfg.gamma, seed);
}

int run_demos(const CommonArgs& common, const std::string& expert_path, const std::string& out,
              std::size_t n_traj, std::size_t state_only_traj) {
    const RunConfig cfg = common.load();
    const AnyEnv env = build_env(cfg);
    const DemoDataset ds =
        make_demos(cfg, env, expert_path, n_traj, derived_seed(cfg.seed, "demos", n_traj));
    save_dataset(ds, out);
    std::cout << "dataset written to " << out << ".header / " << out << ".transitions ("
              << ds.n_transitions() << " transitions)\n";
    if (state_only_traj > 0) {
        const DemoDataset extra = make_demos(cfg, env, expert_path, state_only_traj,
                                             derived_seed(cfg.seed, "state-only", n_traj));
        save_states(strip_actions(extra), out + ".states");
        std::cout << "state-only data written to " << out << ".states ("
                  << extra.n_transitions() << " states)\n";
    }
    return 0;
}

// ----------------------------------------------------------------- train ---

EnvMeta meta_for(const RunConfig& cfg, const AnyEnv& env) {
    if (std::holds_alternative<TabularMdp>(env))
        return EnvMeta::from(std::get<TabularMdp>(env));
    return EnvMeta::from(std::get<Cartpole>(env), cfg.gamma);
}

int run_train(const CommonArgs& common, const std::string& data_base,
              const std::string& state_only_path, const std::string& ckpt_path,
              const std::string& log_path) {
    const RunConfig cfg = common.load();
    const AnyEnv env = build_env(cfg);
    const DemoDataset ds = load_dataset(data_base);
    const EnvMeta meta = meta_for(cfg, env);
    if (meta.state_dim != ds.header.state_dim || meta.n_actions != ds.header.n_actions)
        throw std::runtime_error("train: dataset dimensions do not match the configured env");

    TrainingSource src =
        state_only_path.empty()
            ? training_source(ds)
            : augment_state_only(ds, load_states(state_only_path, ds.header.state_dim));

    PcdBuffer buffer = cfg.make_buffer();
    const TrainResult result =
        train_policy(meta, src, cfg.train_config(), cfg.sgld_config(), &buffer);

    {
        auto f = open_out(ckpt_path);
        std::ostringstream arch;
        arch << "arch " << result.net.spec.input_dim;
        for (std::size_t h : result.net.spec.hidden) arch << " " << h;
        arch << " " << result.net.spec.output_dim << " "
             << activation_name(result.net.spec.activation);
        save_params(result.net.params, f,
                    {arch.str(), "algo " + cfg.algo, "env " + meta.env_name});
    }
    if (!log_path.empty()) {
        auto f = open_out(log_path);
        write_train_log(result.log, f);
    }
    std::cout << "checkpoint written to " << ckpt_path << " (final loss_pi "
              << g17(result.log.back().loss_pi) << ")\n";
    return 0;
}

// ------------------------------------------------------------------ eval ---

struct LoadedPolicy {
    PolicyNet net;
    std::string algo = "unknown";
};

LoadedPolicy load_checkpoint(const std::string& path) {
    auto f = open_in(path);
    std::vector<std::string> extras;
    ParamStore params = load_params(f, &extras);
    LoadedPolicy out;
    MlpSpec spec;
    bool have_arch = false;
    for (const std::string& line : extras) {
        const auto toks = split_ws(line);
        if (toks.empty()) continue;
        if (toks[0] == "arch" && toks.size() >= 4) {
            spec.input_dim = static_cast<std::size_t>(parse_int(toks[1], path));
            for (std::size_t i = 2; i + 2 < toks.size(); ++i)
                spec.hidden.push_back(static_cast<std::size_t>(parse_int(toks[i], path)));
            spec.output_dim = static_cast<std::size_t>(parse_int(toks[toks.size() - 2], path));
            spec.activation = activation_from_name(toks.back());
            have_arch = true;
        } else if (toks[0] == "algo" && toks.size() == 2) {
            out.algo = toks[1];
        }
    }
    if (!have_arch) throw std::runtime_error(path + ": checkpoint lacks an arch line");
    check_mlp_params(params, spec);
    out.net.spec = std::move(spec);
    out.net.params = std::move(params);
    return out;
}

EvalReport evaluate_policy(const RunConfig& cfg, const AnyEnv& env, const LoadedPolicy& policy,
                           const DemoDataset& ds, const std::string& heldout_base,
                           bool want_returns, bool want_actions) {
    EvalReport report;
    report.algo = policy.algo;
    report.env = ds.header.env_name;
    report.n_traj = ds.header.n_trajectories;
    report.seed = cfg.seed;
    if (want_returns) {
        const std::uint64_t eval_seed = derived_seed(cfg.seed, "eval", ds.header.n_trajectories);
        const StochasticPolicy pi = policy.net.as_policy();
        const ReturnStats stats =
            std::holds_alternative<TabularMdp>(env)
                ? average_return(std::get<TabularMdp>(env), pi, cfg.eval_episodes,
                                 cfg.resolved_horizon(), eval_seed)
                : average_return(std::get<Cartpole>(env), pi, cfg.eval_episodes,
                                 cfg.resolved_horizon(), eval_seed);
        report.raw_return = stats.mean;
        report.stderr_of_mean = stats.stderr_of_mean;
        report.scaled = scaled_return(stats.mean, ds.header);
        report.has_returns = true;
    }
    if (want_actions) {
        const DemoDataset heldout = heldout_base.empty() ? ds : load_dataset(heldout_base);
        report.actions = action_matching_metrics(policy.net, heldout);
        report.has_actions = true;
    }
    return report;
}

int run_eval(const CommonArgs& common, const std::string& ckpt_path, const std::string& data_base,
             const std::string& heldout_base, const std::string& out_path, bool action_matching,
             bool no_returns) {
    const RunConfig cfg = common.load();
    const AnyEnv env = build_env(cfg);
    const LoadedPolicy policy = load_checkpoint(ckpt_path);
    const DemoDataset ds = load_dataset(data_base);
    const EvalReport report =
        evaluate_policy(cfg, env, policy, ds, heldout_base, !no_returns, action_matching);

    std::ostringstream csv;
    write_eval_csv_header(csv);
    write_eval_csv_row(report, csv);
    if (out_path.empty()) {
        std::cout << csv.str();
    } else {
        auto f = open_out(out_path);
        f << csv.str();
        std::cout << "evaluation written to " << out_path << "\n";
    }
    return 0;
}

// ----------------------------------------------------------------- sweep ---

std::vector<std::string> split_csv(const std::string& csv) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : csv) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

int run_sweep(const CommonArgs& common, const std::string& out_path,
              const std::string& algos_csv, const std::string& n_traj_csv) {
    const RunConfig cfg = common.load();
    const AnyEnv env = build_env(cfg);

    const std::vector<std::string> algos = split_csv(algos_csv);
    std::vector<std::size_t> traj_counts;
    for (const std::string& tok : split_csv(n_traj_csv))
        traj_counts.push_back(static_cast<std::size_t>(parse_int(tok, "--n-traj")));
    if (algos.empty() || traj_counts.empty())
        throw std::runtime_error("sweep: need at least one algorithm and trajectory count");

    std::vector<EvalReport> rows;
    for (const std::size_t n_traj : traj_counts) {
        for (std::size_t s = 0; s < cfg.n_seeds; ++s) {
            // One dataset per (n_traj, seed) cell, shared across algorithms
            // so comparisons are paired.
            const std::uint64_t cell_seed =
                derived_seed(cfg.seed, "sweep", n_traj * 1000003ull + s);
            const DemoDataset ds = make_demos(cfg, env, "", n_traj, cell_seed);
            const EnvMeta meta = meta_for(cfg, env);
            for (const std::string& algo : algos) {
                RunConfig cell_cfg = cfg;
                cell_cfg.algo = algo;
                cell_cfg.seed = cell_seed;
                PcdBuffer buffer = cell_cfg.make_buffer();
                const TrainResult result =
                    train_policy(meta, training_source(ds), cell_cfg.train_config(),
                                 cell_cfg.sgld_config(), &buffer);
                LoadedPolicy policy;
                policy.net = result.net;
                policy.algo = algo;
                EvalReport report = evaluate_policy(cell_cfg, env, policy, ds, "", true, false);
                report.seed = s;  // report the sweep index, not the derived seed
                rows.push_back(std::move(report));
            }
        }
    }
    std::sort(rows.begin(), rows.end(), [](const EvalReport& a, const EvalReport& b) {
        if (a.algo != b.algo) return a.algo < b.algo;
        if (a.n_traj != b.n_traj) return a.n_traj < b.n_traj;
        return a.seed < b.seed;
    });
    std::ostringstream csv;
    write_eval_csv_header(csv);
    for (const EvalReport& r : rows) write_eval_csv_row(r, csv);
    auto f = open_out(out_path);
    f << csv.str();
    std::cout << "sweep results (" << rows.size() << " rows) written to " << out_path << "\n";
    return 0;
}

// ------------------------------------------------------------------ main ---

int dispatch(int argc, char** argv) {
    CLI::App app{"strictly batch imitation learning toolkit"};
    app.require_subcommand(1);

    CommonArgs expert_args;
    std::string expert_out = "expert.policy";
    CLI::App* expert_cmd = app.add_subcommand(
        "expert",
        "solve the tabular environment by soft value iteration and save the softmax policy");
    add_common(expert_cmd, expert_args);
    expert_cmd->add_option("--out", expert_out, "output policy file");

    CommonArgs demos_args;
    std::string demos_expert, demos_out = "demos";
    std::size_t demos_n_traj = 1, demos_state_only = 0;
    CLI::App* demos_cmd =
        app.add_subcommand("demos", "roll out the demonstrator and serialize a dataset");
    add_common(demos_cmd, demos_args);
    demos_cmd->add_option("--expert", demos_expert,
                          "expert policy file (default: solve internally)");
    demos_cmd->add_option("--out", demos_out, "output basename for .header/.transitions");
    demos_cmd->add_option("--n-traj", demos_n_traj, "number of demonstration trajectories");
    demos_cmd->add_option("--state-only-traj", demos_state_only,
                          "also write <out>.states with this many trajectories of state-only data");

    CommonArgs train_args;
    std::string train_data, train_states, train_ckpt = "policy.ckpt", train_log, train_algo;
    CLI::App* train_cmd = app.add_subcommand("train", "train edm, bc, or rcal on a dataset");
    add_common(train_cmd, train_args);
    train_cmd->add_option("--data", train_data, "dataset basename")->required();
    train_cmd->add_option("--algo", train_algo, "algorithm: edm, bc, or rcal");
    train_cmd->add_option("--state-only", train_states,
                          "state-only data file for semi-supervised training");
    train_cmd->add_option("--out", train_ckpt, "checkpoint output path");
    train_cmd->add_option("--log", train_log, "training log CSV output path");

    CommonArgs eval_args;
    std::string eval_ckpt, eval_data, eval_heldout, eval_out;
    bool eval_actions = false, eval_no_returns = false;
    CLI::App* eval_cmd =
        app.add_subcommand("eval", "evaluate a checkpoint: live returns and action matching");
    add_common(eval_cmd, eval_args);
    eval_cmd->add_option("--ckpt", eval_ckpt, "checkpoint path")->required();
    eval_cmd->add_option("--data", eval_data, "dataset basename (for scaling references)")
        ->required();
    eval_cmd->add_option("--heldout", eval_heldout,
                         "held-out dataset basename for action matching (default: --data)");
    eval_cmd->add_flag("--action-matching", eval_actions, "compute ACC/AUC/APR");
    eval_cmd->add_flag("--no-returns", eval_no_returns, "skip live-rollout returns");
    eval_cmd->add_option("--out", eval_out, "CSV output path (default: stdout)");

    CommonArgs sweep_args;
    std::string sweep_out = "sweep.csv", sweep_algos = "edm,bc,rcal",
                sweep_traj = "1,3,7,10,15";
    CLI::App* sweep_cmd = app.add_subcommand(
        "sweep", "cross product of algorithms x trajectory counts x seeds, one CSV");
    add_common(sweep_cmd, sweep_args);
    sweep_cmd->add_option("--out", sweep_out, "CSV output path");
    sweep_cmd->add_option("--algos", sweep_algos, "comma-separated algorithms");
    sweep_cmd->add_option("--n-traj", sweep_traj, "comma-separated trajectory counts");

    CommonArgs export_args;
    std::string export_out = "mdp.txt";
    CLI::App* export_cmd =
        app.add_subcommand("export-mdp", "dump the tabular transition and reward tables as text");
    add_common(export_cmd, export_args);
    export_cmd->add_option("--out", export_out, "output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // prints help, exit 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the error to stderr
        return 1;
    }

    try {
        if (app.got_subcommand(expert_cmd)) return run_expert(expert_args, expert_out);
        if (app.got_subcommand(demos_cmd))
            return run_demos(demos_args, demos_expert, demos_out, demos_n_traj, demos_state_only);
        if (app.got_subcommand(train_cmd)) {
            if (!train_algo.empty()) train_args.overrides.push_back("algo=" + train_algo);
            return run_train(train_args, train_data, train_states, train_ckpt, train_log);
        }
        if (app.got_subcommand(eval_cmd))
            return run_eval(eval_args, eval_ckpt, eval_data, eval_heldout, eval_out, eval_actions,
                            eval_no_returns);
        if (app.got_subcommand(sweep_cmd))
            return run_sweep(sweep_args, sweep_out, sweep_algos, sweep_traj);
        if (app.got_subcommand(export_cmd)) {
            const RunConfig cfg = export_args.load();
            const AnyEnv env = build_env(cfg);
            if (!std::holds_alternative<TabularMdp>(env))
                throw std::runtime_error("export-mdp: only tabular environments have tables");
            auto f = open_out(export_out);
            export_mdp(std::get<TabularMdp>(env), f);
            std::cout << "tables written to " << export_out << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) { return dispatch(argc, argv); }
