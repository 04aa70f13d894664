#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "edm/data.hpp"
#include "edm/mlp.hpp"
#include "edm/policy.hpp"
#include "edm/sgld.hpp"
#include "edm/solver.hpp"
#include "edm/tape.hpp"

namespace edm {

enum class Algo { Edm, Bc, Rcal };

inline const char* algo_name(Algo a) {
    switch (a) {
        case Algo::Edm: return "edm";
        case Algo::Bc: return "bc";
        case Algo::Rcal: return "rcal";
    }
    throw std::logic_error("algo_name: bad enum");
}

inline Algo algo_from_name(const std::string& s) {
    if (s == "edm") return Algo::Edm;
    if (s == "bc") return Algo::Bc;
    if (s == "rcal") return Algo::Rcal;
    throw std::invalid_argument("unknown algorithm '" + s + "'");
}

/// How the model expectation in the occupancy loss is estimated: SGLD chains
/// from a PCD buffer (continuous features, the sampling algorithm as given),
/// or an exact partition sum over a finite feature set (tabular one-hot
/// features; removes sampler noise and makes gradient identities literal).
enum class NegativePhase { Sgld, Exact };

struct TrainConfig {
    std::size_t batch_size = 64;
    std::size_t iterations = 10000;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
    Algo algo = Algo::Edm;
    double rcal_lambda = 1e-2;
    NegativePhase negative_phase = NegativePhase::Sgld;
    double rho_weight = 1.0;      // diagnostic knob; 0 ablates the occupancy loss
    std::size_t log_every = 100;  // checkpoint cadence for the exact-KL diagnostic

    void validate() const {
        if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
        if (iterations < 1) throw std::invalid_argument("TrainConfig: iterations must be >= 1");
        if (!(learning_rate > 0.0))
            throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
    }
};

/// What the trainer needs to know about the environment. exact_states is the
/// finite one-hot feature set used by the exact negative phase (and the KL
/// diagnostic); leave empty for continuous tasks.
struct EnvMeta {
    std::string env_name;
    std::size_t state_dim = 0;
    std::size_t n_actions = 0;
    double gamma = 0.0;
    std::vector<std::vector<double>> exact_states;

    static EnvMeta from(const TabularMdp& mdp) {
        return EnvMeta{mdp.name, mdp.n_states, mdp.n_actions, mdp.gamma, mdp.all_features()};
    }
    static EnvMeta from(const Cartpole& env, double gamma) {
        return EnvMeta{env.name, Cartpole::state_dim, Cartpole::n_actions, gamma, {}};
    }
    static EnvMeta from_header(const DatasetHeader& h) {
        return EnvMeta{h.env_name, h.state_dim, h.n_actions, h.gamma, {}};
    }
};

/// Demonstrations plus optional state-only data. State-only samples join the
/// positive phase of the occupancy loss and the buffer init range; the
/// policy loss sees state-action pairs only.
struct TrainingSource {
    std::vector<Transition> transitions;
    std::vector<std::vector<double>> extra_states;
};

inline TrainingSource training_source(const DemoDataset& ds) {
    return TrainingSource{ds.all_transitions(), {}};
}

inline TrainingSource augment_state_only(const DemoDataset& ds,
                                         std::vector<std::vector<double>> state_only) {
    return TrainingSource{ds.all_transitions(), std::move(state_only)};
}

/// Both surrogate losses on one tape, sharing the demonstration forward pass.
struct LossGraph {
    Tape tape;
    TapedMlp bound;
    VarId demo_logits = 0;   // [batch, n_actions]
    VarId demo_picked = 0;   // f(s)[a] per row
    VarId loss_pi = 0;
    VarId loss_rho = 0;
    bool has_rho = false;
};

namespace detail {

inline Tensor states_matrix(const std::vector<std::vector<double>>& states, std::size_t dim) {
    Tensor m = Tensor::zeros({states.size(), dim});
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (states[i].size() != dim)
            throw std::invalid_argument("training: state dimension mismatch");
        for (std::size_t j = 0; j < dim; ++j) m(i, j) = states[i][j];
    }
    return m;
}

/// Empirical distribution of one-hot states over the exact feature set.
inline std::vector<double> empirical_state_dist(const std::vector<std::vector<double>>& states,
                                                std::size_t n_states) {
    std::vector<double> p(n_states, 0.0);
    for (const auto& s : states) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < s.size(); ++i)
            if (s[i] > s[best]) best = i;
        p[best] += 1.0;
    }
    for (double& v : p) v /= static_cast<double>(states.size());
    return p;
}

/// Model state distribution rho(s) = softmax_s(-E(s)) over a finite feature
/// set, from plain forward passes (no tape).
inline std::vector<double> model_state_dist(const PolicyNet& net,
                                            const std::vector<std::vector<double>>& states) {
    std::vector<double> neg_energy(states.size());
    for (std::size_t i = 0; i < states.size(); ++i)
        neg_energy[i] = -net.state_energy(states[i]);  // = logsumexp of logits
    const double lse = edm::logsumexp(neg_energy);
    std::vector<double> rho(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) rho[i] = std::exp(neg_energy[i] - lse);
    return rho;
}

}  // namespace detail

/// Builds L_pi (mean cross-entropy of pi(.|s) against demonstrated actions)
/// and L_rho (mean energy over demo states minus the negative-phase energy
/// term) on a shared tape. Negative states are constants: gradients flow
/// through the energy evaluated at them, not through how they were produced.
///
/// When `exact_weights` is non-null, the negative phase is the exact model
/// expectation sum_s rho(s) E(s) over `negative_states` with the given
/// (detached) weights; otherwise it is the mean over sampled negatives.
inline LossGraph surrogate_losses(const PolicyNet& net,
                                  const std::vector<const Transition*>& demo_batch,
                                  const std::vector<std::vector<double>>& negative_states,
                                  const std::vector<std::vector<double>>* positive_states = nullptr,
                                  const std::vector<double>* exact_weights = nullptr) {
    if (demo_batch.empty()) throw std::invalid_argument("surrogate_losses: empty demo batch");
    LossGraph g;
    g.bound = bind_mlp(g.tape, net.params, net.spec);

    std::vector<std::vector<double>> demo_states;
    std::vector<std::size_t> demo_actions;
    demo_states.reserve(demo_batch.size());
    for (const Transition* tr : demo_batch) {
        demo_states.push_back(tr->state);
        demo_actions.push_back(tr->action);
    }
    const VarId demo_x = g.tape.leaf(detail::states_matrix(demo_states, net.spec.input_dim));
    const VarId logits = forward_mlp(g.tape, g.bound, demo_x);
    const VarId lse = g.tape.logsumexp_rows(logits);
    const VarId picked = g.tape.gather_rows(logits, demo_actions);
    g.demo_logits = logits;
    g.demo_picked = picked;
    g.loss_pi = g.tape.mean(g.tape.sub(lse, picked));

    // Positive phase: demo minibatch by default (the algorithm's shared
    // batch); a pooled batch when state-only data is in play.
    VarId pos_mean_energy;
    if (positive_states == nullptr) {
        pos_mean_energy = g.tape.neg(g.tape.mean(lse));
    } else {
        const VarId pos_x =
            g.tape.leaf(detail::states_matrix(*positive_states, net.spec.input_dim));
        pos_mean_energy =
            g.tape.neg(g.tape.mean(g.tape.logsumexp_rows(forward_mlp(g.tape, g.bound, pos_x))));
    }

    if (!negative_states.empty()) {
        const VarId neg_x =
            g.tape.leaf(detail::states_matrix(negative_states, net.spec.input_dim));
        const VarId neg_energy =
            g.tape.neg(g.tape.logsumexp_rows(forward_mlp(g.tape, g.bound, neg_x)));
        VarId model_term;
        if (exact_weights != nullptr)
            model_term = g.tape.weighted_sum(neg_energy, *exact_weights);
        else
            model_term = g.tape.mean(neg_energy);
        g.loss_rho = g.tape.sub(pos_mean_energy, model_term);
        g.has_rho = true;
    }
    return g;
}

/// Exact model distribution and expected energy over a finite feature set.
/// The weights are detached, so differentiating the returned term matches
/// the contrastive-divergence gradient with the expectation taken exactly.
struct ExactNegativePhase {
    std::vector<double> rho;       // model state distribution
    double expected_energy = 0.0;  // sum_s rho(s) E(s)
};

inline ExactNegativePhase exact_negative_phase(const PolicyNet& net,
                                               const std::vector<std::vector<double>>& feature_set) {
    if (feature_set.empty())
        throw std::invalid_argument("exact_negative_phase: empty feature set");
    ExactNegativePhase out;
    out.rho = detail::model_state_dist(net, feature_set);
    for (std::size_t i = 0; i < feature_set.size(); ++i)
        out.expected_energy += out.rho[i] * net.state_energy(feature_set[i]);
    return out;
}

struct TrainLogRow {
    std::size_t iteration = 0;
    double loss_pi = 0.0;
    double loss_rho = 0.0;
    double kl_exact = 0.0;
    bool has_kl = false;
    std::size_t buffer_restarts = 0;  // SGLD chain restarts this iteration
    double wall_ms = 0.0;
};

struct TrainResult {
    PolicyNet net;
    std::vector<TrainLogRow> log;
};

/// CSV columns: iteration,loss_pi,loss_rho,kl_exact,buffer_restarts,wall_ms.
/// kl_exact is empty except at checkpoints (exact mode only).
inline void write_train_log(const std::vector<TrainLogRow>& log, std::ostream& out) {
    out << "iteration,loss_pi,loss_rho,kl_exact,buffer_restarts,wall_ms\n";
    for (const TrainLogRow& r : log) {
        out << r.iteration << "," << g17(r.loss_pi) << "," << g17(r.loss_rho) << ",";
        if (r.has_kl) out << g17(r.kl_exact);
        out << "," << r.buffer_restarts << "," << g17(r.wall_ms) << "\n";
    }
}

/// The shared mini-batch loop behind all three trainers. Per iteration:
/// sample a demonstration batch, draw negative states (EDM only), build the
/// losses on one tape, backpropagate, take an Adam step. Fully deterministic
/// given (seed, config, dataset): every random draw comes from a labeled
/// stream of the run seed, and streams are isolated so ablations that zero
/// out a term reproduce the baseline update-for-update.
inline TrainResult train_policy(const EnvMeta& meta, const TrainingSource& src,
                                const TrainConfig& cfg, const SgldConfig& sgld_cfg = {},
                                PcdBuffer* buffer = nullptr) {
    cfg.validate();
    if (src.transitions.empty()) throw std::invalid_argument("train: empty dataset");
    if (meta.state_dim == 0 || meta.n_actions == 0)
        throw std::invalid_argument("train: bad environment dimensions");
    const bool use_rho = cfg.algo == Algo::Edm;
    const bool exact_mode = cfg.negative_phase == NegativePhase::Exact;
    if (use_rho && exact_mode && meta.exact_states.empty())
        throw std::invalid_argument("train: exact negative phase needs a finite feature set");
    if (cfg.algo == Algo::Rcal)
        for (const Transition& tr : src.transitions)
            if (!tr.done && !tr.has_next())
                throw std::invalid_argument(
                    "train: rcal requires triples, but the dataset is pair-only");

    const Rng root(cfg.seed);
    Rng init_rng = root.split("init");
    Rng batch_rng = root.split("batch");
    Rng pos_rng = root.split("pos");
    Rng sgld_rng = root.split("sgld");

    TrainResult result;
    result.net = PolicyNet::init(PolicyNet::default_spec(meta.state_dim, meta.n_actions), init_rng);
    PolicyNet& net = result.net;

    // Pooled positive-phase states; identical to the demo states when no
    // state-only data is attached (and then the demo minibatch is reused).
    const bool pooled_positive = use_rho && !src.extra_states.empty();
    std::vector<std::vector<double>> pooled;
    if (pooled_positive) {
        pooled.reserve(src.transitions.size() + src.extra_states.size());
        for (const Transition& tr : src.transitions) pooled.push_back(tr.state);
        for (const auto& s : src.extra_states) pooled.push_back(s);
    }

    // Empirical state distribution for the exact-KL diagnostic.
    std::vector<double> data_dist;
    if (use_rho && exact_mode) {
        std::vector<std::vector<double>> all_pos;
        for (const Transition& tr : src.transitions) all_pos.push_back(tr.state);
        for (const auto& s : src.extra_states) all_pos.push_back(s);
        data_dist = detail::empirical_state_dist(all_pos, meta.exact_states.size());
    }

    PcdBuffer local_buffer;
    PcdBuffer* buf = buffer ? buffer : &local_buffer;
    if (use_rho && !exact_mode && !buf->has_init_range()) {
        std::vector<std::vector<double>> all_states;
        for (const Transition& tr : src.transitions) all_states.push_back(tr.state);
        for (const auto& s : src.extra_states) all_states.push_back(s);
        buf->init_range_from_states(all_states);
    }

    std::vector<double> rcal_factors;
    const auto t_start = std::chrono::steady_clock::now();
    auto elapsed_ms = [&t_start] {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start)
            .count();
    };
    auto kl_now = [&] {
        return kl_divergence(data_dist, detail::model_state_dist(net, meta.exact_states));
    };

    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        std::vector<const Transition*> batch;
        batch.reserve(cfg.batch_size);
        for (std::size_t i = 0; i < cfg.batch_size; ++i)
            batch.push_back(&src.transitions[batch_rng.index(src.transitions.size())]);

        std::vector<std::vector<double>> positive;
        if (pooled_positive) {
            positive.reserve(cfg.batch_size);
            for (std::size_t i = 0; i < cfg.batch_size; ++i)
                positive.push_back(pooled[pos_rng.index(pooled.size())]);
        }

        std::vector<std::vector<double>> negative;
        std::vector<double> exact_weights;
        SgldStats sgld_stats;
        if (use_rho) {
            if (exact_mode) {
                negative = meta.exact_states;
                exact_weights = detail::model_state_dist(net, meta.exact_states);
            } else {
                negative = sgld_sample(policy_energy(net), *buf, sgld_cfg, cfg.batch_size,
                                       sgld_rng, &sgld_stats);
            }
        }

        LossGraph g = surrogate_losses(net, batch, negative,
                                       pooled_positive ? &positive : nullptr,
                                       exact_mode && use_rho ? &exact_weights : nullptr);

        TrainLogRow row;
        row.iteration = it;
        row.loss_pi = g.tape.value(g.loss_pi)[0];
        row.buffer_restarts = sgld_stats.restarts;
        if (use_rho && exact_mode && it % cfg.log_every == 0) {
            row.kl_exact = kl_now();
            row.has_kl = true;
        }

        VarId total = g.loss_pi;
        if (cfg.algo == Algo::Edm && g.has_rho) {
            row.loss_rho = g.tape.value(g.loss_rho)[0];
            total = g.tape.add(g.loss_pi, g.tape.scale(g.loss_rho, cfg.rho_weight));
        } else if (cfg.algo == Algo::Rcal) {
            // Implied-reward sparsity penalty: |f(s)[a] - gamma lse f(s')|
            // with zero continuation on terminal transitions. Reuses the
            // demonstration forward pass for f(s)[a].
            std::vector<std::vector<double>> next_states;
            rcal_factors.clear();
            next_states.reserve(batch.size());
            for (const Transition* tr : batch) {
                next_states.push_back(tr->done ? std::vector<double>(meta.state_dim, 0.0)
                                               : tr->next_state);
                rcal_factors.push_back(tr->done ? 0.0 : meta.gamma);
            }
            const VarId next_x = g.tape.leaf(detail::states_matrix(next_states, meta.state_dim));
            const VarId lse_next = g.tape.logsumexp_rows(forward_mlp(g.tape, g.bound, next_x));
            const VarId rhat =
                g.tape.sub(g.demo_picked, g.tape.rowwise_scale(lse_next, rcal_factors));
            const VarId penalty = g.tape.mean(g.tape.abs(rhat));
            total = g.tape.add(g.loss_pi, g.tape.scale(penalty, cfg.rcal_lambda));
        }

        const double total_value = g.tape.value(total)[0];
        if (!std::isfinite(total_value))
            throw std::runtime_error("train: non-finite loss at iteration " + std::to_string(it) +
                                     " (loss_pi=" + std::to_string(row.loss_pi) +
                                     ", loss_rho=" + std::to_string(row.loss_rho) + ")");

        g.tape.backward(total);
        adam_step(net.params, g.bound.grads(g.tape), cfg.learning_rate);

        row.wall_ms = elapsed_ms();
        result.log.push_back(row);
    }

    // Final checkpoint row: losses are not re-sampled, only the exact-KL
    // diagnostic is refreshed at the final parameters.
    if (use_rho && exact_mode) {
        TrainLogRow final_row;
        final_row.iteration = cfg.iterations;
        final_row.loss_pi = result.log.back().loss_pi;
        final_row.loss_rho = result.log.back().loss_rho;
        final_row.kl_exact = kl_now();
        final_row.has_kl = true;
        final_row.wall_ms = elapsed_ms();
        result.log.push_back(final_row);
    }
    return result;
}

/// Algorithm: energy-based distribution matching (policy loss + occupancy loss).
inline TrainResult train_edm(const EnvMeta& meta, const TrainingSource& src, TrainConfig cfg,
                             const SgldConfig& sgld_cfg = {}, PcdBuffer* buffer = nullptr) {
    cfg.algo = Algo::Edm;
    return train_policy(meta, src, cfg, sgld_cfg, buffer);
}

/// Behavioral cloning: the same loop with the occupancy loss removed.
inline TrainResult train_bc(const EnvMeta& meta, const TrainingSource& src, TrainConfig cfg) {
    cfg.algo = Algo::Bc;
    return train_policy(meta, src, cfg);
}

/// Reward-regularized classification: behavioral cloning plus an L1 penalty
/// on rewards implied by inverting the Bellman equation. Needs triples.
inline TrainResult train_rcal(const EnvMeta& meta, const TrainingSource& src, TrainConfig cfg) {
    cfg.algo = Algo::Rcal;
    return train_policy(meta, src, cfg);
}

}  // namespace edm
