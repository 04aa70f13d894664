#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <sstream>

#include "edm/data.hpp"
#include "edm/policy.hpp"
#include "edm/solver.hpp"
#include "edm/train.hpp"
#include "support/oracles.hpp"

using namespace edm;

namespace {

EnvMeta tiny_meta(std::size_t state_dim, std::size_t n_actions, double gamma = 0.9) {
    EnvMeta meta;
    meta.env_name = "tiny";
    meta.state_dim = state_dim;
    meta.n_actions = n_actions;
    meta.gamma = gamma;
    for (std::size_t s = 0; s < state_dim; ++s) {
        std::vector<double> f(state_dim, 0.0);
        f[s] = 1.0;
        meta.exact_states.push_back(std::move(f));
    }
    return meta;
}

Transition make_transition(std::vector<double> state, std::size_t action,
                           std::vector<double> next, bool done = false) {
    Transition tr;
    tr.state = std::move(state);
    tr.action = action;
    tr.next_state = std::move(next);
    tr.done = done;
    return tr;
}

TrainingSource single_state_source(std::size_t copies) {
    TrainingSource src;
    for (std::size_t i = 0; i < copies; ++i)
        src.transitions.push_back(make_transition({1.0}, 0, {1.0}));
    return src;
}

PolicyNet random_net(std::size_t input_dim, std::size_t n_actions, std::uint64_t seed,
                     std::vector<std::size_t> hidden = {6}) {
    Rng rng(seed);
    Rng init = rng.split("init");
    return PolicyNet::init(MlpSpec{input_dim, std::move(hidden), n_actions, Activation::Elu}, init);
}

std::vector<std::vector<double>> random_states(std::size_t n, std::size_t dim, Rng& rng) {
    std::vector<std::vector<double>> out(n, std::vector<double>(dim));
    for (auto& s : out)
        for (double& v : s) v = rng.uniform(-1.5, 1.5);
    return out;
}

bool params_bit_identical(const ParamStore& a, const ParamStore& b) {
    if (a.entries.size() != b.entries.size()) return false;
    for (std::size_t p = 0; p < a.entries.size(); ++p) {
        if (a.entries[p].value.shape != b.entries[p].value.shape) return false;
        for (std::size_t i = 0; i < a.entries[p].value.numel(); ++i)
            if (a.entries[p].value[i] != b.entries[p].value[i]) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("surrogate losses: matched phases cancel exactly") {
    Rng rng(100);
    const PolicyNet net = random_net(3, 2, 1);
    auto states = random_states(5, 3, rng);
    std::vector<Transition> batch;
    for (const auto& s : states) batch.push_back(make_transition(s, 0, s));
    std::vector<const Transition*> ptrs;
    for (const Transition& tr : batch) ptrs.push_back(&tr);

    LossGraph g = surrogate_losses(net, ptrs, states);
    REQUIRE(g.has_rho);
    CHECK(g.tape.value(g.loss_rho)[0] == 0.0);
}

TEST_CASE("surrogate losses: single pair at probability one half gives ln 2") {
    PolicyNet net;
    net.spec = MlpSpec{1, {}, 2, Activation::Elu};
    net.params.add("W0", Tensor::zeros({1, 2}));
    net.params.add("b0", Tensor::zeros({2}));
    const Transition tr = make_transition({1.0}, 0, {1.0});
    LossGraph g = surrogate_losses(net, {&tr}, {});
    CHECK(g.tape.value(g.loss_pi)[0] == Catch::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("surrogate losses: gradient of loss_pi + loss_rho matches finite differences") {
    Rng rng(200);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        Rng trial_rng = rng.split(trial);
        const std::size_t dim = 2 + trial_rng.index(3);
        const std::size_t n_actions = 2 + trial_rng.index(2);
        PolicyNet net = random_net(dim, n_actions, trial_rng.next_u64(), {4, 4});
        auto demo_states = random_states(4, dim, trial_rng);
        auto neg_states = random_states(6, dim, trial_rng);
        std::vector<Transition> batch;
        for (const auto& s : demo_states)
            batch.push_back(make_transition(s, trial_rng.index(n_actions), s));
        std::vector<const Transition*> ptrs;
        for (const Transition& tr : batch) ptrs.push_back(&tr);

        auto loss_value = [&]() {
            LossGraph g = surrogate_losses(net, ptrs, neg_states);
            return g.tape.value(g.tape.add(g.loss_pi, g.loss_rho))[0];
        };
        LossGraph g = surrogate_losses(net, ptrs, neg_states);
        g.tape.backward(g.tape.add(g.loss_pi, g.loss_rho));
        const auto analytic = g.bound.grads(g.tape);
        const auto fd = oracle::fd_param_gradients(net.params, loss_value);
        worst = std::max(worst, oracle::max_rel_err(analytic, fd));
    }
    CHECK(worst <= 1e-5);
}

TEST_CASE("surrogate identity: loss_rho + loss_pi telescopes to the two-term form") {
    Rng rng(300);
    for (int trial = 0; trial < 20; ++trial) {
        Rng trial_rng = rng.split(trial);
        const std::size_t dim = 2 + trial_rng.index(4);
        const std::size_t n_actions = 2 + trial_rng.index(3);
        const PolicyNet net = random_net(dim, n_actions, trial_rng.next_u64(), {5});
        auto demo_states = random_states(1 + trial_rng.index(6), dim, trial_rng);
        auto neg_states = random_states(1 + trial_rng.index(6), dim, trial_rng);
        std::vector<Transition> batch;
        for (const auto& s : demo_states)
            batch.push_back(make_transition(s, trial_rng.index(n_actions), s));
        std::vector<const Transition*> ptrs;
        for (const Transition& tr : batch) ptrs.push_back(&tr);

        LossGraph g = surrogate_losses(net, ptrs, neg_states);
        const double sum = g.tape.value(g.loss_pi)[0] + g.tape.value(g.loss_rho)[0];

        // The demo-state logsumexp inside the cross-entropy cancels the demo
        // energy term, leaving mean_neg lse f - mean_demo f(s)[a].
        double mean_neg_lse = 0.0;
        for (const auto& s : neg_states) mean_neg_lse += edm::logsumexp(net.logits(s));
        mean_neg_lse /= static_cast<double>(neg_states.size());
        double mean_demo_logit = 0.0;
        for (const Transition& tr : batch) mean_demo_logit += net.logits(tr.state)[tr.action];
        mean_demo_logit /= static_cast<double>(batch.size());

        CHECK(std::fabs(sum - (mean_neg_lse - mean_demo_logit)) <= 1e-12);
    }
}

TEST_CASE("exact negative phase: model distribution") {
    SECTION("identical logits at every state give the uniform distribution") {
        PolicyNet net;
        net.spec = MlpSpec{4, {}, 3, Activation::Elu};
        net.params.add("W0", Tensor::zeros({4, 3}));
        net.params.add("b0", Tensor::zeros({3}));
        const EnvMeta meta = tiny_meta(4, 3);
        const auto phase = exact_negative_phase(net, meta.exact_states);
        for (double p : phase.rho) CHECK(p == Catch::Approx(0.25).epsilon(1e-14));
    }
    SECTION("two states with energies [0, ln 3] weigh 0.75 / 0.25") {
        // One action; logit f(s) = -E(s): state 0 energy 0, state 1 energy ln 3.
        PolicyNet net;
        net.spec = MlpSpec{2, {}, 1, Activation::Elu};
        net.params.add("W0", Tensor::matrix(2, 1, {0.0, -std::log(3.0)}));
        net.params.add("b0", Tensor::zeros({1}));
        const EnvMeta meta = tiny_meta(2, 1);
        const auto phase = exact_negative_phase(net, meta.exact_states);
        CHECK(phase.rho[0] == Catch::Approx(0.75).epsilon(1e-13));
        CHECK(phase.rho[1] == Catch::Approx(0.25).epsilon(1e-13));
    }
}

TEST_CASE("exact-mode occupancy-loss gradient equals the log-partition gradient") {
    // Left side: the occupancy loss with exact detached model weights.
    // Right side: -E_{s ~ data} log rho(s) differentiated through the
    // explicit log-partition. Both by reverse mode; equal elementwise.
    Rng rng(400);
    for (int trial = 0; trial < 5; ++trial) {
        Rng trial_rng = rng.split(trial);
        const std::size_t n_states = 10;
        const PolicyNet net = random_net(n_states, 3, trial_rng.next_u64(), {7});
        const EnvMeta meta = tiny_meta(n_states, 3);

        // Random empirical distribution with integer counts so a repeated
        // batch reproduces it exactly.
        std::vector<std::size_t> counts(n_states);
        std::size_t total = 0;
        for (std::size_t s = 0; s < n_states; ++s) {
            counts[s] = trial_rng.index(4);
            total += counts[s];
        }
        if (total == 0) {
            counts[0] = 1;
            total = 1;
        }
        std::vector<double> data_dist(n_states);
        for (std::size_t s = 0; s < n_states; ++s)
            data_dist[s] = static_cast<double>(counts[s]) / static_cast<double>(total);

        // Side 1: library path. Demo batch with the exact multiset of states.
        std::vector<Transition> batch;
        for (std::size_t s = 0; s < n_states; ++s)
            for (std::size_t k = 0; k < counts[s]; ++k)
                batch.push_back(make_transition(meta.exact_states[s], 0, meta.exact_states[s]));
        std::vector<const Transition*> ptrs;
        for (const Transition& tr : batch) ptrs.push_back(&tr);
        const auto phase = exact_negative_phase(net, meta.exact_states);
        LossGraph g = surrogate_losses(net, ptrs, meta.exact_states, nullptr, &phase.rho);
        g.tape.backward(g.loss_rho);
        const auto lhs = g.bound.grads(g.tape);

        // Side 2: explicit log-partition, fully differentiated.
        Tape tape;
        TapedMlp bound = bind_mlp(tape, net.params, net.spec);
        Tensor all = Tensor::zeros({n_states, n_states});
        for (std::size_t s = 0; s < n_states; ++s) all(s, s) = 1.0;
        const VarId lse_all = tape.logsumexp_rows(forward_mlp(tape, bound, tape.leaf(all)));
        const VarId energies = tape.neg(lse_all);
        const VarId data_term = tape.weighted_sum(energies, data_dist);
        const VarId log_partition = tape.logsumexp(tape.neg(energies), 0);
        tape.backward(tape.add(data_term, log_partition));
        const auto rhs = bound.grads(tape);

        for (std::size_t p = 0; p < lhs.size(); ++p)
            for (std::size_t i = 0; i < lhs[p].numel(); ++i)
                CHECK(std::fabs(lhs[p][i] - rhs[p][i]) <= 1e-8);
    }
}

TEST_CASE("train_edm: degenerate single-state dataset saturates the demonstrated action") {
    const EnvMeta meta = tiny_meta(1, 2);
    TrainConfig cfg;
    cfg.seed = 7;
    cfg.negative_phase = NegativePhase::Exact;
    const TrainResult res = train_edm(meta, single_state_source(8), cfg);
    CHECK(res.net.action_probs({1.0})[0] >= 0.999);
    CHECK(res.log.back().has_kl);
}

TEST_CASE("train_bc: degenerate single-state dataset saturates the demonstrated action") {
    const EnvMeta meta = tiny_meta(1, 2);
    TrainConfig cfg;
    cfg.seed = 7;
    const TrainResult res = train_bc(meta, single_state_source(8), cfg);
    CHECK(res.net.action_probs({1.0})[0] >= 0.999);
}

TEST_CASE("train_bc: linearly separable two-state dataset reaches tiny cross-entropy") {
    // Oracle: a bare logistic fit on the same data drives the cross-entropy
    // below 0.01, so the dataset is separable and the target is attainable.
    {
        double w0 = 0.0, w1 = 0.0;  // logit of action 1 at states 0 and 1
        for (int it = 0; it < 4000; ++it) {
            const double p0 = 1.0 / (1.0 + std::exp(-w0));
            const double p1 = 1.0 / (1.0 + std::exp(-w1));
            w0 -= 0.05 * p0;          // state 0 wants action 0
            w1 += 0.05 * (1.0 - p1);  // state 1 wants action 1
        }
        const double ce = 0.5 * (-std::log(1.0 / (1.0 + std::exp(w0))) -
                                 std::log(1.0 / (1.0 + std::exp(-w1))));
        REQUIRE(ce < 0.01);
    }

    const EnvMeta meta = tiny_meta(2, 2);
    TrainingSource src;
    for (int i = 0; i < 4; ++i) {
        src.transitions.push_back(make_transition({1.0, 0.0}, 0, {1.0, 0.0}));
        src.transitions.push_back(make_transition({0.0, 1.0}, 1, {0.0, 1.0}));
    }
    TrainConfig cfg;
    cfg.seed = 3;
    const TrainResult res = train_bc(meta, src, cfg);

    double ce = 0.0;
    for (const Transition& tr : src.transitions)
        ce -= std::log(res.net.action_probs(tr.state)[tr.action]);
    ce /= static_cast<double>(src.transitions.size());
    CHECK(ce < 0.01);
}

TEST_CASE("training is deterministic: same seed, config, dataset give identical parameters") {
    const EnvMeta meta = tiny_meta(3, 2);
    TrainingSource src;
    src.transitions.push_back(make_transition({1.0, 0.0, 0.0}, 0, {0.0, 1.0, 0.0}));
    src.transitions.push_back(make_transition({0.0, 1.0, 0.0}, 1, {0.0, 0.0, 1.0}, true));
    TrainConfig cfg;
    cfg.iterations = 300;
    cfg.seed = 11;
    cfg.negative_phase = NegativePhase::Exact;
    const TrainResult a = train_edm(meta, src, cfg);
    const TrainResult b = train_edm(meta, src, cfg);
    CHECK(params_bit_identical(a.net.params, b.net.params));
    REQUIRE(a.log.size() == b.log.size());
    for (std::size_t i = 0; i < a.log.size(); ++i) {
        CHECK(a.log[i].loss_pi == b.log[i].loss_pi);
        CHECK(a.log[i].loss_rho == b.log[i].loss_rho);
    }
}

TEST_CASE("ablation: rcal with lambda 0 reproduces bc update-for-update") {
    const EnvMeta meta = tiny_meta(3, 2);
    TrainingSource src;
    src.transitions.push_back(make_transition({1.0, 0.0, 0.0}, 0, {0.0, 1.0, 0.0}));
    src.transitions.push_back(make_transition({0.0, 1.0, 0.0}, 1, {0.0, 0.0, 1.0}, true));
    TrainConfig cfg;
    cfg.iterations = 250;
    cfg.seed = 21;
    cfg.rcal_lambda = 0.0;
    const TrainResult rcal = train_rcal(meta, src, cfg);
    const TrainResult bc = train_bc(meta, src, cfg);
    CHECK(params_bit_identical(rcal.net.params, bc.net.params));
}

TEST_CASE("ablation: edm with the occupancy loss zeroed reproduces bc bit-exactly") {
    const EnvMeta meta = tiny_meta(3, 2);
    TrainingSource src;
    src.transitions.push_back(make_transition({1.0, 0.0, 0.0}, 0, {0.0, 1.0, 0.0}));
    src.transitions.push_back(make_transition({0.0, 1.0, 0.0}, 1, {0.0, 0.0, 1.0}, true));
    TrainConfig cfg;
    cfg.iterations = 250;
    cfg.seed = 31;
    cfg.negative_phase = NegativePhase::Exact;
    cfg.rho_weight = 0.0;
    const TrainResult edm_zero = train_edm(meta, src, cfg);
    const TrainResult bc = train_bc(meta, src, cfg);
    CHECK(params_bit_identical(edm_zero.net.params, bc.net.params));
}

TEST_CASE("ablation: empty state-only augmentation reproduces plain edm bit-exactly") {
    const TabularMdp grid = build_gridworld(2, 2, 0.1, 1.0, -0.05, 0.9);
    const SoftQ q = soft_value_iteration(grid, grid.reward, 1e-9);
    const auto expert = table_policy(soft_policy_from_q(q), 4);
    const DemoDataset ds = generate_demonstrations(grid, expert, "soft-vi", 2, 200, 5);

    const EnvMeta meta = EnvMeta::from(grid);
    TrainConfig cfg;
    cfg.iterations = 250;
    cfg.seed = 41;
    cfg.negative_phase = NegativePhase::Exact;
    const TrainResult plain = train_edm(meta, training_source(ds), cfg);
    const TrainResult augmented = train_edm(meta, augment_state_only(ds, {}), cfg);
    CHECK(params_bit_identical(plain.net.params, augmented.net.params));
}

TEST_CASE("state-only duplication leaves the positive-phase population mean unchanged") {
    Rng rng(500);
    const PolicyNet net = random_net(4, 2, 99, {5});
    auto states = random_states(6, 4, rng);

    auto mean_energy = [&](const std::vector<std::vector<double>>& pool) {
        double m = 0.0;
        for (const auto& s : pool) m += net.state_energy(s);
        return m / static_cast<double>(pool.size());
    };
    std::vector<std::vector<double>> doubled = states;
    doubled.insert(doubled.end(), states.begin(), states.end());
    CHECK(mean_energy(doubled) ==
          Catch::Approx(mean_energy(states)).epsilon(1e-15).margin(1e-15));
}

TEST_CASE("rcal: a large sparsity coefficient shrinks the implied rewards") {
    const TabularMdp chain = build_chain(4, 0.1, 1.0, -0.1, 0.9);
    const SoftQ q = soft_value_iteration(chain, chain.reward, 1e-9);
    const auto expert = table_policy(soft_policy_from_q(q), 2);
    const DemoDataset ds = generate_demonstrations(chain, expert, "soft-vi", 6, 200, 13);
    const EnvMeta meta = EnvMeta::from(chain);

    auto mean_implied = [&](double lambda) {
        TrainConfig cfg;
        cfg.iterations = 3000;
        cfg.seed = 97;
        cfg.rcal_lambda = lambda;
        const TrainResult res = train_rcal(meta, training_source(ds), cfg);
        double m = 0.0;
        std::size_t n = 0;
        for (const Transition& tr : ds.all_transitions()) {
            m += std::fabs(implied_reward(res.net, tr, meta.gamma));
            ++n;
        }
        return m / static_cast<double>(n);
    };
    CHECK(mean_implied(1e4) < mean_implied(1e-2));
}

TEST_CASE("rcal: penalty gradient matches finite differences away from kinks") {
    Rng rng(600);
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        Rng trial_rng = rng.split(trial);
        PolicyNet net = random_net(3, 2, trial_rng.next_u64(), {4});
        auto states = random_states(4, 3, trial_rng);
        auto nexts = random_states(4, 3, trial_rng);
        std::vector<Transition> batch;
        for (std::size_t i = 0; i < states.size(); ++i)
            batch.push_back(make_transition(states[i], trial_rng.index(2), nexts[i], i == 3));

        const double gamma = 0.9;
        auto penalty_value = [&]() {
            double m = 0.0;
            for (const Transition& tr : batch) m += std::fabs(implied_reward(net, tr, gamma));
            return m / static_cast<double>(batch.size());
        };
        // Taped penalty, mirroring the training construction.
        auto taped = [&](std::vector<Tensor>* grads) {
            Tape tape;
            TapedMlp bound = bind_mlp(tape, net.params, net.spec);
            Tensor cur = Tensor::zeros({batch.size(), 3});
            Tensor nxt = Tensor::zeros({batch.size(), 3});
            std::vector<std::size_t> actions;
            std::vector<double> factors;
            for (std::size_t i = 0; i < batch.size(); ++i) {
                for (std::size_t j = 0; j < 3; ++j) {
                    cur(i, j) = batch[i].state[j];
                    nxt(i, j) = batch[i].done ? 0.0 : batch[i].next_state[j];
                }
                actions.push_back(batch[i].action);
                factors.push_back(batch[i].done ? 0.0 : gamma);
            }
            const VarId picked =
                tape.gather_rows(forward_mlp(tape, bound, tape.leaf(cur)), actions);
            const VarId lse_next = tape.logsumexp_rows(forward_mlp(tape, bound, tape.leaf(nxt)));
            const VarId penalty =
                tape.mean(tape.abs(tape.sub(picked, tape.rowwise_scale(lse_next, factors))));
            if (grads) {
                tape.backward(penalty);
                *grads = bound.grads(tape);
            }
            return tape.value(penalty)[0];
        };
        std::vector<Tensor> analytic;
        const double direct = taped(&analytic);
        CHECK(std::fabs(direct - penalty_value()) <= 1e-12);
        const auto fd = oracle::fd_param_gradients(net.params, penalty_value);
        worst = std::max(worst, oracle::max_rel_err(analytic, fd));
    }
    CHECK(worst <= 1e-5);
}

TEST_CASE("rcal rejects pair-only datasets") {
    const EnvMeta meta = tiny_meta(2, 2);
    TrainingSource src;
    Transition tr;
    tr.state = {1.0, 0.0};
    tr.action = 0;
    tr.done = false;  // no next_state recorded
    src.transitions.push_back(tr);
    TrainConfig cfg;
    cfg.iterations = 5;
    REQUIRE_THROWS_WITH(train_rcal(meta, src, cfg),
                        Catch::Matchers::ContainsSubstring("pair-only"));
}

TEST_CASE("non-finite loss aborts with the iteration index") {
    const EnvMeta meta = tiny_meta(2, 2);
    TrainingSource src;
    src.transitions.push_back(
        make_transition({std::numeric_limits<double>::quiet_NaN(), 0.0}, 0, {1.0, 0.0}));
    TrainConfig cfg;
    cfg.iterations = 10;
    REQUIRE_THROWS_WITH(train_bc(meta, src, cfg),
                        Catch::Matchers::ContainsSubstring("iteration 0"));
}

TEST_CASE("sgld-mode training runs on continuous data and fills the buffer") {
    Rng rng(700);
    TrainingSource src;
    for (int i = 0; i < 40; ++i) {
        std::vector<double> s{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        std::vector<double> s2{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        src.transitions.push_back(make_transition(s, s[0] > 0 ? 1 : 0, s2));
    }
    EnvMeta meta;
    meta.env_name = "cont";
    meta.state_dim = 2;
    meta.n_actions = 2;
    meta.gamma = 0.99;

    TrainConfig cfg;
    cfg.iterations = 60;
    cfg.batch_size = 16;
    cfg.seed = 77;
    cfg.negative_phase = NegativePhase::Sgld;
    SgldConfig sgld;
    sgld.chain_length = 5;
    PcdBuffer buffer(256, 0.05);
    const TrainResult res = train_edm(meta, src, cfg, sgld, &buffer);
    CHECK(res.log.size() == 60);
    CHECK(buffer.size() == std::min<std::size_t>(256, 60 * 16));
    for (const TrainLogRow& row : res.log) {
        CHECK(std::isfinite(row.loss_pi));
        CHECK(std::isfinite(row.loss_rho));
    }
    // The learned policy should pick up the sign rule on average.
    std::size_t hits = 0;
    for (const Transition& tr : src.transitions) {
        const auto p = res.net.action_probs(tr.state);
        if ((p[1] > p[0]) == (tr.state[0] > 0)) ++hits;
    }
    CHECK(hits >= 30);
}

TEST_CASE("exact mode requires a finite feature set") {
    EnvMeta meta;
    meta.state_dim = 2;
    meta.n_actions = 2;
    meta.gamma = 0.9;
    TrainingSource src;
    src.transitions.push_back(make_transition({0.1, 0.2}, 0, {0.3, 0.4}));
    TrainConfig cfg;
    cfg.negative_phase = NegativePhase::Exact;
    REQUIRE_THROWS_AS(train_edm(meta, src, cfg), std::invalid_argument);
}

TEST_CASE("training log csv has the documented columns") {
    std::vector<TrainLogRow> log(2);
    log[0].iteration = 0;
    log[0].loss_pi = 0.5;
    log[0].loss_rho = -0.25;
    log[0].has_kl = true;
    log[0].kl_exact = 1.5;
    log[1].iteration = 1;
    log[1].loss_pi = 0.375;
    log[1].loss_rho = -0.125;
    std::ostringstream out;
    write_train_log(log, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "iteration,loss_pi,loss_rho,kl_exact,buffer_restarts,wall_ms");
    std::getline(in, line);
    CHECK(line.rfind("0,0.5,-0.25,1.5,0,", 0) == 0);
    std::getline(in, line);
    CHECK(line.rfind("1,0.375,-0.125,,0,", 0) == 0);
}
