#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "edm/mdp.hpp"
#include "edm/rollout.hpp"
#include "edm/solver.hpp"
#include "support/random_mdp.hpp"

using namespace edm;

namespace {

TabularMdp one_state_mdp(std::size_t n_actions, double gamma) {
    TabularMdp mdp;
    mdp.name = "one-state";
    mdp.n_states = 1;
    mdp.n_actions = n_actions;
    mdp.gamma = gamma;
    mdp.transition.assign(n_actions, 1.0);
    mdp.reward.assign(n_actions, 0.0);
    mdp.initial_dist = {1.0};
    mdp.terminal = {0};
    mdp.validate();
    return mdp;
}

double sup_norm_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::fabs(a[i] - b[i]));
    return worst;
}

}  // namespace

TEST_CASE("soft value iteration: single state, single action geometric series") {
    const TabularMdp mdp = one_state_mdp(1, 0.9);
    const SoftQ q = soft_value_iteration(mdp, {1.0}, 1e-12);
    // One action: logsumexp is exact, so the fixed point is 1/(1-gamma).
    CHECK(q.at(0, 0) == Catch::Approx(10.0).epsilon(1e-10));
    CHECK(q.residual <= 1e-12);
}

TEST_CASE("soft value iteration: two identical actions include the entropy bonus") {
    const TabularMdp mdp = one_state_mdp(2, 0.9);
    const SoftQ q = soft_value_iteration(mdp, {1.0, 1.0}, 1e-12);
    // Fixed point of Q = 1 + 0.9 (Q + ln 2).
    CHECK(q.at(0, 0) == Catch::Approx(16.238324625039508).epsilon(1e-10));
    CHECK(q.at(0, 1) == Catch::Approx(16.238324625039508).epsilon(1e-10));
}

TEST_CASE("soft value iteration reports non-convergence") {
    const TabularMdp mdp = one_state_mdp(1, 0.9);
    REQUIRE_THROWS_WITH(soft_value_iteration(mdp, {1.0}, 1e-12, 3),
                        Catch::Matchers::ContainsSubstring("residual"));
}

TEST_CASE("soft Bellman operator contracts with modulus at most gamma") {
    Rng rng(314159);
    const TabularMdp mdp = testutil::random_mdp(5, 3, 0.9, rng);
    const std::vector<double> reward = testutil::random_q(5, 3, rng);
    for (int trial = 0; trial < 100; ++trial) {
        SoftQ q1, q2;
        q1.n_states = q2.n_states = 5;
        q1.n_actions = q2.n_actions = 3;
        q1.gamma = q2.gamma = 0.9;
        q1.q = testutil::random_q(5, 3, rng, -5.0, 5.0);
        q2.q = testutil::random_q(5, 3, rng, -5.0, 5.0);
        const SoftQ b1 = soft_bellman_apply(mdp, reward, q1);
        const SoftQ b2 = soft_bellman_apply(mdp, reward, q2);
        const double num = sup_norm_diff(b1.q, b2.q);
        const double den = sup_norm_diff(q1.q, q2.q);
        REQUIRE(den > 0.0);
        CHECK(num <= 0.9 * den + 1e-12);
    }
}

TEST_CASE("soft policy from Q") {
    SECTION("equal Q rows give the uniform policy") {
        SoftQ q;
        q.n_states = 2;
        q.n_actions = 3;
        q.gamma = 0.9;
        q.q = {1.7, 1.7, 1.7, -2.0, -2.0, -2.0};
        const auto table = soft_policy_from_q(q);
        for (double p : table) CHECK(p == Catch::Approx(1.0 / 3.0).epsilon(1e-14));
    }
    SECTION("Q row [0, ln 3] gives probabilities [0.25, 0.75]") {
        SoftQ q;
        q.n_states = 1;
        q.n_actions = 2;
        q.gamma = 0.9;
        q.q = {0.0, std::log(3.0)};
        const auto table = soft_policy_from_q(q);
        CHECK(table[0] == Catch::Approx(0.25).epsilon(1e-14));
        CHECK(table[1] == Catch::Approx(0.75).epsilon(1e-14));
    }
    SECTION("random Q rows sum to 1") {
        Rng rng(8);
        SoftQ q;
        q.n_states = 6;
        q.n_actions = 4;
        q.gamma = 0.9;
        q.q = testutil::random_q(6, 4, rng, -30.0, 30.0);
        const auto table = soft_policy_from_q(q);
        for (std::size_t s = 0; s < 6; ++s) {
            double sum = 0.0;
            for (std::size_t a = 0; a < 4; ++a) sum += table[s * 4 + a];
            CHECK(std::fabs(sum - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("inverse Bellman operator") {
    SECTION("recovers R = 1 from the two-action fixed point") {
        const TabularMdp mdp = one_state_mdp(2, 0.9);
        const SoftQ q = soft_value_iteration(mdp, {1.0, 1.0}, 1e-12);
        const auto r = inverse_bellman(q, mdp);
        CHECK(r[0] == Catch::Approx(1.0).epsilon(1e-9));
        CHECK(r[1] == Catch::Approx(1.0).epsilon(1e-9));
    }
    SECTION("zero Q on a single-action MDP maps to zero reward") {
        Rng rng(21);
        const TabularMdp mdp = testutil::random_mdp(4, 1, 0.8, rng);
        SoftQ q;
        q.n_states = 4;
        q.n_actions = 1;
        q.gamma = 0.8;
        q.q.assign(4, 0.0);
        const auto r = inverse_bellman(q, mdp);
        for (double v : r) CHECK(v == Catch::Approx(0.0).margin(1e-15));
    }
    SECTION("round trip J(inverse(R)) = R on a random 4-state 2-action MDP") {
        Rng rng(1234);
        const TabularMdp mdp = testutil::random_mdp(4, 2, 0.9, rng);
        const std::vector<double> reward = testutil::random_q(4, 2, rng);
        const SoftQ q = soft_value_iteration(mdp, reward, 1e-9);
        const auto back = inverse_bellman(q, mdp);
        CHECK(sup_norm_diff(back, reward) <= 1e-6);
    }
    SECTION("round trip the other way: Q -> R -> Q") {
        Rng rng(4321);
        const TabularMdp mdp = testutil::random_mdp(5, 3, 0.85, rng);
        SoftQ q;
        q.n_states = 5;
        q.n_actions = 3;
        q.gamma = 0.85;
        q.q = testutil::random_q(5, 3, rng);
        const auto r = inverse_bellman(q, mdp);
        const SoftQ q2 = soft_value_iteration(mdp, r, 1e-10);
        CHECK(sup_norm_diff(q.q, q2.q) <= 1e-6);
    }
}

TEST_CASE("exact occupancy") {
    SECTION("single-state MDP has occupancy 1") {
        TabularMdp mdp;
        mdp.n_states = 1;
        mdp.n_actions = 1;
        mdp.gamma = 0.9;
        mdp.transition = {1.0};
        mdp.reward = {0.5};
        mdp.initial_dist = {1.0};
        mdp.terminal = {0};
        mdp.validate();
        const auto occ = exact_occupancy(mdp, {1.0});
        CHECK(occ.state[0] == Catch::Approx(1.0).epsilon(1e-12));
    }
    SECTION("deterministic absorbing chain at gamma 0.5 splits evenly") {
        // s0 -> s1, s1 absorbing but not flagged terminal: occupancy is
        // (1-gamma) * [1, gamma + gamma^2 + ...] = [0.5, 0.5].
        TabularMdp mdp;
        mdp.n_states = 2;
        mdp.n_actions = 1;
        mdp.gamma = 0.5;
        mdp.transition = {0.0, 1.0, 0.0, 1.0};
        mdp.reward = {0.0, 0.0};
        mdp.initial_dist = {1.0, 0.0};
        mdp.terminal = {0, 0};
        mdp.validate();
        const auto occ = exact_occupancy(mdp, {1.0, 1.0});
        CHECK(occ.state[0] == Catch::Approx(0.5).epsilon(1e-12));
        CHECK(occ.state[1] == Catch::Approx(0.5).epsilon(1e-12));
    }
    SECTION("terminal-free occupancy is a distribution with tiny flow residual") {
        Rng rng(9);
        const TabularMdp mdp = testutil::random_mdp(7, 3, 0.93, rng);
        const auto policy = testutil::random_policy_table(7, 3, rng);
        const auto occ = exact_occupancy(mdp, policy);
        double sum = 0.0;
        for (double v : occ.state) {
            CHECK(v >= 0.0);
            sum += v;
        }
        CHECK(std::fabs(sum - 1.0) <= 1e-10);
        CHECK(flow_residual(mdp, policy, occ) <= 1e-10);

        // Occupancy-level decomposition: log rho(s,a) = log rho(s) + log pi(a|s).
        for (std::size_t s = 0; s < 7; ++s)
            for (std::size_t a = 0; a < 3; ++a) {
                if (occ.state[s] <= 0.0 || policy[s * 3 + a] <= 0.0) continue;
                const double lhs = std::log(occ.state_action[s * 3 + a]);
                const double rhs = std::log(occ.state[s]) + std::log(policy[s * 3 + a]);
                CHECK(std::fabs(lhs - rhs) <= 1e-12);
            }
    }
    SECTION("discounted Monte Carlo visitation matches the flow solution") {
        const TabularMdp grid = build_gridworld(2, 2, 0.1, 1.0, -0.05, 0.9);
        Rng rng(31);
        const auto policy = testutil::random_policy_table(4, 4, rng);
        const auto occ = exact_occupancy(grid, policy);

        // Streaming Monte Carlo oracle: accumulate (1-gamma) gamma^t at each
        // visited state-action pair.
        const std::size_t episodes = 50000;
        std::vector<double> mc(4 * 4, 0.0);
        std::vector<double> mc_sq(4 * 4, 0.0);
        for (std::size_t e = 0; e < episodes; ++e) {
            Rng ep = episode_rng(777, e);
            std::size_t s = sample_initial_state(grid, ep);
            double w = 1.0 - grid.gamma;
            std::vector<double> visit(4 * 4, 0.0);
            for (std::size_t t = 0; t < 200 && !grid.is_terminal(s); ++t) {
                std::vector<double> probs(4);
                for (std::size_t a = 0; a < 4; ++a) probs[a] = policy[s * 4 + a];
                const std::size_t a = sample_action(probs, ep);
                visit[s * 4 + a] += w;
                w *= grid.gamma;
                s = env_step(grid, s, a, ep).next_state;
            }
            for (std::size_t i = 0; i < 16; ++i) {
                mc[i] += visit[i];
                mc_sq[i] += visit[i] * visit[i];
            }
        }
        for (std::size_t i = 0; i < 16; ++i) {
            const double mean = mc[i] / static_cast<double>(episodes);
            const double ex2 = mc_sq[i] / static_cast<double>(episodes);
            const double sigma =
                std::sqrt(std::max(ex2 - mean * mean, 0.0) / static_cast<double>(episodes));
            INFO("entry " << i << " exact=" << occ.state_action[i] << " mc=" << mean);
            CHECK(std::fabs(mean - occ.state_action[i]) <= 3.0 * sigma + 1e-6);
        }
    }
    SECTION("terminal reward entries do not affect occupancy") {
        const TabularMdp grid = build_gridworld(3, 2, 0.15, 1.0, -0.05, 0.9);
        Rng rng(77);
        const auto policy = testutil::random_policy_table(grid.n_states, 4, rng);
        const auto occ1 = exact_occupancy(grid, policy);
        TabularMdp hacked = grid;  // bypass validate(): poison terminal rewards
        for (std::size_t a = 0; a < 4; ++a) hacked.r(hacked.n_states - 1, a) = 1e9;
        const auto occ2 = exact_occupancy(hacked, policy);
        for (std::size_t s = 0; s < grid.n_states; ++s) CHECK(occ1.state[s] == occ2.state[s]);
    }
}

TEST_CASE("lu_solve flags singular systems") {
    REQUIRE_THROWS_AS(lu_solve({1.0, 2.0, 2.0, 4.0}, {1.0, 2.0}), std::runtime_error);
}

TEST_CASE("KL divergence") {
    SECTION("identical measures give 0") {
        CHECK(kl_divergence({0.3, 0.7}, {0.3, 0.7}) == 0.0);
    }
    SECTION("[1,0] vs [0.5,0.5] gives ln 2") {
        CHECK(kl_divergence({1.0, 0.0}, {0.5, 0.5}) == Catch::Approx(std::log(2.0)).epsilon(1e-14));
    }
    SECTION("support violation reports infinity") {
        CHECK(std::isinf(kl_divergence({0.5, 0.5}, {1.0, 0.0})));
    }
    SECTION("random 6-state pair matches long-double summation to 1e-12") {
        Rng rng(55);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> p(6), q(6);
            double sp = 0.0, sq = 0.0;
            for (std::size_t i = 0; i < 6; ++i) {
                p[i] = rng.uniform(0.01, 1.0);
                q[i] = rng.uniform(0.01, 1.0);
                sp += p[i];
                sq += q[i];
            }
            double accp = 0.0, accq = 0.0;
            for (std::size_t i = 0; i + 1 < 6; ++i) {
                p[i] /= sp;
                q[i] /= sq;
                accp += p[i];
                accq += q[i];
            }
            p[5] = 1.0 - accp;
            q[5] = 1.0 - accq;
            long double direct = 0.0L;
            for (std::size_t i = 0; i < 6; ++i)
                direct += static_cast<long double>(p[i]) *
                          logl(static_cast<long double>(p[i]) / static_cast<long double>(q[i]));
            CHECK(std::fabs(kl_divergence(p, q) - static_cast<double>(direct)) <= 1e-12);
        }
    }
    SECTION("unnormalized inputs are rejected") {
        REQUIRE_THROWS_AS(kl_divergence({0.5, 0.2}, {0.5, 0.5}), std::invalid_argument);
    }
}
