#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "edm/mdp.hpp"

namespace edm {

/// Entropy-regularized Q table: the fixed point of
///   (B Q)(s,a) = R(s,a) + gamma * E_T[ tau * logsumexp_a' Q(s',a')/tau ].
/// temperature defaults to 1 and is carried along so the inverse operator
/// stays consistent with the forward one.
struct SoftQ {
    std::vector<double> q;  // [s][a]
    std::size_t n_states = 0;
    std::size_t n_actions = 0;
    double gamma = 0.0;
    double temperature = 1.0;
    double residual = 0.0;

    double at(std::size_t s, std::size_t a) const { return q[s * n_actions + a]; }
    double& at(std::size_t s, std::size_t a) { return q[s * n_actions + a]; }

    /// Soft state value V(s) = tau * logsumexp_a Q(s,a)/tau.
    double value(std::size_t s) const {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < n_actions; ++a) mx = std::max(mx, at(s, a));
        double sum = 0.0;
        for (std::size_t a = 0; a < n_actions; ++a)
            sum += std::exp((at(s, a) - mx) / temperature);
        return mx + temperature * std::log(sum);
    }
};

/// One application of the soft Bellman operator to an arbitrary Q table.
inline SoftQ soft_bellman_apply(const TabularMdp& mdp, const std::vector<double>& reward,
                                const SoftQ& q) {
    SoftQ out = q;
    std::vector<double> values(mdp.n_states);
    for (std::size_t s = 0; s < mdp.n_states; ++s) values[s] = q.value(s);
    for (std::size_t s = 0; s < mdp.n_states; ++s)
        for (std::size_t a = 0; a < mdp.n_actions; ++a) {
            double cont = 0.0;
            for (std::size_t s2 = 0; s2 < mdp.n_states; ++s2) {
                const double p = mdp.t(s, a, s2);
                if (p != 0.0) cont += p * values[s2];
            }
            out.at(s, a) = reward[s * mdp.n_actions + a] + mdp.gamma * cont;
        }
    return out;
}

/// Iterates the soft Bellman backup to sup-norm residual <= tol.
inline SoftQ soft_value_iteration(const TabularMdp& mdp, const std::vector<double>& reward,
                                  double tol, std::size_t max_iters = 1000000,
                                  double temperature = 1.0) {
    if (!(mdp.gamma < 1.0)) throw std::invalid_argument("soft_value_iteration: gamma must be < 1");
    if (!(tol > 0.0)) throw std::invalid_argument("soft_value_iteration: tol must be positive");
    if (reward.size() != mdp.n_states * mdp.n_actions)
        throw std::invalid_argument("soft_value_iteration: reward table size mismatch");
    SoftQ q;
    q.q.assign(mdp.n_states * mdp.n_actions, 0.0);
    q.n_states = mdp.n_states;
    q.n_actions = mdp.n_actions;
    q.gamma = mdp.gamma;
    q.temperature = temperature;
    for (std::size_t it = 0; it < max_iters; ++it) {
        SoftQ next = soft_bellman_apply(mdp, reward, q);
        double residual = 0.0;
        for (std::size_t i = 0; i < q.q.size(); ++i)
            residual = std::max(residual, std::fabs(next.q[i] - q.q[i]));
        q = std::move(next);
        q.residual = residual;
        if (residual <= tol) return q;
    }
    throw std::runtime_error("soft_value_iteration: no convergence within " +
                             std::to_string(max_iters) + " iterations, residual " +
                             std::to_string(q.residual));
}

/// Softmax policy of a Q table: pi(a|s) = exp((Q(s,a) - V(s))/tau).
inline std::vector<double> soft_policy_from_q(const SoftQ& q) {
    std::vector<double> table(q.n_states * q.n_actions);
    for (std::size_t s = 0; s < q.n_states; ++s) {
        const double v = q.value(s);
        double sum = 0.0;
        for (std::size_t a = 0; a < q.n_actions; ++a) {
            table[s * q.n_actions + a] = std::exp((q.at(s, a) - v) / q.temperature);
            sum += table[s * q.n_actions + a];
        }
        for (std::size_t a = 0; a < q.n_actions; ++a) table[s * q.n_actions + a] /= sum;
    }
    return table;
}

/// The inverse soft Bellman operator:
///   (J Q)(s,a) = Q(s,a) - gamma * E_T[ tau * logsumexp Q(s',.)/tau ].
/// Bijective, so it recovers the unique reward whose soft-optimal Q is Q.
inline std::vector<double> inverse_bellman(const SoftQ& q, const TabularMdp& mdp) {
    if (q.n_states != mdp.n_states || q.n_actions != mdp.n_actions)
        throw std::invalid_argument("inverse_bellman: Q/MDP dimension mismatch");
    std::vector<double> values(mdp.n_states);
    for (std::size_t s = 0; s < mdp.n_states; ++s) values[s] = q.value(s);
    std::vector<double> reward(mdp.n_states * mdp.n_actions);
    for (std::size_t s = 0; s < mdp.n_states; ++s)
        for (std::size_t a = 0; a < mdp.n_actions; ++a) {
            double cont = 0.0;
            for (std::size_t s2 = 0; s2 < mdp.n_states; ++s2) {
                const double p = mdp.t(s, a, s2);
                if (p != 0.0) cont += p * values[s2];
            }
            reward[s * mdp.n_actions + a] = q.at(s, a) - mdp.gamma * cont;
        }
    return reward;
}

/// Dense linear solve by LU with partial pivoting; a is n x n row-major and
/// is consumed. Throws on a numerically singular pivot.
inline std::vector<double> lu_solve(std::vector<double> a, std::vector<double> b) {
    const std::size_t n = b.size();
    if (a.size() != n * n) throw std::invalid_argument("lu_solve: dimension mismatch");
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t pivot = k;
        double best = std::fabs(a[perm[k] * n + k]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::fabs(a[perm[i] * n + k]);
            if (v > best) {
                best = v;
                pivot = i;
            }
        }
        if (best < 1e-300) throw std::runtime_error("lu_solve: singular system");
        std::swap(perm[k], perm[pivot]);
        const double akk = a[perm[k] * n + k];
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a[perm[i] * n + k] / akk;
            a[perm[i] * n + k] = f;
            for (std::size_t j = k + 1; j < n; ++j) a[perm[i] * n + j] -= f * a[perm[k] * n + j];
        }
    }
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[perm[i]];
        for (std::size_t j = 0; j < i; ++j) s -= a[perm[i] * n + j] * y[j];
        y[i] = s;
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = y[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a[perm[i] * n + j] * x[j];
        x[i] = s / a[perm[i] * n + i];
    }
    return x;
}

/// Discounted visitation in the normalized convention (scaled by 1-gamma so
/// a terminal-free chain sums to 1). Terminal states carry zero occupancy;
/// the Bellman flow equation
///   rho^T = (1-gamma) mu0^T + gamma rho^T P_pi
/// is solved over non-terminal states by dense LU.
struct OccupancyMeasure {
    std::vector<double> state;         // rho(s)
    std::vector<double> state_action;  // rho(s,a) = rho(s) pi(a|s)
    bool normalized = true;
};

inline OccupancyMeasure exact_occupancy(const TabularMdp& mdp, const std::vector<double>& policy) {
    const std::size_t S = mdp.n_states, A = mdp.n_actions;
    if (policy.size() != S * A)
        throw std::invalid_argument("exact_occupancy: policy table size mismatch");
    for (std::size_t s = 0; s < S; ++s) {
        double sum = 0.0;
        for (std::size_t a = 0; a < A; ++a) {
            if (policy[s * A + a] < 0.0)
                throw std::invalid_argument("exact_occupancy: negative policy probability");
            sum += policy[s * A + a];
        }
        if (std::fabs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("exact_occupancy: policy row " + std::to_string(s) +
                                        " does not sum to 1");
    }
    std::vector<std::size_t> live;  // non-terminal state indices
    for (std::size_t s = 0; s < S; ++s)
        if (!mdp.is_terminal(s)) live.push_back(s);
    const std::size_t n = live.size();

    // System rows index the *target* state j: rho_j - gamma sum_i rho_i P(i,j) = (1-gamma) mu0_j.
    std::vector<double> mat(n * n, 0.0);
    std::vector<double> rhs(n);
    for (std::size_t jj = 0; jj < n; ++jj) {
        const std::size_t j = live[jj];
        rhs[jj] = (1.0 - mdp.gamma) * mdp.initial_dist[j];
        for (std::size_t ii = 0; ii < n; ++ii) {
            const std::size_t i = live[ii];
            double p = 0.0;
            for (std::size_t a = 0; a < A; ++a) p += policy[i * A + a] * mdp.t(i, a, j);
            mat[jj * n + ii] = (ii == jj ? 1.0 : 0.0) - mdp.gamma * p;
        }
    }
    const std::vector<double> rho_live = lu_solve(std::move(mat), std::move(rhs));

    OccupancyMeasure occ;
    occ.state.assign(S, 0.0);
    occ.state_action.assign(S * A, 0.0);
    for (std::size_t ii = 0; ii < n; ++ii) occ.state[live[ii]] = rho_live[ii];
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t a = 0; a < A; ++a) occ.state_action[s * A + a] = occ.state[s] * policy[s * A + a];
    return occ;
}

/// Max |rho^T - (1-gamma) mu0^T - gamma rho^T P_pi| over non-terminal states.
inline double flow_residual(const TabularMdp& mdp, const std::vector<double>& policy,
                            const OccupancyMeasure& occ) {
    double worst = 0.0;
    for (std::size_t j = 0; j < mdp.n_states; ++j) {
        if (mdp.is_terminal(j)) continue;
        double inflow = 0.0;
        for (std::size_t i = 0; i < mdp.n_states; ++i) {
            if (mdp.is_terminal(i)) continue;
            double p = 0.0;
            for (std::size_t a = 0; a < mdp.n_actions; ++a)
                p += policy[i * mdp.n_actions + a] * mdp.t(i, a, j);
            inflow += occ.state[i] * p;
        }
        const double res = occ.state[j] - (1.0 - mdp.gamma) * mdp.initial_dist[j] - mdp.gamma * inflow;
        worst = std::max(worst, std::fabs(res));
    }
    return worst;
}

/// KL(p || q) over matching supports, with 0 log 0 = 0. A support violation
/// (p > 0 where q = 0) reports infinite divergence.
inline double kl_divergence(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw std::invalid_argument("kl_divergence: size mismatch");
    double sp = 0.0, sq = 0.0;
    for (double v : p) sp += v;
    for (double v : q) sq += v;
    if (std::fabs(sp - 1.0) > 1e-6 || std::fabs(sq - 1.0) > 1e-6)
        throw std::invalid_argument("kl_divergence: inputs must be normalized");
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
        kl += p[i] * std::log(p[i] / q[i]);
    }
    return kl;
}

/// Expected undiscounted return of a policy under a horizon cap, by exact
/// finite-horizon backward recursion. Terminal states contribute nothing.
inline double policy_value_undiscounted(const TabularMdp& mdp, const std::vector<double>& policy,
                                        std::size_t horizon) {
    const std::size_t S = mdp.n_states, A = mdp.n_actions;
    std::vector<double> v(S, 0.0), next(S, 0.0);
    for (std::size_t h = 0; h < horizon; ++h) {
        for (std::size_t s = 0; s < S; ++s) {
            if (mdp.is_terminal(s)) {
                next[s] = 0.0;
                continue;
            }
            double acc = 0.0;
            for (std::size_t a = 0; a < A; ++a) {
                const double pa = policy[s * A + a];
                if (pa == 0.0) continue;
                double cont = 0.0;
                for (std::size_t s2 = 0; s2 < S; ++s2) {
                    const double p = mdp.t(s, a, s2);
                    if (p != 0.0) cont += p * v[s2];
                }
                acc += pa * (mdp.r(s, a) + cont);
            }
            next[s] = acc;
        }
        std::swap(v, next);
    }
    double total = 0.0;
    for (std::size_t s = 0; s < S; ++s) total += mdp.initial_dist[s] * v[s];
    return total;
}

/// Q and occupancy tables as CSV (state, action, value) for plotting.
inline void export_table_csv(const std::vector<double>& table, std::size_t n_states,
                             std::size_t n_actions, std::ostream& out) {
    out << "state,action,value\n";
    for (std::size_t s = 0; s < n_states; ++s)
        for (std::size_t a = 0; a < n_actions; ++a)
            out << s << "," << a << "," << g17(table[s * n_actions + a]) << "\n";
}

}  // namespace edm
