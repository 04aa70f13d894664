#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "edm/data.hpp"
#include "edm/policy.hpp"
#include "edm/rollout.hpp"
#include "edm/textio.hpp"

namespace edm {

struct ReturnStats {
    double mean = 0.0;
    double stderr_of_mean = 0.0;
    std::size_t n_episodes = 0;
};

/// Undiscounted average return over independently seeded live episodes.
template <typename Env>
ReturnStats average_return(const Env& env, const StochasticPolicy& policy, std::size_t n_episodes,
                           std::size_t horizon, std::uint64_t seed) {
    const auto trajs = rollout(env, policy, n_episodes, horizon, seed);
    ReturnStats out;
    out.n_episodes = n_episodes;
    bool all_equal = true;
    for (const Trajectory& t : trajs) {
        out.mean += t.undiscounted_return;
        all_equal = all_equal && t.undiscounted_return == trajs[0].undiscounted_return;
    }
    out.mean /= static_cast<double>(n_episodes);
    if (n_episodes > 1 && !all_equal) {  // identical returns have zero spread
        double ss = 0.0;
        for (const Trajectory& t : trajs) {
            const double d = t.undiscounted_return - out.mean;
            ss += d * d;
        }
        const double sd = std::sqrt(ss / static_cast<double>(n_episodes - 1));
        out.stderr_of_mean = sd / std::sqrt(static_cast<double>(n_episodes));
    }
    return out;
}

/// Affine rescaling so the demonstrator scores 1 and a random policy 0.
inline double scaled_return(double raw, const DatasetHeader& header) {
    const double span = header.demo_mean_return - header.random_mean_return;
    if (span == 0.0)
        throw std::invalid_argument("scaled_return: demonstrator and random references coincide");
    return (raw - header.random_mean_return) / span;
}

/// ROC area by the tie-grouped trapezoidal sweep. Equal scores are processed
/// as one block, which reproduces the Mann-Whitney statistic with ties
/// counted 1/2. Undefined (returns false) when a class is missing.
inline bool roc_auc(const std::vector<double>& scores, const std::vector<int>& labels,
                    double* auc_out) {
    const std::size_t n = scores.size();
    if (labels.size() != n) throw std::invalid_argument("roc_auc: size mismatch");
    std::size_t pos = 0;
    for (int l : labels) pos += l ? 1 : 0;
    const std::size_t neg = n - pos;
    if (pos == 0 || neg == 0) return false;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    double tp = 0.0, fp = 0.0, area = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        double dtp = 0.0, dfp = 0.0;
        while (j < n && scores[order[j]] == scores[order[i]]) {
            if (labels[order[j]]) dtp += 1.0;
            else dfp += 1.0;
            ++j;
        }
        area += dfp * (tp + (tp + dtp)) / 2.0;
        tp += dtp;
        fp += dfp;
        i = j;
    }
    *auc_out = area / (static_cast<double>(pos) * static_cast<double>(neg));
    return true;
}

/// Area under the precision-recall curve in average-precision form:
/// sum over distinct-score thresholds of (R_k - R_{k-1}) * P_k.
inline bool average_precision(const std::vector<double>& scores, const std::vector<int>& labels,
                              double* apr_out) {
    const std::size_t n = scores.size();
    if (labels.size() != n) throw std::invalid_argument("average_precision: size mismatch");
    std::size_t pos = 0;
    for (int l : labels) pos += l ? 1 : 0;
    if (pos == 0 || pos == n) return false;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    double tp = 0.0, fp = 0.0, ap = 0.0, prev_recall = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) {
            if (labels[order[j]]) tp += 1.0;
            else fp += 1.0;
            ++j;
        }
        const double recall = tp / static_cast<double>(pos);
        const double precision = tp / (tp + fp);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j;
    }
    *apr_out = ap;
    return true;
}

/// Action matching on held-out demonstrations. ACC breaks argmax ties toward
/// the lowest action index. For two actions, AUC/APR score the probability
/// of action 1; beyond two, macro one-vs-rest over classes present in the
/// data with both positives and negatives.
struct ActionMetrics {
    double acc = 0.0;
    double auc = 0.0;
    double apr = 0.0;
    bool auc_defined = false;
    bool apr_defined = false;
    std::size_t n_samples = 0;
};

inline ActionMetrics action_matching_metrics(const PolicyNet& net, const DemoDataset& heldout) {
    const auto transitions = heldout.all_transitions();
    if (transitions.empty())
        throw std::invalid_argument("action_matching_metrics: empty held-out set");
    const std::size_t n_actions = heldout.header.n_actions;
    ActionMetrics out;
    out.n_samples = transitions.size();

    std::vector<std::vector<double>> probs(transitions.size());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < transitions.size(); ++i) {
        probs[i] = net.action_probs(transitions[i].state);
        std::size_t best = 0;
        for (std::size_t a = 1; a < probs[i].size(); ++a)
            if (probs[i][a] > probs[i][best]) best = a;
        if (best == transitions[i].action) ++hits;
    }
    out.acc = static_cast<double>(hits) / static_cast<double>(transitions.size());

    auto one_vs_rest = [&](std::size_t cls, std::vector<double>& scores, std::vector<int>& labels) {
        scores.resize(transitions.size());
        labels.resize(transitions.size());
        for (std::size_t i = 0; i < transitions.size(); ++i) {
            scores[i] = probs[i][cls];
            labels[i] = transitions[i].action == cls ? 1 : 0;
        }
    };

    std::vector<double> scores;
    std::vector<int> labels;
    if (n_actions == 2) {
        one_vs_rest(1, scores, labels);
        out.auc_defined = roc_auc(scores, labels, &out.auc);
        out.apr_defined = average_precision(scores, labels, &out.apr);
    } else {
        double auc_sum = 0.0, apr_sum = 0.0;
        std::size_t auc_n = 0, apr_n = 0;
        for (std::size_t c = 0; c < n_actions; ++c) {
            one_vs_rest(c, scores, labels);
            double v;
            if (roc_auc(scores, labels, &v)) {
                auc_sum += v;
                ++auc_n;
            }
            if (average_precision(scores, labels, &v)) {
                apr_sum += v;
                ++apr_n;
            }
        }
        out.auc_defined = auc_n > 0;
        out.apr_defined = apr_n > 0;
        if (auc_n) out.auc = auc_sum / static_cast<double>(auc_n);
        if (apr_n) out.apr = apr_sum / static_cast<double>(apr_n);
    }
    return out;
}

/// One row of the evaluation CSV.
struct EvalReport {
    std::string algo;
    std::string env;
    std::size_t n_traj = 0;
    std::uint64_t seed = 0;
    double raw_return = 0.0;
    double stderr_of_mean = 0.0;
    double scaled = 0.0;
    bool has_returns = false;
    ActionMetrics actions;
    bool has_actions = false;
};

inline void write_eval_csv_header(std::ostream& out) {
    out << "algo,env,n_traj,seed,raw_return,stderr,scaled_return,acc,auc,apr\n";
}

inline void write_eval_csv_row(const EvalReport& r, std::ostream& out) {
    out << r.algo << "," << r.env << "," << r.n_traj << "," << r.seed << ",";
    if (r.has_returns)
        out << g17(r.raw_return) << "," << g17(r.stderr_of_mean) << "," << g17(r.scaled);
    else
        out << ",,";
    out << ",";
    if (r.has_actions) {
        out << g17(r.actions.acc) << ",";
        if (r.actions.auc_defined) out << g17(r.actions.auc);
        out << ",";
        if (r.actions.apr_defined) out << g17(r.actions.apr);
    } else {
        out << ",,";
    }
    out << "\n";
}

}  // namespace edm
