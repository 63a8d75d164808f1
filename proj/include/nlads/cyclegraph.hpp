#pragma once

// Regularity of a kernel family via its interaction cycles. The pairwise
// constraints c_i/c_j <= q_ij/d become the difference constraints
// x_j - x_i <= w_ij with w_ij = ln q_ij - ln d, which are feasible exactly
// when the constraint graph (plus a zero-weight virtual source) has no
// negative cycle. Bellman-Ford both decides this and, in the feasible
// case, yields the potentials x and hence c = exp(-x).

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "nlads/errors.hpp"

namespace nlads {

using Matrix = std::vector<std::vector<double>>;

struct RegularityProblem {
    int n = 0;
    double d = 1.0;  // spatial dimension; enters only through ln d
    Matrix q;        // q_ij in (1, inf)

    void validate() const {
        if (n < 1) throw ConfigError("regularity: N >= 1 required");
        if (!(d >= 1.0) || !std::isfinite(d)) throw ConfigError("regularity: d >= 1 required");
        if (static_cast<int>(q.size()) != n) throw ConfigError("regularity: Q must be N x N");
        for (const auto& row : q) {
            if (static_cast<int>(row.size()) != n) throw ConfigError("regularity: Q must be N x N");
            for (double v : row)
                if (!(v > 1.0) || !std::isfinite(v))
                    throw ConfigError("regularity: every q_ij must lie in (1, inf)");
        }
    }
};

struct RegularityReport {
    bool regular = false;
    std::optional<std::vector<int>> witness_cycle;  // i_1 -> ... -> i_n -> i_1, 0-based
    std::optional<std::vector<double>> c;           // c_i = exp(-x_i) >= 1
    std::optional<double> mu;
    std::optional<std::vector<double>> p;
    Matrix w;                                       // w_ij = ln q_ij - ln d
    std::optional<std::vector<double>> x;           // shortest-path potentials
};

struct SimpleCycle {
    std::vector<int> nodes;  // cycle i_1 -> ... -> i_n -> i_1
    double geo_mean;         // (q_{i1 i2} ... q_{in i1})^{1/n}
};

// Zero-weight cycles are treated as regular (non-strict inequality), so
// relaxations only count when they improve by more than this slack.
inline constexpr double kCycleTol = 1e-12;

inline Matrix build_weights(const RegularityProblem& prob) {
    prob.validate();
    Matrix w(prob.n, std::vector<double>(prob.n));
    const double logd = std::log(prob.d);
    for (int i = 0; i < prob.n; ++i)
        for (int j = 0; j < prob.n; ++j) w[i][j] = std::log(prob.q[i][j]) - logd;
    return w;
}

inline RegularityReport is_regular(const RegularityProblem& prob) {
    RegularityReport rep;
    rep.w = build_weights(prob);
    const int n = prob.n;

    // Virtual source with zero-weight edges to every node == start from
    // all-zero distances.
    std::vector<double> dist(n, 0.0);
    std::vector<int> pred(n, -1);
    for (int pass = 0; pass < n; ++pass) {
        bool relaxed = false;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (dist[i] + rep.w[i][j] < dist[j] - kCycleTol) {
                    dist[j] = dist[i] + rep.w[i][j];
                    pred[j] = i;
                    relaxed = true;
                }
            }
        }
        if (!relaxed) break;
    }

    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (dist[i] + rep.w[i][j] < dist[j] - kCycleTol) {
                // Still relaxable after n passes: walk predecessors back into
                // the negative cycle and read it off.
                int v = i;
                for (int step = 0; step < n; ++step) v = pred[v];
                std::vector<int> cycle;
                int u = v;
                do {
                    cycle.push_back(u);
                    u = pred[u];
                } while (u != v);
                std::reverse(cycle.begin(), cycle.end());
                rep.regular = false;
                rep.witness_cycle = cycle;
                return rep;
            }
        }
    }

    rep.regular = true;
    rep.x = dist;
    std::vector<double> c(n);
    for (int i = 0; i < n; ++i) c[i] = std::exp(-dist[i]);
    rep.c = c;
    return rep;
}

// Minimal mu such that P = (mu c - 2)/d + 1 satisfies p_i >= 2 and
// p_j >= max_i q_ij' for all j; with this P, d(p_i - 1) + 2 = mu c_i, so the
// energy-bound ratio condition is inherited from c.
inline std::pair<double, std::vector<double>> synthesize_mu_p(const RegularityReport& rep,
                                                              const RegularityProblem& prob) {
    if (!rep.regular || !rep.c) throw NotRegular("synthesize_P requires a regular report");
    const int n = prob.n;
    const auto& c = *rep.c;
    double mu = 0.0;
    for (int j = 0; j < n; ++j) {
        double bound = 2.0;  // p_j >= 2
        for (int i = 0; i < n; ++i) {
            const double qij = prob.q[i][j];
            bound = std::max(bound, qij / (qij - 1.0));  // p_j >= q_ij'
        }
        mu = std::max(mu, (prob.d * (bound - 1.0) + 2.0) / c[j]);
    }
    std::vector<double> p(n);
    for (int j = 0; j < n; ++j) p[j] = (mu * c[j] - 2.0) / prob.d + 1.0;
    return {mu, p};
}

inline std::vector<double> synthesize_P(const RegularityReport& rep, const RegularityProblem& prob) {
    return synthesize_mu_p(rep, prob).second;
}

// Brute-force oracle: all simple index cycles (self-loops included) with
// their geometric means. Cycles are canonicalised by their smallest node.
inline std::vector<SimpleCycle> enumerate_simple_cycles(const RegularityProblem& prob) {
    prob.validate();
    if (prob.n > 10) throw TooLarge("enumerate_simple_cycles: N <= 10 required");
    const int n = prob.n;
    std::vector<SimpleCycle> out;
    std::vector<int> path;
    std::vector<bool> on_path(n, false);

    auto mean_of = [&](const std::vector<int>& cyc) {
        double acc = 0.0;
        for (std::size_t k = 0; k < cyc.size(); ++k)
            acc += std::log(prob.q[cyc[k]][cyc[(k + 1) % cyc.size()]]);
        return std::exp(acc / static_cast<double>(cyc.size()));
    };

    // Enumerate cycles whose minimal node is `root` by DFS over nodes > root;
    // the graph is complete, so every node sequence closes into a cycle.
    auto dfs = [&](auto&& self, int root) -> void {
        for (int next = root; next < n; ++next) {
            if (next == root) {
                out.push_back({path, mean_of(path)});
                continue;
            }
            if (on_path[next]) continue;
            on_path[next] = true;
            path.push_back(next);
            self(self, root);
            path.pop_back();
            on_path[next] = false;
        }
    };

    for (int root = 0; root < n; ++root) {
        path = {root};
        std::fill(on_path.begin(), on_path.end(), false);
        on_path[root] = true;
        dfs(dfs, root);
    }
    return out;
}

// Fully populated report: verdict, potentials, and (when regular) mu and P.
inline RegularityReport analyze_regularity(const RegularityProblem& prob) {
    RegularityReport rep = is_regular(prob);
    if (rep.regular) {
        auto [mu, p] = synthesize_mu_p(rep, prob);
        rep.mu = mu;
        rep.p = p;
    }
    return rep;
}

}  // namespace nlads
