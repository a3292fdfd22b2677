#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "stopflow/error.hpp"
#include "stopflow/exact.hpp"
#include "stopflow/observer.hpp"
#include "stopflow/path_power.hpp"
#include "stopflow/rng.hpp"
#include "stopflow/strategies.hpp"

namespace stopflow {

inline constexpr int kEnumerationLimit = 9;
inline constexpr int kDpLimit = 7;

struct OracleOptions {
    bool allow_large = false; // lift the desk-scale guards
    ObserverOptions observer{};
};

namespace detail {

inline void guard(int n, int limit, bool allow_large, const char* what) {
    if (!allow_large && n > limit)
        throw resource_error(std::string(what) + ": n=" + std::to_string(n) + " exceeds the limit of " +
                             std::to_string(limit) + " (pass allow_large to override)");
}

/// Calls f(perm) for every permutation of 1..n in lexicographic order.
template <class F>
void for_each_permutation(int n, F&& f) {
    std::vector<Position> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 1);
    do {
        f(std::span<const Position>(perm));
    } while (std::next_permutation(perm.begin(), perm.end()));
}

inline BigInt factorial(int n) {
    BigInt f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

} // namespace detail

/// wins[r] = number of arrival orders on which "skip r, then take the first
/// maximal arrival" picks the sink, for r = 0..n.
inline std::vector<BigInt> threshold_win_counts(int n, int k, const OracleOptions& opts = {}) {
    const PathPower g(n, k);
    detail::guard(n, kEnumerationLimit, opts.allow_large, "threshold_win_counts");
    std::vector<BigInt> wins(static_cast<std::size_t>(n) + 1, 0);
    std::vector<char> is_max(static_cast<std::size_t>(n) + 1, 0);
    detail::for_each_permutation(n, [&](std::span<const Position> perm) {
        Observer obs(g, opts.observer);
        for (Position p : perm) {
            const auto ev = obs.observe(p);
            is_max[ev.t] = ev.is_max;
        }
        for (int r = 0; r <= n; ++r) {
            int t = r + 1;
            while (t < n && !is_max[t]) ++t;
            if (t > n) t = n;
            if (perm[t - 1] == 1) ++wins[r];
        }
    });
    return wins;
}

/// Exact win probability under uniformly random arrivals, by enumerating all n! orders.
/// tau_p_star is evaluated by mixing threshold strategies over M ~ Binomial(n, p) exactly.
inline Rational brute_force_win_probability(int n, int k, const Strategy& s, const OracleOptions& opts = {}) {
    const PathPower g(n, k);
    detail::guard(n, kEnumerationLimit, opts.allow_large, "brute_force_win_probability");
    const BigInt total = detail::factorial(n);

    if (const auto* tp = std::get_if<TauPStar>(&s.kind)) {
        const auto wins = threshold_win_counts(n, k, opts);
        const Rational p(tp->p); // exact value of the double
        const Rational q = Rational(1) - p;
        const BinomialTable binom(n);
        Rational out = 0;
        for (int m = 0; m <= n; ++m) {
            Rational weight = binom(n, m);
            for (int i = 0; i < m; ++i) weight *= p;
            for (int i = m; i < n; ++i) weight *= q;
            out += weight * Rational(wins[m], total);
        }
        return out;
    }

    BigInt wins = 0;
    detail::for_each_permutation(n, [&](std::span<const Position> perm) {
        if (run_strategy(s, g, perm, opts.observer).win) ++wins;
    });
    return Rational(wins, total);
}

/// Canonical form of what the selector has seen after a prefix of arrivals:
/// per component, (arrival index, offset from lowest vertex) pairs; components
/// ordered by first arrival. Absolute placement is quotiented out.
using InfoStateKey = std::vector<int>;

inline InfoStateKey info_state_key(const PathPower& g, std::span<const Position> prefix) {
    std::vector<std::pair<Position, int>> arrived; // (position, arrival index)
    arrived.reserve(prefix.size());
    for (std::size_t i = 0; i < prefix.size(); ++i) arrived.emplace_back(prefix[i], static_cast<int>(i) + 1);
    std::sort(arrived.begin(), arrived.end());

    std::vector<std::vector<std::pair<int, int>>> comps; // (arrival, offset)
    Position lo = 0;
    for (std::size_t i = 0; i < arrived.size(); ++i) {
        if (i == 0 || arrived[i].first - arrived[i - 1].first > g.k()) {
            comps.emplace_back();
            lo = arrived[i].first;
        }
        comps.back().emplace_back(arrived[i].second, arrived[i].first - lo);
    }
    for (auto& c : comps) std::sort(c.begin(), c.end());
    std::sort(comps.begin(), comps.end());

    InfoStateKey key;
    for (const auto& c : comps) {
        for (const auto& [arrival, offset] : c) {
            key.push_back(arrival);
            key.push_back(offset);
        }
        key.push_back(-1);
    }
    return key;
}

/// One information state met by the backward induction.
struct InfoStateSummary {
    int t = 0;
    int c = 0;
    int b = 0;
    bool last_is_max = false;
    BigInt prefixes = 0;         // arrival prefixes in this state
    Rational p_current_sink = 0; // P[newest arrival is the sink | state]
    Rational value = 0;          // optimal value from here on
};

struct DpResult {
    Rational value = 0;
    std::vector<InfoStateSummary> states;
};

/// Optimal stopping value over all rules adapted to the distance-labelled
/// observations, by exact backward induction. Transition and stop
/// probabilities come from counting compatible arrival prefixes.
inline DpResult dp_optimal_value(int n, int k, const OracleOptions& opts = {}) {
    const PathPower g(n, k);
    detail::guard(n, kDpLimit, opts.allow_large, "dp_optimal_value");

    struct Node {
        InfoStateSummary info;
        std::map<int, std::int64_t> next; // child state id -> number of one-step extensions
    };
    std::vector<std::map<InfoStateKey, int>> ids(static_cast<std::size_t>(n) + 1);
    std::vector<std::vector<Node>> levels(static_cast<std::size_t>(n) + 1);

    auto state_of = [&](std::span<const Position> prefix) -> int {
        const int t = static_cast<int>(prefix.size());
        auto [it, inserted] = ids[t].try_emplace(info_state_key(g, prefix), static_cast<int>(levels[t].size()));
        if (inserted) {
            Node node;
            node.info.t = t;
            // Component count and inner holes straight from the sorted prefix.
            std::vector<Position> sorted(prefix.begin(), prefix.end());
            std::sort(sorted.begin(), sorted.end());
            int c = 0, b = 0;
            for (std::size_t i = 0; i < sorted.size(); ++i) {
                if (i == 0 || sorted[i] - sorted[i - 1] > k) ++c;
                else b += sorted[i] - sorted[i - 1] - 1;
            }
            node.info.c = c;
            node.info.b = b;
            const Position last = prefix.back();
            node.info.last_is_max =
                std::none_of(prefix.begin(), prefix.end(), [&](Position q) { return last - q > 0 && last - q <= k; });
            levels[t].push_back(std::move(node));
        }
        return it->second;
    };

    std::vector<Position> prefix;
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    auto dfs = [&](auto&& self, int parent) -> void {
        const int t = static_cast<int>(prefix.size());
        for (Position q = 1; q <= n; ++q) {
            if (used[q]) continue;
            used[q] = 1;
            prefix.push_back(q);
            const int child = state_of(prefix);
            auto& node = levels[t + 1][child];
            node.info.prefixes += 1;
            if (q == 1) node.info.p_current_sink += 1; // raw count for now
            if (parent >= 0) ++levels[t][parent].next[child];
            if (t + 1 < n) self(self, child);
            prefix.pop_back();
            used[q] = 0;
        }
    };
    dfs(dfs, -1);

    for (int t = n; t >= 1; --t) {
        for (auto& node : levels[t]) {
            auto& info = node.info;
            info.p_current_sink = info.p_current_sink / Rational(info.prefixes);
            if (t == n) {
                info.value = info.p_current_sink;
                continue;
            }
            Rational cont = 0;
            for (const auto& [child, count] : node.next) cont += Rational(count) * levels[t + 1][child].info.value;
            cont /= Rational(info.prefixes * (n - t));
            info.value = std::max(info.p_current_sink, cont);
        }
    }

    DpResult out;
    for (const auto& node : levels[1]) out.value += Rational(node.info.prefixes, n) * node.info.value;
    for (int t = 1; t <= n; ++t)
        for (auto& node : levels[t]) out.states.push_back(std::move(node.info));
    return out;
}

/// Arrival times A_1..A_n in [0, 1]; position i arrives at times[i-1].
struct ContinuousArrival {
    std::vector<double> times;

    double sink_time() const { return times.at(0); }

    /// Arrival order induced by the times; ties go to the lower position.
    std::vector<Position> arrival_order() const {
        std::vector<Position> order(times.size());
        std::iota(order.begin(), order.end(), 1);
        std::stable_sort(order.begin(), order.end(),
                         [&](Position a, Position b) { return times[a - 1] < times[b - 1]; });
        return order;
    }
};

template <class Rng>
ContinuousArrival sample_continuous_arrival(int n, Rng& rng) {
    ContinuousArrival arr;
    arr.times.resize(static_cast<std::size_t>(n));
    for (auto& a : arr.times) a = uniform01(rng);
    return arr;
}

/// X = sum of X_i over 1 <= i <= n-k-2, where X_i = 1 iff all of
/// v_{i+1}..v_{i+k+1} arrive after the sink.
inline int late_window_count(const PathPower& g, const ContinuousArrival& arr) {
    const int n = g.n(), k = g.k();
    detail::require(static_cast<int>(arr.times.size()) == n, "late_window_count: need n arrival times");
    const auto& A = arr.times;
    const double p = A[0];
    int x = 0;
    for (int i = 1; i <= n - k - 2; ++i) {
        bool late = true;
        for (int j = i + 1; j <= i + k + 1 && late; ++j) late = A[j - 1] > p;
        x += late ? 1 : 0;
    }
    return x;
}

/// tau_n wins iff X = 0 and v_n arrives before the sink.
inline bool continuous_win_indicator(const PathPower& g, const ContinuousArrival& arr) {
    detail::require(g.k() < g.n() - 2, "continuous_win_indicator: need k < n - 2");
    detail::require(static_cast<int>(arr.times.size()) == g.n(), "continuous_win_indicator: need n arrival times");
    return arr.times.back() < arr.sink_time() && late_window_count(g, arr) == 0;
}

/// The set {pi_1, ..., pi_M} for a uniform arrival order and M ~ Binomial(n, p):
/// each position lands in it independently with probability p.
inline std::vector<Position> sample_prefix_membership(int n, double p, std::uint64_t seed) {
    detail::require(n >= 1, "sample_prefix_membership: need n >= 1");
    detail::require(p >= 0.0 && p <= 1.0, "sample_prefix_membership: p must lie in [0, 1]");
    SplitMix64 rng(seed);
    const int m = binomial_flips(n, p, rng);
    auto order = random_arrivals(n, rng);
    order.resize(static_cast<std::size_t>(m));
    std::sort(order.begin(), order.end());
    return order;
}

} // namespace stopflow
