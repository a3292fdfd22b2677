#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "stopflow/error.hpp"
#include "stopflow/observer.hpp"
#include "stopflow/path_power.hpp"
#include "stopflow/rng.hpp"

namespace stopflow {

/// Optimal rule when edge distances are visible: first maximal arrival once slack is zero.
struct TauN {
    friend bool operator==(TauN, TauN) = default;
};

/// Reject Binomial(n, p) arrivals, then take the first maximal one. Ignores distances.
struct TauPStar {
    double p = 0.0;
    friend bool operator==(TauPStar, TauPStar) = default;
};

/// Reject the first r arrivals, then take the first maximal one.
struct ClassicalThreshold {
    int r = 0;
    friend bool operator==(ClassicalThreshold, ClassicalThreshold) = default;
};

/// Always takes the first arrival.
struct FirstMax {
    friend bool operator==(FirstMax, FirstMax) = default;
};

using StrategyKind = std::variant<TauN, TauPStar, ClassicalThreshold, FirstMax>;

struct Strategy {
    StrategyKind kind = TauN{};
    std::uint64_t seed = 0; // consumed only by TauPStar

    static Strategy tau_n() { return {TauN{}, 0}; }
    static Strategy tau_p_star(double p, std::uint64_t seed) {
        detail::require(p >= 0.0 && p <= 1.0, "tau_p_star: p must lie in [0, 1]");
        return {TauPStar{p}, seed};
    }
    static Strategy classical_threshold(int r) {
        detail::require(r >= 0, "classical_threshold: r must be >= 0");
        return {ClassicalThreshold{r}, 0};
    }
    static Strategy first_max() { return {FirstMax{}, 0}; }

    bool randomized() const noexcept { return std::holds_alternative<TauPStar>(kind); }

    std::string name() const {
        return std::visit(
            [](const auto& s) -> std::string {
                using S = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<S, TauN>) return "tau_n";
                else if constexpr (std::is_same_v<S, TauPStar>) return "tau_p_star";
                else if constexpr (std::is_same_v<S, ClassicalThreshold>) return "classical_threshold";
                else return "first_max";
            },
            kind);
    }

    friend bool operator==(const Strategy&, const Strategy&) = default;
};

/// r = floor(n / e), the classical secretary cutoff.
inline int classical_cutoff(int n) {
    return static_cast<int>(std::floor(static_cast<double>(n) / std::exp(1.0)));
}

struct StopRecord {
    int stop_index = 0;
    Position chosen_position = 0;
    bool win = false;
    friend bool operator==(const StopRecord&, const StopRecord&) = default;
};

/// Per-run decision state. Sees only observation events.
class StopRule {
public:
    StopRule(const Strategy& s, int n) : kind_(s.kind) {
        if (const auto* tp = std::get_if<TauPStar>(&kind_)) {
            SplitMix64 coin(s.seed);
            skip_ = binomial_flips(n, tp->p, coin);
        } else if (const auto* ct = std::get_if<ClassicalThreshold>(&kind_)) {
            skip_ = ct->r;
        }
    }

    /// Number of arrivals rejected outright (M for tau_p_star, r for thresholds).
    int skip() const noexcept { return skip_; }

    bool should_stop(const ObservationEvent& ev) const {
        return std::visit(
            [&](const auto& s) -> bool {
                using S = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<S, TauN>) return ev.condition_met && ev.is_max;
                else if constexpr (std::is_same_v<S, FirstMax>) return ev.t == 1;
                else return ev.t > skip_ && ev.is_max;
            },
            kind_);
    }

private:
    StrategyKind kind_;
    int skip_ = 0;
};

namespace detail {

inline void require_permutation(const PathPower& g, std::span<const Position> arrivals) {
    require(static_cast<int>(arrivals.size()) == g.n(),
            "arrival sequence has " + std::to_string(arrivals.size()) + " entries, expected " +
                std::to_string(g.n()));
    std::vector<char> seen(static_cast<std::size_t>(g.n()) + 1, 0);
    for (Position p : arrivals) {
        require(g.contains(p), "arrival sequence: position " + std::to_string(p) + " out of range");
        require(!seen[p], "arrival sequence: position " + std::to_string(p) + " repeated");
        seen[p] = 1;
    }
}

} // namespace detail

/// Plays one strategy against one arrival order. Never stopping means stopping at n.
inline StopRecord run_strategy(const Strategy& s, const PathPower& g,
                               std::span<const Position> arrivals, ObserverOptions opts = {}) {
    detail::require_permutation(g, arrivals);
    Observer obs(g, opts);
    StopRule rule(s, g.n());
    for (Position pos : arrivals) {
        const auto ev = obs.observe(pos);
        if (ev.t == g.n() || rule.should_stop(ev))
            return {ev.t, pos, g.is_sink(pos)};
    }
    return {}; // unreachable for a valid permutation
}

} // namespace stopflow
