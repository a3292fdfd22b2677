#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"

#include "stopflow/bounds.hpp"
#include "stopflow/error.hpp"
#include "stopflow/exact.hpp"
#include "stopflow/observer.hpp"
#include "stopflow/oracle.hpp"
#include "stopflow/rng.hpp"
#include "stopflow/strategies.hpp"

namespace stopflow {

inline constexpr const char* kToolName = "stopflow";
inline constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitVerification = 2, kExitResource = 3 };

// ---------------------------------------------------------------------------
// Formatting helpers

/// Shortest round-trip decimal for a double, identical on every run.
inline std::string fmt_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    std::string s = buf;
    for (int prec = 1; prec < 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, x);
        if (std::strtod(buf, nullptr) == x) return buf;
    }
    return s;
}

/// Ordered key=value configuration, serialized into every output for provenance.
struct ExperimentConfig {
    std::vector<std::pair<std::string, std::string>> entries;

    void set(const std::string& key, const std::string& value) {
        for (auto& [k, v] : entries)
            if (k == key) {
                v = value;
                return;
            }
        entries.emplace_back(key, value);
    }

    std::string line() const {
        std::string out;
        for (const auto& [k, v] : entries) {
            if (!out.empty()) out += ' ';
            out += k + "=" + v;
        }
        return out;
    }

    nlohmann::ordered_json json() const {
        nlohmann::ordered_json j = nlohmann::ordered_json::object();
        for (const auto& [k, v] : entries) j[k] = v;
        return j;
    }
};

struct Provenance {
    std::string command_line;
    ExperimentConfig config;
    std::uint64_t seed = 0;

    std::string csv_preamble() const {
        std::string out;
        out += std::string("# tool=") + kToolName + " version=" + kToolVersion + "\n";
        out += "# command=" + command_line + "\n";
        out += "# seed=" + std::to_string(seed) + "\n";
        out += "# config: " + config.line() + "\n";
        return out;
    }

    nlohmann::ordered_json json() const {
        nlohmann::ordered_json j;
        j["tool"] = kToolName;
        j["version"] = kToolVersion;
        j["command"] = command_line;
        j["seed"] = seed;
        return j;
    }
};

// ---------------------------------------------------------------------------
// Simulation

/// Runs fn(i) for i in [0, count) over `threads` workers and returns how many were true.
/// The result does not depend on the thread count.
template <class F>
std::uint64_t parallel_count(std::uint64_t count, int threads, F&& fn) {
    threads = std::max(1, threads);
    if (threads == 1 || count < 2) {
        std::uint64_t hits = 0;
        for (std::uint64_t i = 0; i < count; ++i) hits += fn(i) ? 1 : 0;
        return hits;
    }
    std::vector<std::uint64_t> partial(static_cast<std::size_t>(threads), 0);
    std::vector<std::thread> pool;
    const std::uint64_t chunk = (count + threads - 1) / threads;
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            const std::uint64_t lo = chunk * w, hi = std::min(count, lo + chunk);
            std::uint64_t hits = 0;
            for (std::uint64_t i = lo; i < hi; ++i) hits += fn(i) ? 1 : 0;
            partial[w] = hits;
        });
    }
    for (auto& th : pool) th.join();
    std::uint64_t hits = 0;
    for (auto h : partial) hits += h;
    return hits;
}

struct SimulationReport {
    int n = 0;
    int k = 0;
    std::string strategy;
    std::uint64_t trials = 0;
    std::uint64_t wins = 0;
    double estimate = 0.0;
    double stderr_ = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::uint64_t seed = 0;
    double wall_time = 0.0; // seconds; excluded from determinism guarantees

    static SimulationReport from_counts(int n, int k, std::string strategy, std::uint64_t trials,
                                        std::uint64_t wins, std::uint64_t seed) {
        detail::require(trials >= 1, "simulation needs at least one trial");
        SimulationReport r;
        r.n = n;
        r.k = k;
        r.strategy = std::move(strategy);
        r.trials = trials;
        r.wins = wins;
        r.seed = seed;
        r.estimate = static_cast<double>(wins) / static_cast<double>(trials);
        r.stderr_ = std::sqrt(r.estimate * (1.0 - r.estimate) / static_cast<double>(trials));
        r.ci_lo = std::max(0.0, r.estimate - 1.96 * r.stderr_);
        r.ci_hi = std::min(1.0, r.estimate + 1.96 * r.stderr_);
        return r;
    }

    static std::string csv_header() { return "n,k,strategy,trials,wins,estimate,stderr,ci_lo,ci_hi,seed"; }

    std::string csv_row() const {
        return std::to_string(n) + "," + std::to_string(k) + "," + strategy + "," + std::to_string(trials) + "," +
               std::to_string(wins) + "," + fmt_double(estimate) + "," + fmt_double(stderr_) + "," +
               fmt_double(ci_lo) + "," + fmt_double(ci_hi) + "," + std::to_string(seed);
    }

    nlohmann::ordered_json json() const {
        nlohmann::ordered_json j;
        j["n"] = n;
        j["k"] = k;
        j["strategy"] = strategy;
        j["trials"] = trials;
        j["wins"] = wins;
        j["estimate"] = estimate;
        j["stderr"] = stderr_;
        j["ci_lo"] = ci_lo;
        j["ci_hi"] = ci_hi;
        j["seed"] = seed;
        j["wall_time"] = wall_time;
        return j;
    }

    std::string text() const {
        return "n=" + std::to_string(n) + " k=" + std::to_string(k) + " strategy=" + strategy +
               " trials=" + std::to_string(trials) + " wins=" + std::to_string(wins) +
               " estimate=" + fmt_double(estimate) + " stderr=" + fmt_double(stderr_) + " ci95=[" +
               fmt_double(ci_lo) + ", " + fmt_double(ci_hi) + "] seed=" + std::to_string(seed);
    }
};

inline std::string describe(const Strategy& s) {
    if (const auto* tp = std::get_if<TauPStar>(&s.kind)) return "tau_p_star(p=" + fmt_double(tp->p) + ")";
    if (const auto* ct = std::get_if<ClassicalThreshold>(&s.kind))
        return "classical_threshold(r=" + std::to_string(ct->r) + ")";
    return s.name();
}

/// Monte Carlo estimate of a strategy's win probability. Trial i draws its
/// arrival order (and coin seed) from trial_stream(seed, i).
inline SimulationReport simulate(const PathPower& g, const Strategy& s, std::uint64_t trials, std::uint64_t seed,
                                 int threads = 1) {
    detail::require(trials >= 1, "simulate: trials must be >= 1");
    const auto start = std::chrono::steady_clock::now();
    const auto wins = parallel_count(trials, threads, [&](std::uint64_t i) {
        auto rng = trial_stream(seed, i);
        const auto arrivals = random_arrivals(g.n(), rng);
        Strategy local = s;
        local.seed = rng();
        return run_strategy(local, g, arrivals).win;
    });
    auto report = SimulationReport::from_counts(g.n(), g.k(), describe(s), trials, wins, seed);
    report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

/// Monte Carlo mean of the continuous-time win indicator.
inline SimulationReport simulate_continuous(const PathPower& g, std::uint64_t trials, std::uint64_t seed,
                                            int threads = 1) {
    const auto start = std::chrono::steady_clock::now();
    const auto wins = parallel_count(trials, threads, [&](std::uint64_t i) {
        auto rng = trial_stream(seed, i);
        return continuous_win_indicator(g, sample_continuous_arrival(g.n(), rng));
    });
    auto report = SimulationReport::from_counts(g.n(), g.k(), "continuous_indicator", trials, wins, seed);
    report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

// ---------------------------------------------------------------------------
// Traces

struct TraceStep {
    Position arrived = 0;
    ObservationEvent event;
    std::vector<ComponentView> components;
};

struct Trace {
    PathPower graph;
    std::vector<TraceStep> steps;
    StopRecord stop;

    std::vector<int> b_sequence() const {
        std::vector<int> out;
        for (const auto& s : steps) out.push_back(s.event.b);
        return out;
    }
};

/// Replays an arrival order through the observer and marks where tau_n stops.
inline Trace trace_tau_n(const PathPower& g, std::span<const Position> arrivals, ObserverOptions opts = {}) {
    detail::require_permutation(g, arrivals);
    Trace tr{g, {}, {}};
    Observer obs(g, opts);
    const StopRule rule(Strategy::tau_n(), g.n());
    for (Position pos : arrivals) {
        TraceStep step;
        step.arrived = pos;
        step.event = obs.observe(pos);
        step.components = obs.components();
        tr.steps.push_back(std::move(step));
        const auto& ev = tr.steps.back().event;
        if (tr.stop.stop_index == 0 && (ev.t == g.n() || rule.should_stop(ev)))
            tr.stop = {ev.t, pos, g.is_sink(pos)};
    }
    return tr;
}

inline std::string format_components(const std::vector<ComponentView>& comps) {
    std::string out;
    for (const auto& c : comps) {
        out += "{";
        for (std::size_t i = 0; i < c.members.size(); ++i) {
            if (i) out += " ";
            out += "pi" + std::to_string(c.members[i].arrival) + "@+" + std::to_string(c.members[i].offset);
        }
        out += "}";
    }
    return out;
}

inline std::string trace_text(const Trace& tr) {
    std::ostringstream os;
    os << "n=" << tr.graph.n() << " k=" << tr.graph.k() << "\n";
    for (const auto& s : tr.steps) {
        const auto& e = s.event;
        os << "t=" << e.t << " arrived=v" << s.arrived << " c=" << e.c << " b=" << e.b << " slack=" << e.slack
           << " max=" << (e.is_max ? "yes" : "no") << " condition=" << (e.condition_met ? "yes" : "no")
           << " components=" << format_components(s.components);
        if (e.t == tr.stop.stop_index) os << "  <- stop";
        os << "\n";
    }
    os << "stop t=" << tr.stop.stop_index << " chosen=v" << tr.stop.chosen_position << " "
       << (tr.stop.win ? "WIN" : "LOSS") << "\n";
    return os.str();
}

inline nlohmann::ordered_json trace_json(const Trace& tr) {
    nlohmann::ordered_json j;
    j["n"] = tr.graph.n();
    j["k"] = tr.graph.k();
    auto steps = nlohmann::ordered_json::array();
    for (const auto& s : tr.steps) {
        nlohmann::ordered_json js;
        js["t"] = s.event.t;
        js["arrived"] = s.arrived;
        js["c"] = s.event.c;
        js["b"] = s.event.b;
        js["slack"] = s.event.slack;
        js["is_max"] = s.event.is_max;
        js["condition"] = s.event.condition_met;
        auto comps = nlohmann::ordered_json::array();
        for (const auto& c : s.components) {
            auto members = nlohmann::ordered_json::array();
            for (const auto& m : c.members) members.push_back({{"arrival", m.arrival}, {"offset", m.offset}});
            comps.push_back(members);
        }
        js["components"] = comps;
        steps.push_back(js);
    }
    j["steps"] = steps;
    j["stop"] = {{"t", tr.stop.stop_index}, {"chosen", tr.stop.chosen_position}, {"win", tr.stop.win}};
    return j;
}

/// Whitespace- or comma-separated 1-based vertex indices.
inline std::vector<Position> parse_permutation(const std::string& text) {
    std::string cleaned = text;
    std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
    std::istringstream is(cleaned);
    std::vector<Position> out;
    std::string tok;
    while (is >> tok) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(tok, &used);
        } catch (const std::exception&) {
            throw input_error("permutation: '" + tok + "' is not an integer");
        }
        if (used != tok.size()) throw input_error("permutation: '" + tok + "' is not an integer");
        out.push_back(v);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scaling

struct ScalingRow {
    int n = 0;
    int k = 0;
    bool skipped = false;
    std::string note;
    Rational exact = 0;
    double scaled = 0.0; // n^(1/(k+1)) * exact
    double upper = 0.0;
    std::optional<TauPLowerBound> lower;
    std::optional<Rational> k1_reduction;

    static std::string csv_header() {
        return "n,k,p_exact,scaled,upper_bound,lower_bound_tau_p,best_epsilon,k1_reduction,note";
    }

    std::string csv_row() const {
        if (skipped) return std::to_string(n) + "," + std::to_string(k) + ",,,,,,," + note;
        return std::to_string(n) + "," + std::to_string(k) + "," + to_decimal(exact) + "," + fmt_double(scaled) +
               "," + fmt_double(upper) + "," + (lower ? fmt_double(lower->bound) : "") + "," +
               (lower ? fmt_double(lower->epsilon) : "") + "," + (k1_reduction ? to_decimal(*k1_reduction) : "") +
               "," + note;
    }
};

inline ScalingRow scaling_row(int n, int k) {
    ScalingRow row;
    row.n = n;
    row.k = k;
    if (k < 1 || k >= n || n < 2) {
        row.skipped = true;
        row.note = "skipped: need 1 <= k < n";
        return row;
    }
    row.exact = success_probability_exact(n, k);
    row.scaled = std::pow(static_cast<double>(n), 1.0 / (k + 1)) * to_double(row.exact);
    row.upper = upper_bound(n, k);
    if (k < n - 2) row.lower = best_lower_bound_tau_p(n, k);
    else row.note = "k >= n-2: probability is exactly 1/2";
    if (k == 1) row.k1_reduction = success_probability_k1(n);
    return row;
}

/// "10..200" (with step), "10..200:10", "10,20,30" or "6".
inline std::vector<int> parse_grid(const std::string& text, int step = 1) {
    detail::require(step >= 1, "grid step must be >= 1");
    std::vector<int> out;
    auto to_int = [](const std::string& s) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(s, &used);
        } catch (const std::exception&) {
            throw input_error("grid: '" + s + "' is not an integer");
        }
        if (used != s.size()) throw input_error("grid: '" + s + "' is not an integer");
        return v;
    };
    if (const auto dots = text.find(".."); dots != std::string::npos) {
        std::string hi_part = text.substr(dots + 2);
        if (const auto colon = hi_part.find(':'); colon != std::string::npos) {
            step = to_int(hi_part.substr(colon + 1));
            detail::require(step >= 1, "grid step must be >= 1");
            hi_part = hi_part.substr(0, colon);
        }
        const int lo = to_int(text.substr(0, dots)), hi = to_int(hi_part);
        detail::require(lo <= hi, "grid: empty range " + text);
        for (int v = lo; v <= hi; v += step) out.push_back(v);
        return out;
    }
    std::string cleaned = text;
    std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
    std::istringstream is(cleaned);
    std::string tok;
    while (is >> tok) out.push_back(to_int(tok));
    detail::require(!out.empty(), "grid: no values in '" + text + "'");
    return out;
}

// ---------------------------------------------------------------------------
// Structural invariants and the verification suite

/// Exhaustive over all arrival orders: slack never negative, the stopping
/// condition persists once met, no maximal arrival after it is met, and b
/// agrees with a direct count of trapped holes. Returns the first violation.
inline std::optional<std::string> check_observer_invariants(int n, int k, ObserverOptions opts = {}) {
    const PathPower g(n, k);
    std::optional<std::string> failure;
    std::vector<char> arrived(static_cast<std::size_t>(n) + 1);
    detail::for_each_permutation(n, [&](std::span<const Position> perm) {
        if (failure) return;
        Observer obs(g, opts);
        std::fill(arrived.begin(), arrived.end(), 0);
        bool met = false;
        for (Position pos : perm) {
            const auto ev = obs.observe(pos);
            arrived[pos] = 1;
            auto where = [&] {
                std::string s = "n=" + std::to_string(n) + " k=" + std::to_string(k) + " t=" + std::to_string(ev.t) +
                                " perm=";
                for (Position p : perm) s += std::to_string(p) + " ";
                return s;
            };
            if (ev.slack < 0) {
                failure = "negative slack at " + where();
                return;
            }
            if (met && !ev.condition_met) {
                failure = "condition lost after being met at " + where();
                return;
            }
            if (met && ev.is_max) {
                failure = "maximal arrival after condition met at " + where();
                return;
            }
            // Holes lying between two arrived vertices of the same component.
            int holes = 0, last = 0;
            for (Position p = 1; p <= n; ++p) {
                if (!arrived[p]) continue;
                if (last != 0 && p - last <= k) holes += p - last - 1;
                last = p;
            }
            if (holes != ev.b) {
                failure = "b=" + std::to_string(ev.b) + " but " + std::to_string(holes) + " trapped holes at " + where();
                return;
            }
            met = met || ev.condition_met;
        }
    });
    return failure;
}

struct VerifyOptions {
    int n_max = 7;
    bool skip_dp = false;
    bool allow_large = false;
    int bounds_n_max = 60;
    ObserverOptions observer{}; // non-default only for harness self-tests
};

struct VerifyCheck {
    std::string name;
    bool pass = true;
    std::string detail;
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;

    bool pass() const {
        return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.pass; });
    }

    nlohmann::ordered_json json() const {
        nlohmann::ordered_json j;
        j["pass"] = pass();
        auto arr = nlohmann::ordered_json::array();
        for (const auto& c : checks) arr.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
        j["checks"] = arr;
        return j;
    }
};

inline const std::vector<Position>& figure_two_arrivals() {
    static const std::vector<Position> perm{2, 9, 4, 7, 3, 1, 5, 8, 6};
    return perm;
}

/// The oracle suite: closed form vs enumeration, closed form vs backward
/// induction, the 1/2 cases, the nine-vertex golden trace, the k = 1 and k = 2
/// reductions, the bound sandwich and the structural invariants.
inline VerifyReport run_verify(const VerifyOptions& opts) {
    detail::require(opts.n_max >= 2, "verify: n_max must be >= 2");
    detail::guard(opts.n_max, kEnumerationLimit, opts.allow_large, "verify");
    const OracleOptions oracle{opts.allow_large, opts.observer};
    VerifyReport rep;
    auto fail = [](VerifyCheck& c, std::string why) {
        if (c.pass) c.detail = std::move(why);
        c.pass = false;
    };

    {
        VerifyCheck c{"formula_equals_enumeration", true, ""};
        int cases = 0;
        for (int n = 2; n <= opts.n_max; ++n)
            for (int k = 1; k < n; ++k, ++cases) {
                const auto formula = success_probability_exact(n, k);
                const auto brute = brute_force_win_probability(n, k, Strategy::tau_n(), oracle);
                if (formula != brute)
                    fail(c, "n=" + std::to_string(n) + " k=" + std::to_string(k) + " formula=" + to_fraction(formula) +
                                " enumeration=" + to_fraction(brute));
            }
        if (c.pass) c.detail = std::to_string(cases) + " (n,k) pairs";
        rep.checks.push_back(c);
    }

    if (!opts.skip_dp) {
        VerifyCheck c{"dp_optimum_equals_formula", true, ""};
        const int top = std::min(opts.n_max, opts.allow_large ? opts.n_max : kDpLimit);
        int cases = 0;
        for (int n = 3; n <= top; ++n)
            for (int k = 1; k < n; ++k, ++cases) {
                const auto dp = dp_optimal_value(n, k, oracle).value;
                const auto formula = success_probability_exact(n, k);
                const auto brute = brute_force_win_probability(n, k, Strategy::tau_n(), oracle);
                if (dp != formula || dp != brute)
                    fail(c, "n=" + std::to_string(n) + " k=" + std::to_string(k) + " dp=" + to_fraction(dp) +
                                " formula=" + to_fraction(formula) + " tau_n=" + to_fraction(brute));
            }
        if (c.pass) c.detail = std::to_string(cases) + " (n,k) pairs";
        rep.checks.push_back(c);
    }

    {
        VerifyCheck c{"half_cases", true, ""};
        for (int n = 3; n <= opts.n_max; ++n)
            for (int k : {n - 1, n - 2}) {
                if (success_probability_exact(n, k) != Rational(1, 2))
                    fail(c, "exact(" + std::to_string(n) + "," + std::to_string(k) + ") != 1/2");
                if (brute_force_win_probability(n, k, Strategy::tau_n(), oracle) != Rational(1, 2))
                    fail(c, "enumeration(" + std::to_string(n) + "," + std::to_string(k) + ") != 1/2");
            }
        rep.checks.push_back(c);
    }

    {
        VerifyCheck c{"nine_vertex_trace", true, ""};
        const auto tr = trace_tau_n(PathPower(9, 2), figure_two_arrivals(), opts.observer);
        const std::vector<int> expected{0, 0, 1, 2, 1, 1, 2, 1, 0};
        if (tr.b_sequence() != expected) fail(c, "b-sequence mismatch");
        if (tr.stop.stop_index != 6 || !tr.stop.win) fail(c, "stop at t=" + std::to_string(tr.stop.stop_index));
        rep.checks.push_back(c);
    }

    {
        VerifyCheck c{"k1_k2_reductions", true, ""};
        for (int n = 3; n <= 40; ++n) {
            if (success_probability_k2(n) != success_probability_exact(n, 2))
                fail(c, "k=2 form differs at n=" + std::to_string(n));
            if (success_probability_k1(n) != success_probability_exact(n, 1))
                fail(c, "k=1 form differs at n=" + std::to_string(n));
        }
        rep.checks.push_back(c);
    }

    {
        VerifyCheck c{"bound_sandwich", true, ""};
        const double cap = 1.2879;
        for (int k = 1; k <= 3; ++k)
            for (int n = k + 3; n <= opts.bounds_n_max; ++n) {
                const auto row = scaling_row(n, k);
                const double p = to_double(row.exact);
                if (!(p < row.upper)) fail(c, "upper bound violated at n=" + std::to_string(n) + " k=" + std::to_string(k));
                if (row.lower && !(row.lower->bound <= p))
                    fail(c, "lower bound violated at n=" + std::to_string(n) + " k=" + std::to_string(k));
                if (!(row.scaled <= cap)) fail(c, "scaled value above 1.2879 at n=" + std::to_string(n));
            }
        rep.checks.push_back(c);
    }

    {
        VerifyCheck c{"observer_invariants", true, ""};
        for (int n = 2; n <= std::min(opts.n_max, 7) && c.pass; ++n)
            for (int k = 1; k < n && c.pass; ++k)
                if (auto bad = check_observer_invariants(n, k, opts.observer)) fail(c, *bad);
        rep.checks.push_back(c);
    }

    return rep;
}

} // namespace stopflow
