#include <gtest/gtest.h>

#include <map>
#include <vector>

#include "stopflow/exact.hpp"
#include "stopflow/oracle.hpp"
#include "support/oracles.hpp"

using namespace stopflow;

TEST(Oracle, FormulaEqualsEnumeration) {
    for (int n = 2; n <= 8; ++n)
        for (int k = 1; k < n; ++k)
            EXPECT_EQ(brute_force_win_probability(n, k, Strategy::tau_n()), success_probability_exact(n, k))
                << n << "," << k;
}

TEST(Oracle, BackwardInductionEqualsFormula) {
    for (int n = 3; n <= 7; ++n)
        for (int k = 1; k < n; ++k)
            EXPECT_EQ(dp_optimal_value(n, k).value, success_probability_exact(n, k)) << n << "," << k;
}

TEST(Oracle, StateSinkProbabilityMatchesClosedForm) {
    for (int n = 3; n <= 7; ++n)
        for (int k = 1; k < n; ++k)
            for (const auto& s : dp_optimal_value(n, k).states) {
                if (s.last_is_max)
                    ASSERT_EQ(s.p_current_sink, conditional_success(n, k, s.t, s.c, s.b))
                        << n << "," << k << " t=" << s.t << " c=" << s.c << " b=" << s.b;
                else
                    ASSERT_EQ(s.p_current_sink, 0);
            }
}

// Two prefixes share a key exactly when their labelled induced graphs agree.
TEST(Oracle, InfoStateKeyMatchesLabelledGraph) {
    for (int n = 2; n <= 6; ++n)
        for (int k = 1; k < n; ++k) {
            const PathPower g(n, k);
            std::map<InfoStateKey, std::vector<int>> by_key;
            std::map<std::vector<int>, InfoStateKey> by_sig;
            detail::for_each_permutation(n, [&](std::span<const Position> perm) {
                for (int t = 1; t <= n; ++t) {
                    const std::vector<Position> prefix(perm.begin(), perm.begin() + t);
                    auto key = info_state_key(g, prefix);
                    auto sig = oracles::labelled_graph_signature(g, prefix);
                    sig.insert(sig.begin(), t);
                    const auto [a, new_key] = by_key.try_emplace(key, sig);
                    const auto [b, new_sig] = by_sig.try_emplace(sig, key);
                    ASSERT_EQ(a->second, sig);
                    ASSERT_EQ(b->second, key);
                }
            });
        }
}

TEST(Oracle, GuardsRaiseResourceErrors) {
    EXPECT_THROW(brute_force_win_probability(10, 2, Strategy::tau_n()), resource_error);
    EXPECT_THROW(threshold_win_counts(10, 2), resource_error);
    EXPECT_THROW(dp_optimal_value(8, 2), resource_error);
}

TEST(Oracle, BaselineValues) {
    EXPECT_EQ(brute_force_win_probability(3, 1, Strategy::first_max()), Rational(1, 3));
    // Skipping all but the last arrival wins exactly when the sink arrives last.
    EXPECT_EQ(brute_force_win_probability(6, 2, Strategy::classical_threshold(5)), Rational(1, 6));
    // p = 1 skips everything.
    EXPECT_EQ(brute_force_win_probability(6, 2, Strategy::tau_p_star(1.0, 0)), Rational(1, 6));
}

TEST(Oracle, TauPStarMixesThresholdsBinomially) {
    const int n = 6, k = 2;
    const auto wins = threshold_win_counts(n, k);
    Rational expect = 0;
    const BinomialTable b(n);
    for (int m = 0; m <= n; ++m) expect += Rational(b(n, m), 64) * Rational(wins[m], 720);
    EXPECT_EQ(brute_force_win_probability(n, k, Strategy::tau_p_star(0.5, 0)), expect);
    for (int r = 0; r <= n; ++r)
        EXPECT_EQ(Rational(wins[r], 720), brute_force_win_probability(n, k, Strategy::classical_threshold(r)));
}

// Rank-valued arrival times reproduce the discrete order; the indicator must
// agree with tau_n on every order.
TEST(Continuous, IndicatorAgreesWithDiscreteRun) {
    for (int n = 4; n <= 8; ++n)
        for (int k = 1; k < n - 2; ++k) {
            const PathPower g(n, k);
            detail::for_each_permutation(n, [&](std::span<const Position> perm) {
                ContinuousArrival arr;
                arr.times.assign(static_cast<std::size_t>(n), 0.0);
                for (int t = 0; t < n; ++t) arr.times[perm[t] - 1] = (t + 1.0) / (n + 1.0);
                ASSERT_EQ(arr.arrival_order(), std::vector<Position>(perm.begin(), perm.end()));
                ASSERT_EQ(continuous_win_indicator(g, arr), run_strategy(Strategy::tau_n(), g, perm).win);
            });
        }
}

TEST(Continuous, IndicatorExamples) {
    const PathPower g(6, 2);
    ContinuousArrival arr{{0.5, 0.2, 0.2, 0.2, 0.2, 0.1}};
    EXPECT_EQ(late_window_count(g, arr), 0);
    EXPECT_TRUE(continuous_win_indicator(g, arr));

    arr.times = {0.5, 0.9, 0.9, 0.9, 0.2, 0.1};
    EXPECT_EQ(late_window_count(g, arr), 1);
    EXPECT_FALSE(continuous_win_indicator(g, arr));

    arr.times = {0.5, 0.9, 0.9, 0.9, 0.9, 0.1};
    EXPECT_EQ(late_window_count(g, arr), 2);

    arr.times = {0.5, 0.2, 0.2, 0.2, 0.2, 0.9};
    EXPECT_FALSE(continuous_win_indicator(g, arr));

    EXPECT_THROW(continuous_win_indicator(PathPower(6, 4), arr), input_error);
    EXPECT_THROW(late_window_count(PathPower(7, 2), arr), input_error);
}

TEST(PrefixMembership, EdgeProbabilities) {
    EXPECT_TRUE(sample_prefix_membership(10, 0.0, 3).empty());
    EXPECT_EQ(sample_prefix_membership(5, 1.0, 3), (std::vector<Position>{1, 2, 3, 4, 5}));
    EXPECT_THROW(sample_prefix_membership(5, 1.5, 3), input_error);
}

TEST(PrefixMembership, EachPositionIndependentWithProbabilityP) {
    const int n = 10, draws = 100000;
    const double p = 0.3;
    std::vector<int> hits(n + 1, 0);
    int pair_hits = 0;
    for (int i = 0; i < draws; ++i) {
        const auto s = sample_prefix_membership(n, p, 1000 + i);
        for (Position q : s) ++hits[q];
        const bool a = std::find(s.begin(), s.end(), 1) != s.end();
        const bool b = std::find(s.begin(), s.end(), n) != s.end();
        pair_hits += (a && b) ? 1 : 0;
    }
    const double sd = std::sqrt(p * (1 - p) / draws);
    for (int q = 1; q <= n; ++q) EXPECT_NEAR(hits[q] / double(draws), p, 4 * sd) << q;
    const double sd2 = std::sqrt(p * p * (1 - p * p) / draws);
    EXPECT_NEAR(pair_hits / double(draws), p * p, 4 * sd2);
}
