#include <gtest/gtest.h>

#include <algorithm>
#include <vector>

#include "stopflow/oracle.hpp"
#include "stopflow/strategies.hpp"
#include "support/oracles.hpp"

using namespace stopflow;

TEST(Strategies, TauNStopsAtSixOnTheNineVertexRun) {
    const std::vector<Position> perm{2, 9, 4, 7, 3, 1, 5, 8, 6};
    const auto rec = run_strategy(Strategy::tau_n(), PathPower(9, 2), perm);
    EXPECT_EQ(rec.stop_index, 6);
    EXPECT_EQ(rec.chosen_position, 1);
    EXPECT_TRUE(rec.win);
}

TEST(Strategies, TauNOnThreeVertexPathWithSinkFirst) {
    const std::vector<Position> perm{1, 2, 3};
    const auto rec = run_strategy(Strategy::tau_n(), PathPower(3, 1), perm);
    EXPECT_EQ(rec, (StopRecord{3, 3, false}));
}

TEST(Strategies, IdentityAndReversedOrders) {
    for (int n = 3; n <= 9; ++n)
        for (int k = 1; k < n; ++k) {
            std::vector<Position> id(n), rev(n);
            for (int i = 0; i < n; ++i) id[i] = i + 1, rev[i] = n - i;
            const auto a = run_strategy(Strategy::tau_n(), PathPower(n, k), id);
            EXPECT_EQ(a.stop_index, n);
            EXPECT_FALSE(a.win);
            const auto b = run_strategy(Strategy::tau_n(), PathPower(n, k), rev);
            EXPECT_EQ(b.stop_index, n);
            EXPECT_EQ(b.chosen_position, 1);
            EXPECT_TRUE(b.win);
        }
}

TEST(Strategies, TauPStarWithZeroProbabilityTakesFirstArrival) {
    const PathPower g(6, 2);
    for (std::uint64_t s = 0; s < 50; ++s) {
        const auto perm = oracles::random_permutation(6, s);
        const auto rec = run_strategy(Strategy::tau_p_star(0.0, s), g, perm);
        EXPECT_EQ(rec.stop_index, 1);
        EXPECT_EQ(rec.win, perm[0] == 1);
    }
    EXPECT_EQ(brute_force_win_probability(6, 2, Strategy::tau_p_star(0.0, 0)), Rational(1, 6));
}

TEST(Strategies, FirstMaxAndThresholdBaselines) {
    const std::vector<Position> perm{3, 2, 5, 1, 4};
    const PathPower g(5, 1);
    EXPECT_EQ(run_strategy(Strategy::first_max(), g, perm).stop_index, 1);
    // Skip 2, next maximal arrival: 5 at t=3 (no arrived vertex at 4).
    EXPECT_EQ(run_strategy(Strategy::classical_threshold(2), g, perm), (StopRecord{3, 5, false}));
    // Skip 3: 1 arrives at t=4 and is maximal.
    EXPECT_EQ(run_strategy(Strategy::classical_threshold(3), g, perm), (StopRecord{4, 1, true}));
    // Skipping everything forces the last arrival.
    EXPECT_EQ(run_strategy(Strategy::classical_threshold(9), g, perm).stop_index, 5);
    EXPECT_EQ(classical_cutoff(200), 73);
}

TEST(Strategies, WinOnlyWhenTopVertexPrecedesSinkForLargeK) {
    for (int n = 3; n <= 7; ++n)
        for (int k : {n - 2, n - 1}) {
            detail::for_each_permutation(n, [&](std::span<const Position> perm) {
                const auto rec = run_strategy(Strategy::tau_n(), PathPower(n, k), perm);
                const auto pos_n = std::find(perm.begin(), perm.end(), n) - perm.begin();
                const auto pos_1 = std::find(perm.begin(), perm.end(), 1) - perm.begin();
                ASSERT_EQ(rec.win, pos_n < pos_1);
            });
        }
}

TEST(Strategies, TauNNeverStopsEarlyOnNonMaximal) {
    for (int n = 2; n <= 7; ++n)
        for (int k = 1; k < n; ++k) {
            const PathPower g(n, k);
            detail::for_each_permutation(n, [&](std::span<const Position> perm) {
                const auto rec = run_strategy(Strategy::tau_n(), g, perm);
                if (rec.stop_index < n) {
                    Observer obs(g);
                    ObservationEvent ev;
                    for (int t = 0; t < rec.stop_index; ++t) ev = obs.observe(perm[t]);
                    ASSERT_TRUE(ev.is_max);
                }
            });
        }
}

TEST(Strategies, ReplayWithSameSeedIsIdentical) {
    const PathPower g(30, 3);
    for (std::uint64_t s = 0; s < 100; ++s) {
        const auto perm = oracles::random_permutation(30, s);
        const auto strat = Strategy::tau_p_star(0.6, s * 31 + 1);
        EXPECT_EQ(run_strategy(strat, g, perm), run_strategy(strat, g, perm));
        EXPECT_EQ(StopRule(strat, 30).skip(), StopRule(strat, 30).skip());
    }
}

TEST(Strategies, RejectsNonPermutations) {
    const PathPower g(4, 2);
    EXPECT_THROW(run_strategy(Strategy::tau_n(), g, std::vector<Position>{1, 2, 3}), input_error);
    EXPECT_THROW(run_strategy(Strategy::tau_n(), g, std::vector<Position>{1, 2, 2, 4}), input_error);
    EXPECT_THROW(run_strategy(Strategy::tau_n(), g, std::vector<Position>{1, 2, 3, 5}), input_error);
    EXPECT_THROW(Strategy::tau_p_star(1.5, 0), input_error);
    EXPECT_THROW(Strategy::classical_threshold(-1), input_error);
}

TEST(Strategies, HalfForTheTwoLargestPowers) {
    for (int n = 3; n <= 8; ++n) {
        EXPECT_EQ(brute_force_win_probability(n, n - 1, Strategy::tau_n()), Rational(1, 2)) << n;
        EXPECT_EQ(brute_force_win_probability(n, n - 2, Strategy::tau_n()), Rational(1, 2)) << n;
    }
}

// No threshold rule, first_max, or tau_p_star on a p grid beats tau_n.
TEST(Strategies, TauNDominatesBaselineFamily) {
    for (int n = 3; n <= 7; ++n)
        for (int k = 1; k < n; ++k) {
            const auto best = brute_force_win_probability(n, k, Strategy::tau_n());
            EXPECT_LE(brute_force_win_probability(n, k, Strategy::first_max()), best);
            for (int r = 0; r <= n; ++r)
                EXPECT_LE(brute_force_win_probability(n, k, Strategy::classical_threshold(r)), best);
            for (int i = 0; i <= 10; ++i)
                EXPECT_LE(brute_force_win_probability(n, k, Strategy::tau_p_star(i / 10.0, 0)), best);
        }
}
