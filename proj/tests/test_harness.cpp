#include <gtest/gtest.h>

#include <string>

#include "stopflow/harness.hpp"

using namespace stopflow;

TEST(Simulation, SameSeedSameCountsAcrossThreadCounts) {
    const PathPower g(12, 2);
    for (const auto& s : {Strategy::tau_n(), Strategy::tau_p_star(0.6, 0), Strategy::classical_threshold(4)}) {
        const auto a = simulate(g, s, 20000, 99, 1);
        const auto b = simulate(g, s, 20000, 99, 4);
        const auto c = simulate(g, s, 20000, 99, 3);
        EXPECT_EQ(a.wins, b.wins);
        EXPECT_EQ(a.wins, c.wins);
        EXPECT_EQ(a.csv_row(), b.csv_row());
    }
    EXPECT_NE(simulate(g, Strategy::tau_n(), 20000, 1).wins, simulate(g, Strategy::tau_n(), 20000, 2).wins);
}

TEST(Simulation, EstimateNearExactValue) {
    const PathPower g(9, 2);
    const auto r = simulate(g, Strategy::tau_n(), 100000, 5, 2);
    const double exact = to_double(success_probability_exact(9, 2));
    EXPECT_NEAR(r.estimate, exact, 3 * r.stderr_);
    EXPECT_LE(r.ci_lo, r.estimate);
    EXPECT_GE(r.ci_hi, r.estimate);
}

TEST(Simulation, ReportFormats) {
    const auto r = SimulationReport::from_counts(9, 2, "tau_n", 4, 1, 7);
    EXPECT_EQ(SimulationReport::csv_header(), "n,k,strategy,trials,wins,estimate,stderr,ci_lo,ci_hi,seed");
    EXPECT_EQ(r.csv_row().substr(0, 22), "9,2,tau_n,4,1,0.25,0.2");
    EXPECT_EQ(r.json()["wins"], 1);
    EXPECT_THROW(SimulationReport::from_counts(9, 2, "tau_n", 0, 0, 7), input_error);
    EXPECT_EQ(describe(Strategy::tau_p_star(0.5, 1)), "tau_p_star(p=0.5)");
    EXPECT_EQ(describe(Strategy::classical_threshold(3)), "classical_threshold(r=3)");
}

TEST(Provenance, PreambleCarriesToolCommandSeedAndConfig) {
    ExperimentConfig cfg;
    cfg.set("n", "9");
    cfg.set("k", "2");
    const Provenance prov{"stopflow exact --n 9 --k 2", cfg, 4};
    const auto pre = prov.csv_preamble();
    EXPECT_NE(pre.find("# tool=stopflow"), std::string::npos);
    EXPECT_NE(pre.find("# command=stopflow exact --n 9 --k 2"), std::string::npos);
    EXPECT_NE(pre.find("# seed=4"), std::string::npos);
    EXPECT_NE(pre.find("n=9"), std::string::npos);
}

TEST(Parsing, Grids) {
    EXPECT_EQ(parse_grid("10..20:5"), (std::vector<int>{10, 15, 20}));
    EXPECT_EQ(parse_grid("3..6"), (std::vector<int>{3, 4, 5, 6}));
    EXPECT_EQ(parse_grid("3..9", 3), (std::vector<int>{3, 6, 9}));
    EXPECT_EQ(parse_grid("3,5, 8"), (std::vector<int>{3, 5, 8}));
    EXPECT_EQ(parse_grid("6"), (std::vector<int>{6}));
    EXPECT_THROW(parse_grid("x"), input_error);
    EXPECT_THROW(parse_grid("9..3"), input_error);
    EXPECT_THROW(parse_grid(""), input_error);
}

TEST(Parsing, Permutations) {
    EXPECT_EQ(parse_permutation("2 9 4,7"), (std::vector<Position>{2, 9, 4, 7}));
    EXPECT_THROW(parse_permutation("2 x"), input_error);
    EXPECT_THROW(parse_permutation("2 3.5"), input_error);
}

TEST(Trace, NineVertexRun) {
    const auto tr = trace_tau_n(PathPower(9, 2), figure_two_arrivals());
    EXPECT_EQ(tr.b_sequence(), (std::vector<int>{0, 0, 1, 2, 1, 1, 2, 1, 0}));
    EXPECT_EQ(tr.stop, (StopRecord{6, 1, true}));
    const auto text = trace_text(tr);
    EXPECT_NE(text.find("t=6 arrived=v1 c=2 b=1 slack=0 max=yes condition=yes"), std::string::npos) << text;
    EXPECT_NE(text.find("stop t=6 chosen=v1 WIN"), std::string::npos);
    const auto j = trace_json(tr);
    EXPECT_EQ(j["steps"].size(), 9u);
    EXPECT_EQ(j["stop"]["t"], 6);
}

TEST(Scaling, RowsAndSkips) {
    EXPECT_TRUE(scaling_row(3, 3).skipped);
    EXPECT_NE(scaling_row(3, 5).csv_row().find("skipped"), std::string::npos);
    const auto row = scaling_row(5, 2);
    EXPECT_FALSE(row.skipped);
    EXPECT_TRUE(row.lower.has_value());
    EXPECT_FALSE(scaling_row(6, 4).lower.has_value());
    EXPECT_EQ(row.csv_row().substr(0, 9), "5,2,0.45,");
    const auto r1 = scaling_row(20, 1);
    ASSERT_TRUE(r1.k1_reduction.has_value());
    EXPECT_EQ(*r1.k1_reduction, r1.exact);
    EXPECT_TRUE(r1.lower.has_value());
}

TEST(Verify, PassesAndCatchesInjectedFault) {
    VerifyOptions vo;
    vo.n_max = 6;
    vo.bounds_n_max = 30;
    const auto rep = run_verify(vo);
    EXPECT_TRUE(rep.pass()) << rep.json().dump(2);
    EXPECT_GE(rep.checks.size(), 7u);

    vo.observer.b_bias = 1;
    vo.skip_dp = true;
    EXPECT_FALSE(run_verify(vo).pass());

    vo.n_max = 10;
    EXPECT_THROW(run_verify(vo), resource_error);
}

TEST(Invariants, HoldExhaustively) {
    for (int n = 2; n <= 7; ++n)
        for (int k = 1; k < n; ++k) EXPECT_EQ(check_observer_invariants(n, k), std::nullopt) << n << "," << k;
}
