// Compares tau_n with the distance-blind and classical baselines on one graph.
//
//   ./compare_strategies [n] [k] [trials]

#include <cmath>
#include <cstdlib>
#include <iostream>

#include "stopflow/stopflow.hpp"

int main(int argc, char** argv) {
    using namespace stopflow;
    const int n = argc > 1 ? std::atoi(argv[1]) : 30;
    const int k = argc > 2 ? std::atoi(argv[2]) : 2;
    const std::uint64_t trials = argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 50000;

    const PathPower g(n, k);
    const auto exact = success_probability_exact(n, k);
    std::cout << "exact tau_n: " << to_fraction(exact) << " = " << to_decimal(exact, 12) << "\n";

    const auto bounds = bound_report(n, k);
    const double p = bounds.has_lower ? bounds.lower.p : 0.5;

    for (const auto& s : {Strategy::tau_n(), Strategy::tau_p_star(p, 0),
                          Strategy::classical_threshold(classical_cutoff(n)), Strategy::first_max()}) {
        std::cout << simulate(g, s, trials, 2024).text() << "\n";
    }
    std::cout << "upper bound: " << bounds.upper << "\n";
}
