#pragma once

#include <cmath>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>

#include "stopflow/error.hpp"
#include "stopflow/path_power.hpp"

namespace stopflow {

inline double gamma_fn(double x) { return boost::math::tgamma(x); }

/// Gamma(4/3) * 3^(1/3): the largest value of Gamma(1 + 1/(k+1)) (k+1)^(1/(k+1)) over k >= 1.
inline double asymptotic_constant() { return gamma_fn(4.0 / 3.0) * std::cbrt(3.0); }

/// Gamma(1 + 1/(k+1)) * (k+1)^(1/(k+1)), the limiting scaled upper bound for fixed k.
inline double scaled_upper_limit(int k) {
    const double a = 1.0 / (k + 1);
    return gamma_fn(1.0 + a) * std::pow(k + 1.0, a);
}

/// Gamma(m+1) Gamma(1 + 1/(k+1)) / Gamma(m+1+1/(k+1)) with m = floor((n-2)/(k+1)).
/// For k >= n - 2 the success probability is exactly 1/2, which is returned as is.
inline double upper_bound(int n, int k) {
    validate_power(n, k);
    if (k >= n - 2) return 0.5;
    const int m = (n - 2) / (k + 1);
    const double a = 1.0 / (k + 1);
    return gamma_fn(1.0 + a) * boost::math::tgamma_delta_ratio(static_cast<double>(m + 1), a);
}

struct TauPLowerBound {
    double epsilon = 0.0;
    double p = 0.0;     // 1 - (1 - eps) n^(-1/(k+1))
    double bound = 0.0; // (1 - (1-eps)^(k+1)) (1 - (1-eps) n^(-1/(k+1))) (1-eps) n^(-1/(k+1))
};

inline TauPLowerBound lower_bound_tau_p(int n, int k, double epsilon) {
    validate_power(n, k);
    detail::require(k < n - 2, "lower_bound_tau_p: need k < n - 2");
    detail::require(epsilon > 0.0 && epsilon < 1.0, "lower_bound_tau_p: epsilon must lie in (0, 1)");
    const double keep = (1.0 - epsilon) * std::pow(static_cast<double>(n), -1.0 / (k + 1));
    TauPLowerBound out;
    out.epsilon = epsilon;
    out.p = 1.0 - keep;
    out.bound = (1.0 - std::pow(1.0 - epsilon, k + 1)) * (1.0 - keep) * keep;
    return out;
}

/// Best epsilon on {0.1, ..., 0.9} for the analytic bound.
inline TauPLowerBound best_lower_bound_tau_p(int n, int k) {
    TauPLowerBound best{};
    best.bound = -std::numeric_limits<double>::infinity();
    for (int i = 1; i <= 9; ++i) {
        const auto lb = lower_bound_tau_p(n, k, i / 10.0);
        if (lb.bound > best.bound) best = lb;
    }
    return best;
}

struct BoundReport {
    int n = 0;
    int k = 0;
    double upper = 0.0;
    bool has_lower = false; // lower bound is defined only for k < n - 2
    TauPLowerBound lower{};
    double asymptotic_constant = 0.0;
};

/// Bounds at (n, k); epsilon <= 0 selects the best grid value.
inline BoundReport bound_report(int n, int k, double epsilon = 0.0) {
    BoundReport r;
    r.n = n;
    r.k = k;
    r.upper = upper_bound(n, k);
    r.asymptotic_constant = asymptotic_constant();
    if (k < n - 2) {
        r.has_lower = true;
        r.lower = epsilon > 0.0 ? lower_bound_tau_p(n, k, epsilon) : best_lower_bound_tau_p(n, k);
    }
    return r;
}

} // namespace stopflow
