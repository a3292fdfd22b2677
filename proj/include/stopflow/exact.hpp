#pragma once

#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "stopflow/error.hpp"
#include "stopflow/path_power.hpp"

namespace stopflow {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Pascal triangle of exact binomials, rows 0..max_n.
class BinomialTable {
public:
    explicit BinomialTable(int max_n) : rows_(static_cast<std::size_t>(max_n) + 1) {
        for (int i = 0; i <= max_n; ++i) {
            auto& row = rows_[i];
            row.resize(static_cast<std::size_t>(i) + 1);
            row[0] = row[i] = 1;
            for (int j = 1; j < i; ++j) row[j] = rows_[i - 1][j - 1] + rows_[i - 1][j];
        }
    }

    int max_n() const noexcept { return static_cast<int>(rows_.size()) - 1; }

    /// C(n, r); zero when r < 0 or r > n.
    const BigInt& operator()(int n, int r) const {
        static const BigInt zero = 0;
        if (n < 0 || r < 0 || r > n) return zero;
        detail::require(n <= max_n(), "BinomialTable: row " + std::to_string(n) + " not tabulated");
        return rows_[n][r];
    }

    /// (parts[0] + parts[1] + ...)! / (parts[0]! parts[1]! ...), as a product of binomials.
    BigInt multinomial(std::span<const int> parts) const {
        int total = 0;
        for (int x : parts) total += x;
        BigInt out = 1;
        for (int x : parts) {
            out *= (*this)(total, x);
            total -= x;
        }
        return out;
    }

private:
    std::vector<std::vector<BigInt>> rows_;
};

/// Calls f(a) for every tuple a of `parts` non-negative integers with
/// sum_i (i+1) * a[i] == r, in lexicographically decreasing order.
template <class F>
void for_each_composition(int r, int parts, F&& f) {
    if (r < 0) return;
    std::vector<int> a(static_cast<std::size_t>(parts), 0);
    if (parts == 0) {
        if (r == 0) f(std::span<const int>(a));
        return;
    }
    auto rec = [&](auto&& self, int idx, int remaining) -> void {
        const int weight = idx + 1;
        if (idx == parts - 1) {
            if (remaining % weight == 0) {
                a[idx] = remaining / weight;
                f(std::span<const int>(a));
            }
            return;
        }
        for (int x = remaining / weight; x >= 0; --x) {
            a[idx] = x;
            self(self, idx + 1, remaining - weight * x);
        }
        a[idx] = 0;
    };
    rec(rec, 0, r);
}

inline std::vector<std::vector<int>> compositions(int r, int parts) {
    detail::require(parts >= 0, "compositions: parts must be >= 0");
    std::vector<std::vector<int>> out;
    for_each_composition(r, parts, [&](std::span<const int> a) { out.emplace_back(a.begin(), a.end()); });
    return out;
}

/// Smallest m at which the stopping condition can hold: ceil((n + k) / (k + 1)).
inline int first_feasible_m(int n, int k) { return (n + k + k) / (k + 1); }

namespace detail {

inline void require_vmh_range(int n, int k, int m, int h) {
    validate_power(n, k);
    require(m >= first_feasible_m(n, k) && m <= n,
            "v_mh: m=" + std::to_string(m) + " outside " + std::to_string(first_feasible_m(n, k)) +
                ".." + std::to_string(n));
    require(h >= 0 && h <= (n - m) / k,
            "v_mh: h=" + std::to_string(h) + " outside 0.." + std::to_string((n - m) / k));
}

} // namespace detail

/// Number of m-subsets of 1..n holding both ends whose missing runs are all
/// at most k long, exactly h of them of length k (so h+1 components).
inline BigInt v_mh(int n, int k, int m, int h, const BinomialTable& binom) {
    detail::require_vmh_range(n, k, m, h);
    BigInt total = 0;
    std::vector<int> parts(static_cast<std::size_t>(k), 0);
    for_each_composition(n - m - k * h, k - 1, [&](std::span<const int> a) {
        int slots = h;
        parts[0] = h;
        for (std::size_t i = 0; i < a.size(); ++i) {
            parts[i + 1] = a[i];
            slots += a[i];
        }
        const BigInt& choose = binom(m - 1, slots);
        if (!choose.is_zero()) total += choose * binom.multinomial(parts);
    });
    return total;
}

inline BigInt v_mh(int n, int k, int m, int h) { return v_mh(n, k, m, h, BinomialTable(n)); }

/// The counting tables behind the closed-form success probability of tau_n.
struct ExactTables {
    int n = 0;
    int k = 0;
    int m_min = 0;
    std::vector<std::vector<BigInt>> V; // V[m - m_min][h]
    std::vector<BigInt> W;              // W[m - m_min] = sum_h V
    std::vector<BigInt> T;              // T[m - m_min] = sum_h (h+1) V
    Rational probability = 0;

    const BigInt& v(int m, int h) const { return V.at(m - m_min).at(h); }
    const BigInt& w(int m) const { return W.at(m - m_min); }
    const BigInt& t(int m) const { return T.at(m - m_min); }
    /// W_m / (m C(n, m)), the m-th summand.
    Rational term(int m) const { return Rational(w(m), BigInt(m) * BinomialTable(n)(n, m)); }
};

inline ExactTables exact_tables(int n, int k) {
    validate_power(n, k);
    const BinomialTable binom(n);
    ExactTables tab;
    tab.n = n;
    tab.k = k;
    tab.m_min = first_feasible_m(n, k);
    for (int m = tab.m_min; m <= n; ++m) {
        std::vector<BigInt> row;
        BigInt w = 0, t = 0;
        for (int h = 0; h <= (n - m) / k; ++h) {
            row.push_back(v_mh(n, k, m, h, binom));
            w += row.back();
            t += row.back() * (h + 1);
        }
        tab.probability += Rational(w, BigInt(m) * binom(n, m));
        tab.V.push_back(std::move(row));
        tab.W.push_back(std::move(w));
        tab.T.push_back(std::move(t));
    }
    return tab;
}

/// Exact success probability of tau_n on the k-th power of a path of n vertices.
inline Rational success_probability_exact(int n, int k) {
    if (k >= n) throw input_error("success_probability_exact: need k < n");
    return exact_tables(n, k).probability;
}

/// Simplified closed form for k = 2.
inline Rational success_probability_k2(int n) {
    detail::require(n >= 3, "success_probability_k2: need n >= 3");
    const BinomialTable binom(n);
    Rational total = 0;
    for (int m = (n + 4) / 3; m <= n; ++m) {
        BigInt inner = 0;
        for (int h = 0; h <= (n - m) / 2; ++h) inner += binom(m - 1, n - m - h) * binom(n - m - h, h);
        total += Rational(inner, BigInt(m) * binom(n, m));
    }
    return total;
}

/// Closed form for the plain path (k = 1): only h = n - m contributes.
inline Rational success_probability_k1(int n) {
    detail::require(n >= 2, "success_probability_k1: need n >= 2");
    const BinomialTable binom(n);
    Rational total = 0;
    for (int m = (n + 2) / 2; m <= n; ++m) total += Rational(binom(m - 1, n - m), BigInt(m) * binom(n, m));
    return total;
}

/// P[newest arrival is the sink | it is maximal], given m arrivals in c
/// components with b inner holes: 1 / (n - m - k(c-1) - b + c).
inline Rational conditional_success(int n, int k, int m, int c, int b) {
    validate_power(n, k);
    detail::require(m >= 1 && m <= n, "conditional_success: m outside 1..n");
    detail::require(c >= 1 && c <= m, "conditional_success: c outside 1..m");
    detail::require(b >= 0, "conditional_success: b must be >= 0");
    const int free = n - m - k * (c - 1) - b;
    detail::require(free >= 0, "conditional_success: infeasible state (negative slack)");
    return Rational(1, free + c);
}

/// Decimal expansion with `digits` fractional digits, rounded half to even,
/// trailing zeros trimmed.
inline std::string to_decimal(const Rational& q, int digits = 20) {
    BigInt num = boost::multiprecision::numerator(q);
    const BigInt den = boost::multiprecision::denominator(q);
    const bool negative = num < 0;
    if (negative) num = -num;
    BigInt scale = 1;
    for (int i = 0; i < digits; ++i) scale *= 10;
    BigInt quot, rem;
    boost::multiprecision::divide_qr(num * scale, den, quot, rem);
    const BigInt twice = rem * 2;
    if (twice > den || (twice == den && boost::multiprecision::bit_test(quot, 0))) ++quot;

    BigInt whole, frac;
    boost::multiprecision::divide_qr(quot, scale, whole, frac);
    std::string out = (negative ? "-" : "") + whole.str();
    if (digits > 0 && !frac.is_zero()) {
        std::string f = frac.str();
        f.insert(0, static_cast<std::size_t>(digits) - f.size(), '0');
        while (!f.empty() && f.back() == '0') f.pop_back();
        out += "." + f;
    }
    return out;
}

inline std::string to_fraction(const Rational& q) {
    return boost::multiprecision::numerator(q).str() + "/" + boost::multiprecision::denominator(q).str();
}

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

} // namespace stopflow
