#pragma once

#include <cstdint>
#include <string>

#include "stopflow/error.hpp"

namespace stopflow {

/// 1-based vertex index on the underlying path. Position 1 is the sink.
using Position = int;

/// The k-th power of a directed path on n vertices.
///
/// Edges run toward the sink: i -> j exists iff 0 < i - j <= k. The graph is
/// never materialized; every query is arithmetic on positions.
class PathPower {
public:
    PathPower(int n, int k) : n_(n), k_(k) {
        detail::require(n >= 2, "PathPower: n must be >= 2, got " + std::to_string(n));
        detail::require(k >= 1 && k < n,
                        "PathPower: k must satisfy 1 <= k < n, got k=" + std::to_string(k) +
                            " n=" + std::to_string(n));
    }

    int n() const noexcept { return n_; }
    int k() const noexcept { return k_; }

    bool contains(Position i) const noexcept { return i >= 1 && i <= n_; }

    bool edge_exists(Position i, Position j) const {
        check(i);
        check(j);
        const int diff = i - j;
        return diff > 0 && diff <= k_;
    }

    /// Number of underlying-path vertices strictly between the endpoints of edge i -> j.
    int d_value(Position i, Position j) const {
        if (!edge_exists(i, j))
            throw input_error("d_value: no edge " + std::to_string(i) + " -> " + std::to_string(j));
        return i - j - 1;
    }

    bool is_sink(Position i) const {
        check(i);
        return i == 1;
    }

    int out_degree(Position i) const {
        check(i);
        return i - 1 < k_ ? i - 1 : k_;
    }

    int in_degree(Position i) const {
        check(i);
        return n_ - i < k_ ? n_ - i : k_;
    }

    /// nk - k(k+1)/2
    std::int64_t edge_count() const noexcept {
        return std::int64_t{n_} * k_ - std::int64_t{k_} * (k_ + 1) / 2;
    }

    friend bool operator==(const PathPower&, const PathPower&) = default;

private:
    void check(Position i) const {
        if (!contains(i))
            throw input_error("position " + std::to_string(i) + " outside 1.." + std::to_string(n_));
    }

    int n_;
    int k_;
};

/// Throws input_error unless (n, k) names a valid path power.
inline void validate_power(int n, int k) { (void)PathPower(n, k); }

} // namespace stopflow
