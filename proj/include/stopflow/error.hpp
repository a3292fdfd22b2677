#pragma once

#include <stdexcept>
#include <string>

namespace stopflow {

// Bad arguments: out-of-range positions, malformed permutations, infeasible states.
class input_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A desk-scale guard (enumeration or DP size) was exceeded.
class resource_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool cond, const std::string& what) {
    if (!cond) throw input_error(what);
}

} // namespace detail
} // namespace stopflow
