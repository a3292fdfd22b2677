#pragma once

#include <algorithm>
#include <iterator>
#include <map>
#include <string>
#include <vector>

#include "stopflow/error.hpp"
#include "stopflow/path_power.hpp"

namespace stopflow {

/// What the selector learns from one arrival.
struct ObservationEvent {
    int t = 0;               // arrivals so far
    bool is_max = false;     // newest arrival has no outgoing edge in the induced graph
    int c = 0;               // component count
    int b = 0;               // not-yet-arrived vertices trapped inside component spans
    int slack = 0;           // (n - t) - k(c - 1) - b
    bool condition_met = false;

    friend bool operator==(const ObservationEvent&, const ObservationEvent&) = default;
};

/// A component as the selector sees it: arrival indices paired with offsets
/// from the component's lowest known vertex. Absolute positions are not exposed.
struct ComponentView {
    struct Member {
        int arrival = 0;
        int offset = 0;
        friend auto operator<=>(const Member&, const Member&) = default;
    };
    std::vector<Member> members; // sorted by arrival index
    int span = 0;

    int size() const noexcept { return static_cast<int>(members.size()); }
    int first_arrival() const noexcept { return members.empty() ? 0 : members.front().arrival; }
    friend auto operator<=>(const ComponentView&, const ComponentView&) = default;
};

struct ObserverOptions {
    // Added to every reported b. Non-zero only when self-testing the verification harness.
    int b_bias = 0;
};

/// The selector-legal information state: the induced subgraph of arrived
/// vertices, tracked as disjoint position intervals keyed by their lowest vertex.
class Observer {
public:
    explicit Observer(PathPower g, ObserverOptions opts = {})
        : g_(g), opts_(opts), arrival_(static_cast<std::size_t>(g.n()) + 1, 0) {
        last_.slack = g_.n();
    }

    const PathPower& graph() const noexcept { return g_; }
    int t() const noexcept { return t_; }
    int component_count() const noexcept { return static_cast<int>(intervals_.size()); }
    int inner_missing() const noexcept { return intervals_.empty() ? 0 : b_ + opts_.b_bias; }
    int slack() const noexcept {
        if (intervals_.empty()) return g_.n();
        return (g_.n() - t_) - g_.k() * (component_count() - 1) - inner_missing();
    }
    bool stopping_condition() const noexcept { return t_ >= 1 && slack() == 0; }
    const ObservationEvent& last_event() const noexcept { return last_; }

    bool arrived(Position pos) const { return g_.contains(pos) && arrival_[pos] != 0; }

    ObservationEvent observe(Position pos) {
        if (!g_.contains(pos))
            throw input_error("observe: position " + std::to_string(pos) + " outside 1.." +
                              std::to_string(g_.n()));
        if (arrival_[pos] != 0)
            throw input_error("observe: duplicate arrival of position " + std::to_string(pos));

        arrival_[pos] = ++t_;
        bool is_max = false;

        auto upper = intervals_.upper_bound(pos);
        auto lower = upper == intervals_.begin() ? intervals_.end() : std::prev(upper);

        if (lower != intervals_.end() && lower->second.hi > pos) {
            // Fills a hole inside an existing span; the lowest vertex is unchanged.
            ++lower->second.size;
            --b_;
        } else {
            Interval merged{pos, pos, 1};
            const int k = g_.k();
            if (lower != intervals_.end() && pos - lower->second.hi <= k) {
                merged.lo = lower->second.lo;
                merged.size += lower->second.size;
                b_ -= lower->second.missing();
                intervals_.erase(lower);
            }
            if (upper != intervals_.end() && upper->second.lo - pos <= k) {
                merged.hi = upper->second.hi;
                merged.size += upper->second.size;
                b_ -= upper->second.missing();
                intervals_.erase(upper);
            }
            b_ += merged.missing();
            is_max = merged.lo == pos;
            intervals_.emplace(merged.lo, merged);
        }

        last_.t = t_;
        last_.is_max = is_max;
        last_.c = component_count();
        last_.b = inner_missing();
        last_.slack = slack();
        last_.condition_met = last_.slack == 0;
        return last_;
    }

    /// Components in relative form, ordered by first arrival.
    std::vector<ComponentView> components() const {
        std::vector<ComponentView> out;
        out.reserve(intervals_.size());
        for (const auto& [lo, iv] : intervals_) {
            ComponentView view;
            view.span = iv.hi - iv.lo + 1;
            for (Position p = iv.lo; p <= iv.hi; ++p)
                if (arrival_[p] != 0) view.members.push_back({arrival_[p], p - iv.lo});
            std::sort(view.members.begin(), view.members.end());
            out.push_back(std::move(view));
        }
        std::sort(out.begin(), out.end(), [](const ComponentView& a, const ComponentView& b) {
            return a.first_arrival() < b.first_arrival();
        });
        return out;
    }

private:
    struct Interval {
        Position lo;
        Position hi;
        int size;
        int missing() const noexcept { return hi - lo + 1 - size; }
    };

    PathPower g_;
    ObserverOptions opts_;
    std::vector<int> arrival_; // arrival index per position, 0 = not yet
    std::map<Position, Interval> intervals_;
    int t_ = 0;
    int b_ = 0;
    ObservationEvent last_{};
};

} // namespace stopflow
