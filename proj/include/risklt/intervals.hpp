#pragma once

#include <limits>
#include <stdexcept>
#include <vector>

namespace risklt {

// Closed interval [lo, hi]; lo = -inf or hi = +inf give half-lines.
struct Interval {
    double lo;
    double hi;

    bool contains(double y) const { return lo <= y && y <= hi; }
};

// Finite union of pairwise disjoint closed intervals.  Used for event sets on
// the path value and on the forward increment.  Callers keep the parts
// disjoint; probabilities are accumulated per part.
class IntervalSet {
  public:
    IntervalSet() = default;

    explicit IntervalSet(std::vector<Interval> parts) : parts_(std::move(parts)) {
        for (const auto& iv : parts_) {
            if (!(iv.lo <= iv.hi))
                throw std::invalid_argument("IntervalSet: need lo <= hi");
        }
    }

    static IntervalSet empty_set() { return IntervalSet{}; }

    static IntervalSet whole_line() {
        return IntervalSet{{Interval{-std::numeric_limits<double>::infinity(),
                                     std::numeric_limits<double>::infinity()}}};
    }

    static IntervalSet at_least(double lo) {
        return IntervalSet{{Interval{lo, std::numeric_limits<double>::infinity()}}};
    }

    static IntervalSet range(double lo, double hi) { return IntervalSet{{Interval{lo, hi}}}; }

    bool contains(double y) const {
        for (const auto& iv : parts_)
            if (iv.contains(y)) return true;
        return false;
    }

    bool empty() const { return parts_.empty(); }

    const std::vector<Interval>& parts() const { return parts_; }

  private:
    std::vector<Interval> parts_;
};

}  // namespace risklt
