#pragma once

namespace uqkit {

struct Interval {
    double lower = 0.0;
    double upper = 0.0;
    /// Set when an adjustment would have inverted the bounds and both were moved to the midpoint.
    bool collapsed = false;

    double width() const noexcept { return upper - lower; }
    bool contains(double y) const noexcept { return lower <= y && y <= upper; }
    bool contains(const Interval& other) const noexcept {
        return lower <= other.lower && other.upper <= upper;
    }
};

} // namespace uqkit
