#pragma once

#include <cstdint>

#include <vector>

#include "risklt/process.hpp"

namespace risklt {

// Pathwise local time of the piecewise linear path at level x up to time t:
//
//   L_t(x) = (1/c) [ 1/2 1{X_t = x} + 1{X_t > x} - 1/2 1{X_0 = x} - 1{X_0 > x}
//                    - sum over jumps s <= t of (1{X_s > x} - 1{X_{s-} > x}) ]
//
// The bracket is a half-integer assembled from exact comparisons, so the
// result is that half-integer divided by c with a single rounding.
double local_time_at(const SamplePath& path, double t, double x);

// Number of strict level crossings of x on (0, t], via the counting identity
//   C_t(x) = 1{x < X_t} - 1{x < X_0} + sum over jumps of 1{X_s < x < X_{s-}}.
// A negative outcome is impossible for admissible paths off the degenerate
// set and is reported as an integrity error.
long long crossing_count(const SamplePath& path, double t, double x);

// Same count obtained geometrically: segments whose open value range contains
// x.  Levels equal to any segment endpoint value (including X_0 and X_t) are
// rejected; the two counters agree exactly off that set.
long long crossing_count_geometric(const SamplePath& path, double t, double x);

// Jump part of the Tanaka-style decomposition: sum over jumps of
// f(x, X_s) * dX_s with f = 1{X_s < x < X_{s-}} / dX_s (0 for dX_s = 0);
// every straddling jump contributes exactly one.
double tanaka_jump_sum(const SamplePath& path, double t, double x);

// Piecewise linear ramp used to mollify the step 1{y >= x}: 0 below x - 1/n,
// 1 above x + 1/n, linear in between.  Its derivative is n/2 strictly inside
// the window and 0 elsewhere, including the window edges.
struct MollifiedStep {
    double level;
    long long n;

    double lower() const { return level - 1.0 / static_cast<double>(n); }
    double upper() const { return level + 1.0 / static_cast<double>(n); }

    double value(double y) const {
        if (y <= lower()) return 0.0;
        if (y >= upper()) return 1.0;
        return (static_cast<double>(n) * (y - level) + 1.0) / 2.0;
    }

    double derivative(double y) const {
        return (y > lower() && y < upper()) ? static_cast<double>(n) / 2.0 : 0.0;
    }
};

// Approximating local-time field
//   L^n_t(x) = int_0^t phi'_{x,n}(X_{s-}) ds + (1/c) sum phi'_{x,n}(X_{s-}) dX_s,
// evaluated segment by segment: the time integral is (n/2) times the length of
// the segment's value-range overlap with the open window (x - 1/n, x + 1/n),
// divided by c.  Segments that traverse the whole window contribute exactly
// 1/c each, so once the window is free of endpoint values the field equals
// local_time_at bit for bit.
double approx_local_time(const SamplePath& path, double t, double x, long long n);

// All segment endpoint values of the path up to t (includes X_0 and X_t),
// sorted with duplicates removed.
std::vector<double> endpoint_values(const SamplePath& path, double t);

// Smallest n such that the closed window [x - 1/n, x + 1/n] contains no
// endpoint value under floating-point evaluation; approx_local_time equals
// local_time_at exactly for every n at or above it.  x itself must not be an
// endpoint value.
long long exact_window_threshold(const SamplePath& path, double t, double x);

}  // namespace risklt
