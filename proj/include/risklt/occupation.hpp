#pragma once

#include <array>
#include <string>
#include <vector>

#include "risklt/process.hpp"

namespace risklt {

// Right-continuous-from-the-left step function: value values[0] on
// (-inf, breakpoints[0]], values[i] on (breakpoints[i-1], breakpoints[i]],
// values[m] on (breakpoints[m-1], inf).  Pieces are left-open right-closed.
class StepFunction {
  public:
    StepFunction() : values_{0.0} {}

    StepFunction(std::vector<double> breakpoints, std::vector<double> values);

    static StepFunction constant(double v) { return StepFunction({}, {v}); }

    // Indicator of the interval (lo, hi].
    static StepFunction indicator(double lo, double hi) {
        return StepFunction({lo, hi}, {0.0, 1.0, 0.0});
    }

    double operator()(double y) const;

    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<double>& values() const { return values_; }

    friend bool operator==(const StepFunction& a, const StepFunction& b) {
        return a.breakpoints_ == b.breakpoints_ && a.values_ == b.values_;
    }

  private:
    std::vector<double> breakpoints_;
    std::vector<double> values_;
};

// JSON round trip, field names {"breakpoints","values"}; CSV is write-only,
// one row per piece as (right endpoint, value on the piece); the unbounded
// last piece has an empty first column.
std::string step_to_json_string(const StepFunction& f, int indent = -1);
StepFunction step_from_json_string(const std::string& text);
std::string step_to_csv(const StepFunction& f);

// Point mass of the local-time field, reported separately from its
// absolutely continuous step part.
struct Atom {
    double level;
    double mass;
};

// Lebesgue time the path spends with value in (a, b] up to t, divided per
// segment as (min(b, v_end) - max(a, v_start))^+ / c.
double occupation_measure(const SamplePath& path, double t, double a, double b);

struct LocalTimeProfile {
    StepFunction density;        // step part of x -> L_t(x)
    std::array<Atom, 2> atoms;   // mass 1/(2c) at X_0 and at X_t
};

// Full local-time field of the path at time t.  The step part takes the value
// (number of segments whose value range (v_start, v_end] contains y) / c, so
// it matches local_time_at exactly away from breakpoints and atoms.
LocalTimeProfile local_time_profile(const SamplePath& path, double t);

// Integral of g times the step part of the profile over the level axis.  Both
// arguments are step functions; the product must vanish on the unbounded end
// pieces (the profile always does).
double occupation_integral(const StepFunction& profile, const StepFunction& g);

// Time integral int_0^t g(X_s) ds, evaluated exactly as sum over g-pieces of
// g-value times the occupation of that piece.
double time_integral(const SamplePath& path, double t, const StepFunction& g);

}  // namespace risklt
