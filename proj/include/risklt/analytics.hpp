#pragma once

#include <functional>
#include <stdexcept>
#include <string>

#include "risklt/intervals.hpp"
#include "risklt/occupation.hpp"
#include "risklt/process.hpp"

namespace risklt {

// A series or quadrature failed to meet its tolerance within the configured
// budget; the best value computed so far travels with the error.
class NonConvergence : public std::runtime_error {
  public:
    NonConvergence(const std::string& msg, double partial, double err)
        : std::runtime_error(msg), partial_value(partial), err_estimate(err) {}

    double partial_value;
    double err_estimate;
};

// Truncation policy for the density/cdf series.
struct SeriesMode {
    enum class Kind { fixed, adaptive };

    Kind kind = Kind::adaptive;
    int terms = 5;            // fixed: exactly this many series terms
    double rel_tol = 1e-12;   // adaptive: stop when the tail bound drops below this
    int max_terms = 500;      // adaptive: budget before giving up

    static SeriesMode fixed(int n) {
        SeriesMode m;
        m.kind = Kind::fixed;
        m.terms = n;
        return m;
    }

    static SeriesMode adaptive(double rel_tol, int max_terms) {
        SeriesMode m;
        m.kind = Kind::adaptive;
        m.rel_tol = rel_tol;
        m.max_terms = max_terms;
        return m;
    }

    void validate() const {
        if (terms < 1) throw std::invalid_argument("SeriesMode: terms must be >= 1");
        if (!(rel_tol > 0.0)) throw std::invalid_argument("SeriesMode: rel_tol must be > 0");
        if (max_terms < 1) throw std::invalid_argument("SeriesMode: max_terms must be >= 1");
    }
};

struct NumericConfig {
    SeriesMode series_mode;
    double quad_rel_tol = 1e-8;
    int quad_max_depth = 48;

    void validate() const {
        series_mode.validate();
        if (!(quad_rel_tol > 0.0))
            throw std::invalid_argument("NumericConfig: quad_rel_tol must be > 0");
        if (quad_max_depth < 1)
            throw std::invalid_argument("NumericConfig: quad_max_depth must be >= 1");
    }
};

struct QuadResult {
    double value;
    double err_estimate;
};

// Adaptive Simpson integration of f over [a, b].  A subinterval is accepted
// when |S_fine - S_coarse| / 15 fits its share of rel_tol relative to a
// composite pilot scan of the whole range; accepted nodes take the
// Richardson-extrapolated value.  Exhausting max_depth raises NonConvergence
// carrying the partial value.
QuadResult adaptive_quadrature(const std::function<double(double)>& f, double a, double b,
                               double rel_tol, int max_depth);

// Density of the compound Poisson sum with Exponential(beta) summands and
// intensity alpha at time t:
//   f(u, t) = exp(-alpha t - beta u) * sum_{n>=1} (beta alpha t)^n u^{n-1} / (n! (n-1)!)
// for u > 0 and 0 otherwise.  Terms follow the multiplicative recurrence
// term_{n+1} = term_n * (beta alpha t u) / ((n+1) n).
double compound_density(double u, double t, double alpha, double beta, const NumericConfig& cfg);

// Distribution function of the same law: atom exp(-alpha t) at zero plus a
// Poisson mixture of Erlang distribution functions, with the regularized
// incomplete gamma accumulated in summed form.
double compound_cdf(double u, double t, double alpha, double beta, const NumericConfig& cfg);

struct ExpectedLocalTime {
    double value;
    bool includes_singular;
};

// Expected local time of the surplus process at level x over [0, t]:
// the integral of f(x0 + c s - x, s) over s from ((x-x0)/c clamped to [0,t])
// to t.  With include_singular the drift-through contribution
// exp(-alpha (x-x0)/c) / c on x0 < x <= x0 + c t is added, which restores
// total level mass t (without it the mass is t - (1 - exp(-alpha t))/alpha).
ExpectedLocalTime expected_local_time(const ModelParams& params, double t, double x,
                                      const NumericConfig& cfg, bool include_singular);

// P(X_eps - x0 in B) for the stationary increment over a window of width eps;
// B is a finite union of disjoint closed intervals.
double increment_probability(const ModelParams& params, double eps, const IntervalSet& B,
                             const NumericConfig& cfg);

// Expectation functional for the time integral of g(X_s, X_{s+eps} - X_s):
// the level integral of E[g(x, X_eps - x0)] times the expected local time.
//
// Product form g(x, y) = a(x) * 1_B(y): the increment factor is the constant
// increment_probability(B) and the level integral runs piecewise over a.  The
// x-domain is truncated above at x0 + c t; unbounded-below pieces are cut
// where the integrand falls below quad_rel_tol times its running maximum, and
// the estimated truncation tail is folded into err_estimate.
QuadResult theorem2_functional(const ModelParams& params, double t, double eps,
                               const StepFunction& a, const IntervalSet& B,
                               const NumericConfig& cfg, bool include_singular);

// General bounded g(x, y): E[g(x, X_eps - x0)] is computed per x by
// quadrature against the increment law (atom at c*eps plus the density part),
// then integrated against the expected local time like the product form.
QuadResult theorem2_functional(const ModelParams& params, double t, double eps,
                               const std::function<double(double, double)>& g,
                               const NumericConfig& cfg, bool include_singular);

}  // namespace risklt
