#include "risklt/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace risklt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct QuadState {
    const std::function<double(double)>& f;
    int max_depth;
    double err = 0.0;
    bool exhausted = false;
};

double recurse(QuadState& st, double a, double b, double fa, double fm, double fb, double s_coarse,
               double budget, int depth) {
    double h = b - a;
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m);
    double rm = 0.5 * (m + b);
    double flm = st.f(lm);
    double frm = st.f(rm);
    double s_left = (h / 12.0) * (fa + 4.0 * flm + fm);
    double s_right = (h / 12.0) * (fm + 4.0 * frm + fb);
    // Fused composite estimate; agrees with s_left + s_right up to rounding
    // but keeps polynomial cases exact.
    double s_fine = (h / 12.0) * (fa + 4.0 * flm + 2.0 * fm + 4.0 * frm + fb);
    double diff = s_fine - s_coarse;
    bool splittable = a < lm && lm < m && m < rm && rm < b;
    if (std::abs(diff) <= 15.0 * budget || depth >= st.max_depth || !splittable) {
        if (!(std::abs(diff) <= 15.0 * budget) && splittable) st.exhausted = true;
        st.err += std::abs(diff) / 15.0;
        return s_fine + diff / 15.0;
    }
    return recurse(st, a, m, fa, flm, fm, s_left, 0.5 * budget, depth + 1) +
           recurse(st, m, b, fm, frm, fb, s_right, 0.5 * budget, depth + 1);
}

}  // namespace

QuadResult adaptive_quadrature(const std::function<double(double)>& f, double a, double b,
                               double rel_tol, int max_depth) {
    if (!(rel_tol > 0.0)) throw std::invalid_argument("adaptive_quadrature: rel_tol must be > 0");
    if (max_depth < 1) throw std::invalid_argument("adaptive_quadrature: max_depth must be >= 1");
    if (std::isnan(a) || std::isnan(b) || std::isinf(a) || std::isinf(b))
        throw std::invalid_argument("adaptive_quadrature: bounds must be finite");
    if (a == b) return {0.0, 0.0};
    if (!(a < b)) throw std::invalid_argument("adaptive_quadrature: need a <= b");

    double fa = f(a);
    double fb = f(b);
    double m = 0.5 * (a + b);
    double fm = f(m);
    double s0 = ((b - a) / 6.0) * (fa + 4.0 * fm + fb);

    // The 3-point estimate is a poor scale anchor when the mass sits in a
    // narrow sub-range, so the tolerance is anchored to a composite pilot
    // scan instead; the pilot sets the budget only, never the result.
    double pilot;
    {
        const int nodes = 64;
        double h = (b - a) / nodes;
        double acc = fa + fb;
        for (int i = 1; i < nodes; ++i) acc += ((i & 1) ? 4.0 : 2.0) * f(a + i * h);
        pilot = acc * h / 3.0;
    }

    QuadState st{f, max_depth};
    double budget = rel_tol * std::max({std::abs(pilot), std::abs(s0), 1e-300});
    double value = recurse(st, a, b, fa, fm, fb, s0, budget, 0);
    if (st.exhausted)
        throw NonConvergence("adaptive_quadrature: max depth exhausted", value, st.err);
    return {value, st.err};
}

double compound_density(double u, double t, double alpha, double beta, const NumericConfig& cfg) {
    cfg.validate();
    if (!(t > 0.0) || !(alpha > 0.0) || !(beta > 0.0))
        throw std::domain_error("compound_density: need t > 0, alpha > 0, beta > 0");
    if (std::isnan(u)) throw std::domain_error("compound_density: u must not be NaN");
    if (u <= 0.0) return 0.0;

    bool fixed = cfg.series_mode.kind == SeriesMode::Kind::fixed;
    int limit = fixed ? cfg.series_mode.terms : cfg.series_mode.max_terms;
    double zu = (beta * alpha * t) * u;
    double prefactor = std::exp(-(alpha * t + beta * u));

    double term = beta * alpha * t;  // n = 1
    double sum = 0.0;
    for (int n = 1;; ++n) {
        sum += term;
        if (fixed && n == limit) break;
        double q = zu / (static_cast<double>(n + 1) * static_cast<double>(n));
        double next = term * q;
        if (!fixed) {
            // Ratios decrease in n, so once q < 1 the tail is geometric.
            if (q < 1.0 && next <= cfg.series_mode.rel_tol * sum * (1.0 - q)) break;
            if (n == limit)
                throw NonConvergence("compound_density: series did not converge",
                                     prefactor * sum, prefactor * next);
        }
        term = next;
    }
    return prefactor * sum;
}

double compound_cdf(double u, double t, double alpha, double beta, const NumericConfig& cfg) {
    cfg.validate();
    if (!(t > 0.0) || !(alpha > 0.0) || !(beta > 0.0))
        throw std::domain_error("compound_cdf: need t > 0, alpha > 0, beta > 0");
    if (std::isnan(u)) throw std::domain_error("compound_cdf: u must not be NaN");
    if (u < 0.0) return 0.0;

    bool fixed = cfg.series_mode.kind == SeriesMode::Kind::fixed;
    int limit = fixed ? cfg.series_mode.terms : cfg.series_mode.max_terms;
    double at = alpha * t;
    double z = beta * u;
    bool z_inf = std::isinf(z);
    double atom = std::exp(-at);

    double sum = atom;
    double w = atom * at;          // Poisson weight of n = 1
    double cum_w = atom;
    double gamma_term = std::exp(-z);  // e^{-z} z^{n-1}/(n-1)!
    double gamma_cum = gamma_term;    // e^{-z} sum_{j<n} z^j/j!
    for (int n = 1;; ++n) {
        // Regularized lower incomplete gamma P(n, z) in summed form.
        double erlang = z_inf ? 1.0 : std::max(0.0, 1.0 - gamma_cum);
        sum += w * erlang;
        cum_w += w;
        if (fixed && n == limit) break;

        double gamma_next = z_inf ? 0.0 : gamma_term * (z / n);
        double gamma_cum_next = gamma_cum + gamma_next;
        if (!fixed) {
            double erlang_next = z_inf ? 1.0 : std::max(0.0, 1.0 - gamma_cum_next);
            double tail = std::max(0.0, 1.0 - cum_w) * erlang_next;
            if (tail <= cfg.series_mode.rel_tol * sum) break;
            if (n == limit)
                throw NonConvergence("compound_cdf: series did not converge", sum, tail);
        }
        gamma_term = gamma_next;
        gamma_cum = gamma_cum_next;
        w *= at / (n + 1);
    }
    return sum;
}

namespace {

// compound_density with its limit value at the support edge u = 0 (where the
// series collapses to its first term) instead of the conventional 0.  The
// point has measure zero, but integrands built on it stay continuous, which
// adaptive refinement needs at interval endpoints.
double density_continuous(double u, double t, double alpha, double beta,
                          const NumericConfig& cfg) {
    if (u > 0.0) return compound_density(u, t, alpha, beta, cfg);
    return std::exp(-alpha * t) * beta * alpha * t;
}

}  // namespace

ExpectedLocalTime expected_local_time(const ModelParams& params, double t, double x,
                                      const NumericConfig& cfg, bool include_singular) {
    params.validate();
    cfg.validate();
    if (!params.claims.is_exponential())
        throw std::invalid_argument("expected_local_time: needs the exponential claim law");
    if (!(t > 0.0) || !std::isfinite(t))
        throw std::domain_error("expected_local_time: t must be > 0 and finite");
    if (!std::isfinite(x)) throw std::domain_error("expected_local_time: x must be finite");

    double s_hit = (x - params.x0) / params.c;
    double lo = std::clamp(s_hit, 0.0, t);
    double value = 0.0;
    if (lo < t) {
        auto integrand = [&](double s) {
            if (s <= 0.0) return 0.0;  // the claim sum has no density mass yet
            // Written as c*(s - s_hit) so the density argument cannot slip
            // below the support edge by cancellation near the lower limit.
            double u = std::max(params.c * (s - s_hit), 0.0);
            return density_continuous(u, s, params.alpha, params.claims.beta(), cfg);
        };
        value = adaptive_quadrature(integrand, lo, t, cfg.quad_rel_tol, cfg.quad_max_depth).value;
    }
    if (include_singular && params.x0 < x && x <= params.x0 + params.c * t)
        value += std::exp(-params.alpha * (x - params.x0) / params.c) / params.c;
    return {value, include_singular};
}

double increment_probability(const ModelParams& params, double eps, const IntervalSet& B,
                             const NumericConfig& cfg) {
    params.validate();
    cfg.validate();
    if (!params.claims.is_exponential())
        throw std::invalid_argument("increment_probability: needs the exponential claim law");
    if (!(eps > 0.0) || !std::isfinite(eps))
        throw std::domain_error("increment_probability: eps must be > 0 and finite");

    double beta = params.claims.beta();
    double drift = params.c * eps;
    double atom = std::exp(-params.alpha * eps);
    double total = 0.0;
    for (const Interval& part : B.parts()) {
        double y_hi = drift - part.lo;  // claim-sum bound from the part's lower edge
        double y_lo = drift - part.hi;
        if (y_hi < 0.0) continue;
        double upper = compound_cdf(y_hi, eps, params.alpha, beta, cfg);
        double lower = 0.0;
        if (y_lo >= 0.0) {
            lower = compound_cdf(y_lo, eps, params.alpha, beta, cfg);
            if (y_lo == 0.0) lower -= atom;  // strict inequality drops the point mass
        }
        total += std::max(0.0, upper - lower);
    }
    return total;
}

namespace {

struct LowerCutoff {
    double cut;
    double tail_err;
};

// Walk down from `start` in fixed steps until |w| stays below rel_tol times
// its running maximum; the geometric tail below the cut is estimated from the
// last two samples.
LowerCutoff march_lower_cutoff(const std::function<double(double)>& w, double start, double step,
                               double rel_tol) {
    double running_max = std::abs(w(start));
    double x = start;
    double prev = running_max;
    int consecutive = 0;
    for (int iter = 0; iter < 400; ++iter) {
        x -= step;
        double v = std::abs(w(x));
        running_max = std::max(running_max, v);
        if (v <= rel_tol * running_max) {
            if (++consecutive >= 2) {
                double decay = step;
                if (v > 0.0 && prev > v) decay = step / std::log(prev / v);
                return {x, v * (decay + step)};
            }
        } else {
            consecutive = 0;
        }
        prev = v;
    }
    throw NonConvergence("theorem2_functional: lower truncation search failed", 0.0, kInf);
}

void check_theorem2_args(const ModelParams& params, double t, double eps,
                         const NumericConfig& cfg) {
    params.validate();
    cfg.validate();
    if (!params.claims.is_exponential())
        throw std::invalid_argument("theorem2_functional: needs the exponential claim law");
    if (!(t > 0.0) || !std::isfinite(t))
        throw std::domain_error("theorem2_functional: t must be > 0 and finite");
    if (!(eps > 0.0) || !std::isfinite(eps))
        throw std::domain_error("theorem2_functional: eps must be > 0 and finite");
}

}  // namespace

QuadResult theorem2_functional(const ModelParams& params, double t, double eps,
                               const StepFunction& a, const IntervalSet& B,
                               const NumericConfig& cfg, bool include_singular) {
    check_theorem2_args(params, t, eps, cfg);
    double p_incr = increment_probability(params, eps, B, cfg);
    if (p_incr == 0.0) return {0.0, 0.0};

    // The integrand is itself a quadrature; its evaluation noise must sit well
    // below the outer tolerance or the outer refinement cannot terminate.
    NumericConfig inner = cfg;
    inner.quad_rel_tol = std::max(cfg.quad_rel_tol * 1e-3, 1e-14);
    // Quadrature sees only the continuous part; the singular (no-jump) layer
    // integrates in closed form below, keeping the integrand jump-free.
    auto level_weight = [&, inner](double x) {
        return expected_local_time(params, t, x, inner, false).value;
    };
    double upper = params.x0 + params.c * t;  // expected local time vanishes above
    double step = std::max(0.5, 1.0 / params.claims.beta());

    const auto& bp = a.breakpoints();
    const auto& val = a.values();
    double total = 0.0;
    double err = 0.0;
    for (std::size_t j = 0; j < val.size(); ++j) {
        if (val[j] == 0.0) continue;
        double lo = j == 0 ? -kInf : bp[j - 1];
        double hi = j == bp.size() ? kInf : bp[j];
        hi = std::min(hi, upper);
        if (!(lo < hi)) continue;
        if (include_singular) {
            // Exponential layer exp(-alpha (x-x0)/c)/c on (x0, x0+ct].
            double s_lo = std::max(lo, params.x0);
            double s_hi = hi;
            if (s_lo < s_hi) {
                total += val[j] *
                         (std::exp(-params.alpha * (s_lo - params.x0) / params.c) -
                          std::exp(-params.alpha * (s_hi - params.x0) / params.c)) /
                         params.alpha;
            }
        }
        double tail_err = 0.0;
        if (std::isinf(lo)) {
            LowerCutoff cut = march_lower_cutoff(level_weight, std::min(hi, params.x0), step,
                                                 cfg.quad_rel_tol);
            tail_err = cut.tail_err;
            lo = cut.cut;
            if (!(lo < hi)) {
                err += std::abs(val[j]) * tail_err;
                continue;
            }
        }
        QuadResult q = adaptive_quadrature(level_weight, lo, hi, cfg.quad_rel_tol,
                                           cfg.quad_max_depth);
        total += val[j] * q.value;
        err += std::abs(val[j]) * (q.err_estimate + tail_err);
    }
    return {p_incr * total, p_incr * err};
}

QuadResult theorem2_functional(const ModelParams& params, double t, double eps,
                               const std::function<double(double, double)>& g,
                               const NumericConfig& cfg, bool include_singular) {
    check_theorem2_args(params, t, eps, cfg);
    double beta = params.claims.beta();
    double drift = params.c * eps;
    double atom = std::exp(-params.alpha * eps);
    double root_ae = std::sqrt(params.alpha * eps);
    double y_max = (root_ae + 8.0) * (root_ae + 8.0) / beta;  // density tail cutoff

    // Same nesting consideration as the product form: inner quadratures must
    // be resolved well below the outer tolerance.
    NumericConfig inner = cfg;
    inner.quad_rel_tol = std::max(cfg.quad_rel_tol * 1e-3, 1e-14);

    // E[g(x, X_eps - x0)]: point mass at the pure-drift increment plus
    // quadrature of g against the claim-sum density.
    auto g_mean = [&, inner](double x) {
        auto against_density = [&](double y) {
            // continuous extension at y = 0 keeps the support edge off the
            // quadrature's discontinuity set
            return g(x, drift - y) * density_continuous(y, eps, params.alpha, beta, inner);
        };
        return atom * g(x, drift) +
               adaptive_quadrature(against_density, 0.0, y_max, inner.quad_rel_tol,
                                   inner.quad_max_depth)
                   .value;
    };
    auto integrand = [&, inner](double x) {
        return g_mean(x) * expected_local_time(params, t, x, inner, false).value;
    };

    double upper = params.x0 + params.c * t;
    double step = std::max(0.5, 1.0 / beta);
    LowerCutoff cut = march_lower_cutoff(integrand, params.x0, step, cfg.quad_rel_tol);
    QuadResult q = adaptive_quadrature(integrand, cut.cut, upper, cfg.quad_rel_tol,
                                       cfg.quad_max_depth);
    double value = q.value;
    double err = q.err_estimate + cut.tail_err;
    if (include_singular && params.x0 < upper) {
        // The singular layer lives on (x0, x0+ct]; integrating it on its own
        // keeps its boundary jump at the quadrature endpoints.
        auto singular_integrand = [&](double x) {
            return g_mean(x) * std::exp(-params.alpha * (x - params.x0) / params.c) / params.c;
        };
        QuadResult qs = adaptive_quadrature(singular_integrand, params.x0, upper,
                                            cfg.quad_rel_tol, cfg.quad_max_depth);
        value += qs.value;
        err += qs.err_estimate;
    }
    return {value, err};
}

}  // namespace risklt
