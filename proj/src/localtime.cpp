#include "risklt/localtime.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace risklt {

double local_time_at(const SamplePath& path, double t, double x) {
    std::size_t k = path.jump_count_at(t);
    double xt = path.evaluate(t);
    double x0 = path.x0();

    double bracket = 0.0;
    if (xt == x) bracket += 0.5;
    if (xt > x) bracket += 1.0;
    if (x0 == x) bracket -= 0.5;
    if (x0 > x) bracket -= 1.0;
    for (std::size_t i = 1; i <= k; ++i) {
        double post = path.value_at_jump(i);
        double pre = path.value_before_jump(i);
        bracket -= (post > x ? 1.0 : 0.0) - (pre > x ? 1.0 : 0.0);
    }
    return bracket / path.c();
}

long long crossing_count(const SamplePath& path, double t, double x) {
    std::size_t k = path.jump_count_at(t);
    double xt = path.evaluate(t);

    long long count = 0;
    if (x < xt) ++count;
    if (x < path.x0()) --count;
    for (std::size_t i = 1; i <= k; ++i) {
        if (path.value_at_jump(i) < x && x < path.value_before_jump(i)) ++count;
    }
    if (count < 0)
        throw std::logic_error(
            "crossing_count: negative count, path violates the counting identity preconditions");
    return count;
}

long long crossing_count_geometric(const SamplePath& path, double t, double x) {
    auto segs = path.segments(t);
    if (x == path.x0() || x == path.evaluate(t))
        throw std::domain_error("crossing_count_geometric: level equals an endpoint value");
    for (const Segment& s : segs) {
        if (x == s.v_start || x == s.v_end)
            throw std::domain_error("crossing_count_geometric: level equals an endpoint value");
    }
    long long count = 0;
    for (const Segment& s : segs)
        if (s.v_start < x && x < s.v_end) ++count;
    return count;
}

double tanaka_jump_sum(const SamplePath& path, double t, double x) {
    std::size_t k = path.jump_count_at(t);
    double sum = 0.0;
    for (std::size_t i = 1; i <= k; ++i) {
        double post = path.value_at_jump(i);
        double pre = path.value_before_jump(i);
        // Straddling jumps have dX != 0 and contribute dX/dX = 1 each.
        if (post < x && x < pre) sum += 1.0;
    }
    return sum;
}

double approx_local_time(const SamplePath& path, double t, double x, long long n) {
    if (n < 1) throw std::invalid_argument("approx_local_time: n must be >= 1");
    MollifiedStep phi{x, n};
    double w_lo = phi.lower();
    double w_hi = phi.upper();

    double partial_len = 0.0;  // overlap lengths of partially covered windows
    long long full = 0;        // segments traversing the whole window
    for (const Segment& s : path.segments(t)) {
        if (s.v_start < w_lo && s.v_end > w_hi) {
            ++full;
            continue;
        }
        double lo = std::max(s.v_start, w_lo);
        double hi = std::min(s.v_end, w_hi);
        if (hi > lo) partial_len += hi - lo;
    }

    double jump_dot = 0.0;  // sum of phi'(X_{s-}) dX_s without the n/2 factor
    std::size_t k = path.jump_count_at(t);
    for (std::size_t i = 1; i <= k; ++i) {
        double pre = path.value_before_jump(i);
        if (pre > w_lo && pre < w_hi) jump_dot += path.value_at_jump(i) - pre;
    }

    double half_n = 0.5 * static_cast<double>(n);
    double c = path.c();
    return (half_n * partial_len) / c + static_cast<double>(full) / c + (half_n * jump_dot) / c;
}

std::vector<double> endpoint_values(const SamplePath& path, double t) {
    std::vector<double> vals;
    auto segs = path.segments(t);
    vals.reserve(2 * segs.size() + 2);
    vals.push_back(path.x0());
    vals.push_back(path.evaluate(t));
    for (const Segment& s : segs) {
        vals.push_back(s.v_start);
        vals.push_back(s.v_end);
    }
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    return vals;
}

long long exact_window_threshold(const SamplePath& path, double t, double x) {
    auto vals = endpoint_values(path, t);
    double dist = std::numeric_limits<double>::infinity();
    for (double v : vals) {
        if (v == x)
            throw std::domain_error("exact_window_threshold: level equals an endpoint value");
        dist = std::min(dist, std::abs(v - x));
    }
    if (!(dist > 0.0) || 1.0 / dist > 9e18)
        throw std::domain_error("exact_window_threshold: level indistinguishable from an endpoint");
    auto window_free = [&](long long n) {
        MollifiedStep phi{x, n};
        for (double v : vals)
            if (v >= phi.lower() && v <= phi.upper()) return false;
        return true;
    };
    long long n = std::max(1LL, static_cast<long long>(std::floor(1.0 / dist)) + 1);
    while (!window_free(n)) ++n;  // settles rounding at the window edges
    return n;
}

}  // namespace risklt
