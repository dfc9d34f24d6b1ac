#include "risklt/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <functional>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "risklt/localtime.hpp"

namespace risklt {

namespace {

double pairwise_block(const double* v, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    std::size_t half = n / 2;
    return pairwise_block(v, half) + pairwise_block(v + half, n - half);
}

// Fills out[i] = worker(i) for i in [0, n); identical result for every thread
// count because the assignment of index to slot never changes.
std::vector<double> fill_per_path(long long n, int n_threads,
                                  const std::function<double(long long)>& worker) {
    if (n_threads < 1) throw std::invalid_argument("n_threads must be >= 1");
    std::vector<double> out(static_cast<std::size_t>(n));
    if (n_threads == 1) {
        for (long long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = worker(i);
        return out;
    }
    long long chunk = (n + n_threads - 1) / n_threads;
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> failures(static_cast<std::size_t>(n_threads));
    for (int w = 0; w < n_threads; ++w) {
        long long lo = static_cast<long long>(w) * chunk;
        long long hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&out, &worker, &failures, lo, hi, w] {
            try {
                for (long long i = lo; i < hi; ++i) out[static_cast<std::size_t>(i)] = worker(i);
            } catch (...) {
                failures[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : failures)
        if (e) std::rethrow_exception(e);
    return out;
}

// Shifted pairwise mean and unbiased two-pass variance.  Centering on the
// first value makes runs with identical per-path values (e.g. an unreachable
// level) come out with an exact mean and a zero standard error.
Estimate summarize(const std::vector<double>& values, std::uint64_t master_seed) {
    const auto n = static_cast<long long>(values.size());
    const double base = values.front();
    std::vector<double> work(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) work[i] = values[i] - base;
    double mean = base + pairwise_sum(work) / static_cast<double>(n);
    for (std::size_t i = 0; i < values.size(); ++i) {
        double d = values[i] - mean;
        work[i] = d * d;
    }
    double variance = n > 1 ? pairwise_sum(work) / static_cast<double>(n - 1) : 0.0;
    return {mean, std::sqrt(std::max(variance, 0.0) / static_cast<double>(n)), n, master_seed};
}

void check_paths(long long n_paths, long long minimum) {
    if (n_paths < minimum) throw std::invalid_argument("n_paths below the estimator minimum");
}

}  // namespace

double pairwise_sum(const std::vector<double>& values) {
    return values.empty() ? 0.0 : pairwise_block(values.data(), values.size());
}

std::string estimate_to_json_string(const Estimate& e, int indent) {
    nlohmann::json j;
    j["mean"] = e.mean;
    j["std_error"] = e.std_error;
    j["n_paths"] = e.n_paths;
    j["master_seed"] = e.master_seed;
    return j.dump(indent);
}

Estimate mc_expected_local_time(const ModelParams& params, double t, double x, long long n_paths,
                                std::uint64_t master_seed, int n_threads) {
    params.validate();
    check_paths(n_paths, 2);
    if (!(t >= 0.0) || !std::isfinite(t))
        throw std::domain_error("mc_expected_local_time: t must be >= 0 and finite");
    auto worker = [&](long long i) {
        SamplePath path = simulate(params, t, derive_path_seed(master_seed, static_cast<std::uint64_t>(i)));
        return local_time_at(path, t, x);
    };
    return summarize(fill_per_path(n_paths, n_threads, worker), master_seed);
}

namespace {

// Exact time integral of 1_A(X_s) 1_B(X_{s+eps} - X_s) over [0, t] for one
// path simulated to t + eps.  Between consecutive event times (jump times and
// eps-shifted jump times) the increment is the constant c*eps minus the claims
// in the shifted window, and X_s sweeps an interval, so each cell contributes
// a value-overlap length.  Cells covered in full are merged into runs and
// added as run-length differences, which keeps g identically 1 integrating to
// exactly t.
double theorem2_path_integral(const SamplePath& path, double t, double eps, const IntervalSet& A,
                              const IntervalSet& B) {
    const auto& jumps = path.jump_times();
    const auto& claims = path.claim_sizes();
    const double drift = path.params().c * eps;

    std::vector<double> shifted(jumps.size());
    for (std::size_t i = 0; i < jumps.size(); ++i) shifted[i] = jumps[i] - eps;
    std::vector<double> prefix(claims.size() + 1, 0.0);
    for (std::size_t i = 0; i < claims.size(); ++i) prefix[i + 1] = prefix[i] + claims[i];

    std::vector<double> grid;
    grid.reserve(2 * jumps.size() + 2);
    grid.push_back(0.0);
    for (double s : shifted)
        if (s > 0.0 && s < t) grid.push_back(s);
    for (double s : jumps)
        if (s > 0.0 && s < t) grid.push_back(s);
    grid.push_back(t);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    const double c = path.params().c;
    double total = 0.0;
    bool in_run = false;
    double run_start = 0.0;
    double run_end = 0.0;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        double d = grid[k];
        double d2 = grid[k + 1];
        // Claims j with shifted[j] <= d and jumps[j] >= d2 sit in (s, s+eps]
        // for every s in the open cell; both index bounds are contiguous.
        auto hi = static_cast<std::size_t>(
            std::upper_bound(shifted.begin(), shifted.end(), d) - shifted.begin());
        auto lo = static_cast<std::size_t>(
            std::lower_bound(jumps.begin(), jumps.end(), d2) - jumps.begin());
        double increment = lo < hi ? drift - (prefix[hi] - prefix[lo]) : drift;
        if (!B.contains(increment)) {
            if (in_run) {
                total += run_end - run_start;
                in_run = false;
            }
            continue;
        }
        double v_lo = path.evaluate(d);
        double v_hi = path.evaluate_left(d2);
        bool full = false;
        for (const Interval& part : A.parts()) {
            if (part.lo <= v_lo && v_hi <= part.hi) {
                full = true;
                break;
            }
        }
        if (full) {
            if (!in_run) {
                run_start = d;
                in_run = true;
            }
            run_end = d2;
            continue;
        }
        if (in_run) {
            total += run_end - run_start;
            in_run = false;
        }
        double overlap = 0.0;
        for (const Interval& part : A.parts()) {
            double w = std::min(v_hi, part.hi) - std::max(v_lo, part.lo);
            if (w > 0.0) overlap += w;
        }
        total += overlap / c;
    }
    if (in_run) total += run_end - run_start;
    return total;
}

}  // namespace

Estimate mc_theorem2_lhs(const ModelParams& params, double t, double eps, const IntervalSet& A,
                         const IntervalSet& B, long long n_paths, std::uint64_t master_seed,
                         int n_threads) {
    params.validate();
    check_paths(n_paths, 2);
    if (!(t > 0.0) || !std::isfinite(t))
        throw std::domain_error("mc_theorem2_lhs: t must be > 0 and finite");
    if (!(eps > 0.0) || !std::isfinite(eps))
        throw std::domain_error("mc_theorem2_lhs: eps must be > 0 and finite");
    auto worker = [&](long long i) {
        SamplePath path =
            simulate(params, t + eps, derive_path_seed(master_seed, static_cast<std::uint64_t>(i)));
        return theorem2_path_integral(path, t, eps, A, B);
    };
    return summarize(fill_per_path(n_paths, n_threads, worker), master_seed);
}

double mc_occupation_identity(const ModelParams& params, double t, long long n_paths,
                              std::uint64_t master_seed, const StepFunction& g, int n_threads) {
    params.validate();
    check_paths(n_paths, 1);
    if (!(t >= 0.0) || !std::isfinite(t))
        throw std::domain_error("mc_occupation_identity: t must be >= 0 and finite");
    auto worker = [&](long long i) {
        SamplePath path = simulate(params, t, derive_path_seed(master_seed, static_cast<std::uint64_t>(i)));
        double lhs = time_integral(path, t, g);
        double rhs = occupation_integral(local_time_profile(path, t).density, g);
        return std::abs(lhs - rhs);
    };
    std::vector<double> discrepancies = fill_per_path(n_paths, n_threads, worker);
    return *std::max_element(discrepancies.begin(), discrepancies.end());
}

}  // namespace risklt
