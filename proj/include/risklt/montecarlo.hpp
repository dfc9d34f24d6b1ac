#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "risklt/intervals.hpp"
#include "risklt/occupation.hpp"
#include "risklt/process.hpp"

namespace risklt {

// Monte Carlo point estimate; std_error is the unbiased sample standard
// deviation divided by sqrt(n_paths).  Reproducible from (master_seed,
// n_paths) alone: path i always uses the i-th derived seed, and accumulation
// is order-insensitive, so the result is independent of thread count.
struct Estimate {
    double mean;
    double std_error;
    long long n_paths;
    std::uint64_t master_seed;

    friend bool operator==(const Estimate&, const Estimate&) = default;
};

// JSON with field names {"mean","std_error","n_paths","master_seed"}.
std::string estimate_to_json_string(const Estimate& e, int indent = -1);

// Deterministic pairwise (tree) summation; independent of how the values were
// produced, which pins the floating-point result across thread counts.
double pairwise_sum(const std::vector<double>& values);

// Mean/std error of local_time_at(path, t, x) over n_paths >= 2 paths
// simulated to horizon t; path i uses derive_path_seed(master_seed, i).
Estimate mc_expected_local_time(const ModelParams& params, double t, double x, long long n_paths,
                                std::uint64_t master_seed, int n_threads = 1);

// Mean/std error of the exact per-path time integral
//   int_0^t 1_A(X_s) * 1_B(X_{s+eps} - X_s) ds
// over n_paths >= 2 paths simulated to horizon t + eps.  The integral is
// computed on the event grid made of jump times and eps-shifted jump times,
// never by time discretization.
Estimate mc_theorem2_lhs(const ModelParams& params, double t, double eps, const IntervalSet& A,
                         const IntervalSet& B, long long n_paths, std::uint64_t master_seed,
                         int n_threads = 1);

// Max over n_paths >= 1 simulated paths of
//   |time_integral(path, t, g) - occupation_integral(local_time_profile, g)|,
// which the occupation identity makes numerically zero.
double mc_occupation_identity(const ModelParams& params, double t, long long n_paths,
                              std::uint64_t master_seed, const StepFunction& g,
                              int n_threads = 1);

}  // namespace risklt
