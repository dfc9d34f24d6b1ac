#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace risklt {

// ---------------------------------------------------------------------------
// Random number plumbing.
//
// Everything downstream of a seed is pinned so that results are reproducible
// across runs and platforms: the engine is std::mt19937_64 (fully specified by
// the standard), uniforms take the top 53 bits offset by half a grid step so
// they land strictly inside (0,1), and exponentials are inverse-CDF transforms
// of those uniforms.  No std::*_distribution is used (their streams are not
// portable across standard libraries).
// ---------------------------------------------------------------------------

inline double uniform_open01(std::mt19937_64& gen) {
    return (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
}

// Exponential(rate) variate, strictly positive.
inline double exponential_sample(std::mt19937_64& gen, double rate) {
    return -std::log(uniform_open01(gen)) / rate;
}

// Seed for path #index under a master seed: the (index+1)-th output of the
// splitmix64 stream started at master.  Closed form, O(1) per index.
inline std::uint64_t derive_path_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------
// Claim size model.  Exponential(beta) is the fully supported law (analytic
// formulas need it); any nonnegative absolutely continuous law can be plugged
// in for simulation through the custom constructor.
// ---------------------------------------------------------------------------

class ClaimModel {
  public:
    enum class Kind { exponential, custom };

    static ClaimModel exponential(double beta) {
        if (!(beta > 0.0) || !std::isfinite(beta))
            throw std::invalid_argument("ClaimModel: beta must be positive and finite");
        ClaimModel m;
        m.kind_ = Kind::exponential;
        m.beta_ = beta;
        return m;
    }

    // Custom nonnegative law given by density, cdf and sampler.  Not
    // serializable; analytic routines reject it.
    static ClaimModel custom(std::string name,
                             std::function<double(double)> density,
                             std::function<double(double)> cdf,
                             std::function<double(std::mt19937_64&)> sampler) {
        if (!density || !cdf || !sampler)
            throw std::invalid_argument("ClaimModel: custom law needs density, cdf and sampler");
        ClaimModel m;
        m.kind_ = Kind::custom;
        m.custom_ = std::make_shared<Custom>(Custom{std::move(name), std::move(density),
                                                    std::move(cdf), std::move(sampler)});
        return m;
    }

    Kind kind() const { return kind_; }

    bool is_exponential() const { return kind_ == Kind::exponential; }

    double beta() const {
        if (kind_ != Kind::exponential)
            throw std::logic_error("ClaimModel: beta() only defined for the exponential law");
        return beta_;
    }

    const std::string& name() const {
        static const std::string kExp = "exponential";
        return kind_ == Kind::exponential ? kExp : custom_->name;
    }

    double density(double y) const {
        if (kind_ == Kind::exponential) return y <= 0.0 ? 0.0 : beta_ * std::exp(-beta_ * y);
        return custom_->density(y);
    }

    double cdf(double y) const {
        if (kind_ == Kind::exponential) return y <= 0.0 ? 0.0 : -std::expm1(-beta_ * y);
        return custom_->cdf(y);
    }

    double sample(std::mt19937_64& gen) const {
        double r = kind_ == Kind::exponential ? exponential_sample(gen, beta_)
                                              : custom_->sampler(gen);
        if (!(r >= 0.0) || !std::isfinite(r))
            throw std::runtime_error("ClaimModel: sampler produced a negative or non-finite claim");
        return r;
    }

    friend bool operator==(const ClaimModel& a, const ClaimModel& b) {
        if (a.kind_ != b.kind_) return false;
        if (a.kind_ == Kind::exponential) return a.beta_ == b.beta_;
        return a.custom_ == b.custom_;
    }

  private:
    struct Custom {
        std::string name;
        std::function<double(double)> density;
        std::function<double(double)> cdf;
        std::function<double(std::mt19937_64&)> sampler;
    };

    Kind kind_ = Kind::exponential;
    double beta_ = 1.0;
    std::shared_ptr<const Custom> custom_;
};

// ---------------------------------------------------------------------------
// Model parameters of the surplus process X_t = x0 + c t - sum of claims.
// ---------------------------------------------------------------------------

struct ModelParams {
    double x0 = 0.0;               // initial capital, >= 0
    double c = 1.0;                // premium rate, > 0
    double alpha = 1.0;            // claim arrival intensity, > 0
    ClaimModel claims = ClaimModel::exponential(1.0);

    void validate() const {
        if (!(x0 >= 0.0) || !std::isfinite(x0))
            throw std::invalid_argument("ModelParams: x0 must be >= 0 and finite");
        if (!(c > 0.0) || !std::isfinite(c))
            throw std::invalid_argument("ModelParams: c must be > 0 and finite");
        if (!(alpha > 0.0) || !std::isfinite(alpha))
            throw std::invalid_argument("ModelParams: alpha must be > 0 and finite");
    }

    friend bool operator==(const ModelParams& a, const ModelParams& b) {
        return a.x0 == b.x0 && a.c == b.c && a.alpha == b.alpha && a.claims == b.claims;
    }
};

// One maximal linear piece of a path: on (t_start, t_end] the value moves from
// just above v_start to v_end with slope c.  v_start is the path value at
// t_start (after the jump there, if any), v_end the value at t_end before any
// jump at t_end.
struct Segment {
    double t_start;
    double t_end;
    double v_start;
    double v_end;
};

// ---------------------------------------------------------------------------
// A realized path: jump times with claim sizes under fixed parameters.
// Immutable after construction.  Values at and between jumps are anchored per
// segment: evaluate(t) returns anchor_k + c * (t - T_k) with k the number of
// jumps <= t, which makes path evaluation bit-identical with the segment
// decomposition and keeps jumps non-increasing at floating-point level.
// ---------------------------------------------------------------------------

class SamplePath {
  public:
    SamplePath(ModelParams params, double horizon, std::vector<double> jump_times,
               std::vector<double> claim_sizes);

    const ModelParams& params() const { return params_; }
    double x0() const { return params_.x0; }
    double c() const { return params_.c; }
    double horizon() const { return horizon_; }

    std::size_t jump_count() const { return jump_times_.size(); }
    const std::vector<double>& jump_times() const { return jump_times_; }
    const std::vector<double>& claim_sizes() const { return claim_sizes_; }

    // Number of jumps at or before t / strictly before t.
    std::size_t jump_count_at(double t) const;
    std::size_t jump_count_before(double t) const;

    // Path value at the i-th jump time (after the jump); index 0 is the start
    // value x0 at time 0.
    double value_at_jump(std::size_t i) const { return anchors_[i]; }
    // Path value just before the i-th jump, i in [1, jump_count()].
    double value_before_jump(std::size_t i) const { return pre_jump_[i - 1]; }

    // X_t and X_{t-}; t must lie in [0, horizon].
    double evaluate(double t) const;
    double evaluate_left(double t) const;

    // Maximal linear pieces covering (0, t]; empty for t = 0, and the
    // degenerate last piece is dropped when t coincides with a jump time.
    std::vector<Segment> segments(double t) const;

    friend bool operator==(const SamplePath& a, const SamplePath& b) {
        return a.params_ == b.params_ && a.horizon_ == b.horizon_ &&
               a.jump_times_ == b.jump_times_ && a.claim_sizes_ == b.claim_sizes_;
    }

  private:
    void check_time(double t) const;

    ModelParams params_;
    double horizon_;
    std::vector<double> jump_times_;
    std::vector<double> claim_sizes_;
    std::vector<double> anchors_;    // value at time 0 and after each jump
    std::vector<double> pre_jump_;   // value just before each jump
};

// Simulate one path on (0, horizon] from the given seed.  Draw order per jump
// is pinned: inter-arrival first, then (only if the jump is accepted) its
// claim size.  A jump landing exactly at the horizon is included.
SamplePath simulate(const ModelParams& params, double horizon, std::uint64_t seed);

// JSON round trip.  Field names are stable:
//   {"x0","c","alpha","claims":{"kind":"exponential","beta"},
//    "horizon","jump_times","claim_sizes"}
// Unknown keys are rejected.  indent < 0 means compact output.
std::string path_to_json_string(const SamplePath& path, int indent = -1);
SamplePath path_from_json_string(const std::string& text);

}  // namespace risklt
