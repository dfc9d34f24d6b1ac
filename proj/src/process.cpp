#include "risklt/process.hpp"

#include <algorithm>

#include "json.hpp"

namespace risklt {

SamplePath::SamplePath(ModelParams params, double horizon, std::vector<double> jump_times,
                       std::vector<double> claim_sizes)
    : params_(std::move(params)),
      horizon_(horizon),
      jump_times_(std::move(jump_times)),
      claim_sizes_(std::move(claim_sizes)) {
    params_.validate();
    if (!(horizon_ >= 0.0) || !std::isfinite(horizon_))
        throw std::invalid_argument("SamplePath: horizon must be >= 0 and finite");
    if (jump_times_.size() != claim_sizes_.size())
        throw std::invalid_argument("SamplePath: jump_times and claim_sizes differ in length");

    double prev = 0.0;
    for (double t : jump_times_) {
        if (!std::isfinite(t) || !(t > prev) || !(t <= horizon_))
            throw std::invalid_argument(
                "SamplePath: jump times must be strictly increasing inside (0, horizon]");
        prev = t;
    }
    for (double r : claim_sizes_) {
        if (!(r >= 0.0) || !std::isfinite(r))
            throw std::invalid_argument("SamplePath: claim sizes must be >= 0 and finite");
    }

    // Anchor values, computed once.  anchor[i] = value after jump i; the
    // recursive form keeps every jump non-increasing even after rounding.
    anchors_.resize(jump_times_.size() + 1);
    pre_jump_.resize(jump_times_.size());
    anchors_[0] = params_.x0;
    double t_prev = 0.0;
    for (std::size_t i = 0; i < jump_times_.size(); ++i) {
        pre_jump_[i] = anchors_[i] + params_.c * (jump_times_[i] - t_prev);
        anchors_[i + 1] = pre_jump_[i] - claim_sizes_[i];
        t_prev = jump_times_[i];
    }
}

void SamplePath::check_time(double t) const {
    if (!(t >= 0.0) || !(t <= horizon_))
        throw std::domain_error("SamplePath: time outside [0, horizon]");
}

std::size_t SamplePath::jump_count_at(double t) const {
    check_time(t);
    return static_cast<std::size_t>(
        std::upper_bound(jump_times_.begin(), jump_times_.end(), t) - jump_times_.begin());
}

std::size_t SamplePath::jump_count_before(double t) const {
    check_time(t);
    return static_cast<std::size_t>(
        std::lower_bound(jump_times_.begin(), jump_times_.end(), t) - jump_times_.begin());
}

double SamplePath::evaluate(double t) const {
    std::size_t k = jump_count_at(t);
    double t_anchor = k == 0 ? 0.0 : jump_times_[k - 1];
    return anchors_[k] + params_.c * (t - t_anchor);
}

double SamplePath::evaluate_left(double t) const {
    std::size_t k = jump_count_before(t);
    double t_anchor = k == 0 ? 0.0 : jump_times_[k - 1];
    return anchors_[k] + params_.c * (t - t_anchor);
}

std::vector<Segment> SamplePath::segments(double t) const {
    std::size_t k = jump_count_at(t);
    std::vector<Segment> out;
    out.reserve(k + 1);
    double t_prev = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        out.push_back(Segment{t_prev, jump_times_[i], anchors_[i], pre_jump_[i]});
        t_prev = jump_times_[i];
    }
    if (t > t_prev)
        out.push_back(Segment{t_prev, t, anchors_[k], anchors_[k] + params_.c * (t - t_prev)});
    return out;
}

SamplePath simulate(const ModelParams& params, double horizon, std::uint64_t seed) {
    params.validate();
    if (!(horizon >= 0.0) || !std::isfinite(horizon))
        throw std::invalid_argument("simulate: horizon must be >= 0 and finite");

    std::mt19937_64 gen(seed);
    std::vector<double> times;
    std::vector<double> claims;
    double t = 0.0;
    for (;;) {
        double gap = exponential_sample(gen, params.alpha);
        double t_next = t + gap;
        if (t_next == t) continue;  // gap below time resolution; keep times strict
        if (t_next > horizon) break;
        t = t_next;
        times.push_back(t);
        claims.push_back(params.claims.sample(gen));
    }
    return SamplePath(params, horizon, std::move(times), std::move(claims));
}

namespace {

using nlohmann::json;

void require_keys(const json& j, std::initializer_list<const char*> keys, const char* what) {
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : keys)
            if (item.key() == k) known = true;
        if (!known)
            throw std::invalid_argument(std::string(what) + ": unknown key \"" + item.key() + "\"");
    }
    for (const char* k : keys) {
        if (!j.contains(k))
            throw std::invalid_argument(std::string(what) + ": missing key \"" + k + "\"");
    }
}

}  // namespace

std::string path_to_json_string(const SamplePath& path, int indent) {
    if (!path.params().claims.is_exponential())
        throw std::invalid_argument("path_to_json_string: only the exponential claim law serializes");
    json j;
    j["x0"] = path.x0();
    j["c"] = path.c();
    j["alpha"] = path.params().alpha;
    j["claims"] = {{"kind", "exponential"}, {"beta", path.params().claims.beta()}};
    j["horizon"] = path.horizon();
    j["jump_times"] = path.jump_times();
    j["claim_sizes"] = path.claim_sizes();
    return j.dump(indent);
}

SamplePath path_from_json_string(const std::string& text) {
    json j = json::parse(text);
    require_keys(j, {"x0", "c", "alpha", "claims", "horizon", "jump_times", "claim_sizes"},
                 "SamplePath");
    const json& cl = j.at("claims");
    require_keys(cl, {"kind", "beta"}, "SamplePath.claims");
    if (cl.at("kind").get<std::string>() != "exponential")
        throw std::invalid_argument("SamplePath: unsupported claim kind");
    ModelParams params;
    params.x0 = j.at("x0").get<double>();
    params.c = j.at("c").get<double>();
    params.alpha = j.at("alpha").get<double>();
    params.claims = ClaimModel::exponential(cl.at("beta").get<double>());
    return SamplePath(params, j.at("horizon").get<double>(),
                      j.at("jump_times").get<std::vector<double>>(),
                      j.at("claim_sizes").get<std::vector<double>>());
}

}  // namespace risklt
