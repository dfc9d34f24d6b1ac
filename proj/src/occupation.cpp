#include "risklt/occupation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace risklt {

StepFunction::StepFunction(std::vector<double> breakpoints, std::vector<double> values)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
    if (values_.size() != breakpoints_.size() + 1)
        throw std::invalid_argument("StepFunction: need exactly one more value than breakpoints");
    for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
        if (!std::isfinite(breakpoints_[i]))
            throw std::invalid_argument("StepFunction: breakpoints must be finite");
        if (i > 0 && !(breakpoints_[i - 1] < breakpoints_[i]))
            throw std::invalid_argument("StepFunction: breakpoints must be strictly increasing");
    }
    for (double v : values_) {
        if (std::isnan(v)) throw std::invalid_argument("StepFunction: values must not be NaN");
    }
}

double StepFunction::operator()(double y) const {
    // Number of breakpoints strictly below y picks the piece; y equal to a
    // breakpoint belongs to the piece on its left.
    std::size_t idx = static_cast<std::size_t>(
        std::lower_bound(breakpoints_.begin(), breakpoints_.end(), y) - breakpoints_.begin());
    return values_[idx];
}

std::string step_to_json_string(const StepFunction& f, int indent) {
    nlohmann::json j;
    j["breakpoints"] = f.breakpoints();
    j["values"] = f.values();
    return j.dump(indent);
}

StepFunction step_from_json_string(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    for (const auto& item : j.items()) {
        if (item.key() != "breakpoints" && item.key() != "values")
            throw std::invalid_argument("StepFunction: unknown key \"" + item.key() + "\"");
    }
    return StepFunction(j.at("breakpoints").get<std::vector<double>>(),
                        j.at("values").get<std::vector<double>>());
}

std::string step_to_csv(const StepFunction& f) {
    std::string out = "breakpoint,value\n";
    char buf[64];
    for (std::size_t i = 0; i < f.breakpoints().size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", f.breakpoints()[i], f.values()[i]);
        out += buf;
    }
    std::snprintf(buf, sizeof buf, ",%.17g\n", f.values().back());
    out += buf;
    return out;
}

double occupation_measure(const SamplePath& path, double t, double a, double b) {
    if (!(a < b) || !std::isfinite(a) || !std::isfinite(b))
        throw std::domain_error("occupation_measure: need finite a < b");
    double total = 0.0;
    for (const Segment& s : path.segments(t)) {
        double overlap = std::min(b, s.v_end) - std::max(a, s.v_start);
        if (overlap > 0.0) total += overlap;
    }
    return total / path.c();
}

LocalTimeProfile local_time_profile(const SamplePath& path, double t) {
    double half_atom = 1.0 / (2.0 * path.c());
    std::array<Atom, 2> atoms{Atom{path.x0(), half_atom}, Atom{path.evaluate(t), half_atom}};

    auto segs = path.segments(t);
    if (segs.empty()) return LocalTimeProfile{StepFunction{}, atoms};

    std::vector<double> levels;
    levels.reserve(2 * segs.size());
    for (const Segment& s : segs) {
        levels.push_back(s.v_start);
        levels.push_back(s.v_end);
    }
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

    auto index_of = [&](double v) {
        return static_cast<std::size_t>(
            std::lower_bound(levels.begin(), levels.end(), v) - levels.begin());
    };

    // Segment i covers the piece (levels[j], levels[j+1]] exactly when
    // index(v_start) <= j < index(v_end): sweep with a difference array.
    std::vector<double> delta(levels.size() + 1, 0.0);
    for (const Segment& s : segs) {
        delta[index_of(s.v_start)] += 1.0;
        delta[index_of(s.v_end)] -= 1.0;
    }

    std::vector<double> values(levels.size() + 1, 0.0);
    double inv_c = 1.0 / path.c();
    double count = 0.0;
    for (std::size_t j = 0; j + 1 < levels.size(); ++j) {
        count += delta[j];
        values[j + 1] = count * inv_c;
    }
    return LocalTimeProfile{StepFunction(std::move(levels), std::move(values)), atoms};
}

double occupation_integral(const StepFunction& profile, const StepFunction& g) {
    if (profile.values().front() * g.values().front() != 0.0 ||
        profile.values().back() * g.values().back() != 0.0)
        throw std::invalid_argument("occupation_integral: product has unbounded support");

    std::vector<double> merged;
    merged.reserve(profile.breakpoints().size() + g.breakpoints().size());
    std::merge(profile.breakpoints().begin(), profile.breakpoints().end(),
               g.breakpoints().begin(), g.breakpoints().end(), std::back_inserter(merged));
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());

    double total = 0.0;
    for (std::size_t j = 0; j + 1 < merged.size(); ++j) {
        // Piece (merged[j], merged[j+1]]: both factors are constant there and
        // equal to their value at the right endpoint.
        total += (merged[j + 1] - merged[j]) * profile(merged[j + 1]) * g(merged[j + 1]);
    }
    return total;
}

double time_integral(const SamplePath& path, double t, const StepFunction& g) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    const auto& bp = g.breakpoints();
    const auto& val = g.values();
    const auto segs = path.segments(t);

    double total = 0.0;
    for (std::size_t j = 0; j < val.size(); ++j) {
        if (val[j] == 0.0) continue;
        double lo = j == 0 ? -kInf : bp[j - 1];
        double hi = j == bp.size() ? kInf : bp[j];
        double occ = 0.0;
        for (const Segment& s : segs) {
            double overlap = std::min(hi, s.v_end) - std::max(lo, s.v_start);
            if (overlap > 0.0) occ += overlap;
        }
        total += val[j] * (occ / path.c());
    }
    return total;
}

}  // namespace risklt
