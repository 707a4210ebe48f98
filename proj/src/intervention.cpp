#include "medshift/intervention.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace medshift {

void InterventionSpec::validate(int n_a_levels) const {
    switch (kind) {
        case InterventionKind::identity:
            break;
        case InterventionKind::odds_tilt:
            if (!(delta > 0.0)) throw std::invalid_argument("odds_tilt requires delta > 0");
            if (n_a_levels != 2)
                throw std::invalid_argument("odds_tilt requires a binary treatment");
            break;
        case InterventionKind::exp_tilt:
            if (!std::isfinite(delta)) throw std::invalid_argument("exp_tilt delta must be finite");
            break;
        case InterventionKind::discrete_shift:
            if (delta != std::floor(delta) || delta < 0)
                throw std::invalid_argument("discrete_shift delta must be a nonnegative integer");
            if (delta >= n_a_levels)
                throw std::invalid_argument("discrete_shift delta must be below the level count");
            break;
    }
}

bool InterventionSpec::is_identity_valued() const {
    switch (kind) {
        case InterventionKind::identity: return true;
        case InterventionKind::odds_tilt: return delta == 1.0;
        case InterventionKind::exp_tilt: return delta == 0.0;
        case InterventionKind::discrete_shift: return delta == 0.0;
    }
    return false;
}

std::string InterventionSpec::name() const {
    switch (kind) {
        case InterventionKind::identity: return "identity";
        case InterventionKind::odds_tilt: return "odds_tilt";
        case InterventionKind::exp_tilt: return "exp_tilt";
        case InterventionKind::discrete_shift: return "discrete_shift";
    }
    return "?";
}

std::string InterventionSpec::to_json() const {
    nlohmann::json j;
    j["kind"] = name();
    j["delta"] = delta;
    return j.dump();
}

InterventionSpec InterventionSpec::parse(const std::string& kind_name, double delta) {
    InterventionSpec spec;
    spec.delta = delta;
    if (kind_name == "identity") {
        spec.kind = InterventionKind::identity;
        spec.delta = 0.0;
    } else if (kind_name == "odds_tilt")
        spec.kind = InterventionKind::odds_tilt;
    else if (kind_name == "exp_tilt")
        spec.kind = InterventionKind::exp_tilt;
    else if (kind_name == "discrete_shift")
        spec.kind = InterventionKind::discrete_shift;
    else
        throw std::invalid_argument("unknown intervention kind '" + kind_name +
                                    "' (expected identity, odds_tilt, exp_tilt, discrete_shift)");
    return spec;
}

InterventionSpec InterventionSpec::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    return parse(j.at("kind").get<std::string>(),
                 j.value("delta", 0.0));
}

int lower_support_index(const std::vector<double>& g_row, double threshold) {
    for (std::size_t i = 0; i < g_row.size(); ++i)
        if (g_row[i] > threshold) return static_cast<int>(i);
    throw std::invalid_argument("lower_support_index: g has no support");
}

int mtp_map(const InterventionSpec& spec, int a_idx, const std::vector<double>& g_row) {
    if (spec.kind == InterventionKind::identity) return a_idx;
    if (spec.kind != InterventionKind::discrete_shift)
        throw std::invalid_argument("mtp_map: not a modified treatment policy");
    int steps = static_cast<int>(spec.delta);
    int lo = lower_support_index(g_row);
    return a_idx > lo + steps ? a_idx - steps : a_idx;
}

std::vector<double> post_density(const InterventionSpec& spec, const std::vector<double>& g_row,
                                 const std::vector<double>& a_values) {
    const int na = static_cast<int>(g_row.size());
    spec.validate(na);
    std::vector<double> out(na, 0.0);
    switch (spec.kind) {
        case InterventionKind::identity:
            out = g_row;
            break;
        case InterventionKind::odds_tilt: {
            double g1 = g_row[1];
            double den = spec.delta * g1 + 1.0 - g1;
            out[1] = spec.delta * g1 / den;
            out[0] = 1.0 - out[1];
            break;
        }
        case InterventionKind::exp_tilt: {
            double norm = 0.0;
            for (int a = 0; a < na; ++a) {
                out[a] = std::exp(spec.delta * a_values[a]) * g_row[a];
                norm += out[a];
            }
            if (!(norm > 0.0))
                throw std::invalid_argument("post_density: degenerate g, zero tilt normalizer");
            for (int a = 0; a < na; ++a) out[a] /= norm;
            break;
        }
        case InterventionKind::discrete_shift: {
            for (int a = 0; a < na; ++a) out[mtp_map(spec, a, g_row)] += g_row[a];
            break;
        }
    }
    return out;
}

} // namespace medshift
