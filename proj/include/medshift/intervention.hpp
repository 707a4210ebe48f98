#pragma once

#include <string>
#include <vector>

namespace medshift {

enum class InterventionKind { identity, odds_tilt, exp_tilt, discrete_shift };

// A stochastic intervention on the treatment mechanism. delta carries the
// odds multiplier (odds_tilt, > 0), the tilting parameter (exp_tilt), or the
// number of support steps (discrete_shift, positive integer).
struct InterventionSpec {
    InterventionKind kind = InterventionKind::identity;
    double delta = 0.0;

    void validate(int n_a_levels) const;
    bool is_identity_valued() const;

    std::string to_json() const;
    static InterventionSpec from_json(const std::string& text);
    static InterventionSpec parse(const std::string& kind_name, double delta);
    std::string name() const;
};

// index of the lowest treatment level with positive mass under g(.|w)
int lower_support_index(const std::vector<double>& g_row, double threshold = 1e-12);

// modified treatment policy d(a, w): shift down by `steps` support steps
// unless within `steps` of the lower support bound
int mtp_map(const InterventionSpec& spec, int a_idx, const std::vector<double>& g_row);

// post-intervention density g_delta(.|w) given the natural g(.|w)
std::vector<double> post_density(const InterventionSpec& spec, const std::vector<double>& g_row,
                                 const std::vector<double>& a_values);

} // namespace medshift
