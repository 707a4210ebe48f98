#pragma once

#include <string>
#include <utility>
#include <vector>

#include "medshift/discrete_law.hpp"
#include "medshift/eif.hpp"
#include "medshift/intervention.hpp"
#include "medshift/nuisance.hpp"

namespace medshift {

// exact target parameter by enumeration; j=1 draws the mediator given (a,w),
// j=2 given w alone
double oracle_theta(const DiscreteLaw& law, const InterventionSpec& spec, int j);

struct OracleEffects {
    double theta_1_null, theta_1_delta, theta_2_delta;
    double psi_d, psi_i;
};
OracleEffects oracle_effects(const DiscreteLaw& law, const InterventionSpec& spec);

// exact expectation of D^j assembled from eta1 (possibly misspecified), taken
// under the true law
double oracle_eif_mean(const DiscreteLaw& law, const InterventionSpec& spec, int j,
                       const NuisanceTables& eta1,
                       ScoreBranch branch = ScoreBranch::automatic);

// exact variances of the direct- and indirect-effect influence functions at
// the truth
std::pair<double, double> oracle_efficiency_bounds(const DiscreteLaw& law,
                                                   const InterventionSpec& spec);

// one consistency configuration of the robustness lemmas: the named entries
// of eta stay true, everything else is replaced by its intercept-only
// projection under the law
struct RobustnessConfig {
    std::string name;
    std::vector<NuisanceId> consistent;
};

// the six configurations, in the lemmas' order; configurations 1-4 also
// apply to tilt interventions
std::vector<RobustnessConfig> robustness_configs();

NuisanceTables configured_nuisances(const DiscreteLaw& law, const RobustnessConfig& config);

} // namespace medshift
