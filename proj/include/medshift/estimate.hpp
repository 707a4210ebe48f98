#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "medshift/dataset.hpp"
#include "medshift/eif.hpp"
#include "medshift/folds.hpp"
#include "medshift/intervention.hpp"
#include "medshift/nuisance.hpp"

namespace medshift {

struct EffectEstimate {
    double psi_d = 0, psi_i = 0;   // outcome units (back-scaled)
    double se_d = 0, se_i = 0;
    std::pair<double, double> ci_d{0, 0}, ci_i{0, 0};
    std::vector<double> eif_d, eif_i; // per-observation columns, outcome units

    struct Diagnostics {
        long clamp_events = 0;
        int tmle_iterations = 0;
        double score_d = 0, score_i = 0; // final score-equation residuals
        bool converged = true;
    } diagnostics;

    std::string to_json() const;
};

std::pair<double, double> wald_ci(double point, double se, double alpha);

// cross-fitted one-step estimator: empirical means of the fold-matched
// influence-function columns
EffectEstimate onestep(const Dataset& data, const std::vector<NuisanceTables>& tables,
                       const FoldPlan& folds, const InterventionSpec& spec,
                       bool use_stabilization = false, double alpha = 0.05);

// targeted minimum loss estimator; binary treatment, tilt or identity specs.
// tol_factor scales the default stopping rule sigma_hat/(sqrt(n) log n).
EffectEstimate tmle(const Dataset& data, std::vector<NuisanceTables> tables,
                    const FoldPlan& folds, const InterventionSpec& spec, double alpha = 0.05,
                    int max_iter = 100, double tol_factor = 1.0);

} // namespace medshift
