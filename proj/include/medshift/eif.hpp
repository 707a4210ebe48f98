#pragma once

#include <vector>

#include "medshift/dataset.hpp"
#include "medshift/folds.hpp"
#include "medshift/intervention.hpp"
#include "medshift/nuisance.hpp"

namespace medshift {

// Per-observation influence function value, split into the pieces that the
// weight-stabilization step rescales separately: d_j = resid + cent + plug
// + score, where resid is the H^j(y - m) residual, cent the density-ratio
// weighted centered terms, plug the per-w plug-in constant, and score the
// treatment efficient score.
struct EifValue {
    double resid1 = 0, cent1 = 0, plug1 = 0, score1 = 0;
    double resid2 = 0, cent2 = 0, plug2 = 0, score2 = 0;
    double h1 = 0, h2 = 0, gd_ratio = 0;

    double d(int j) const {
        return j == 1 ? resid1 + cent1 + plug1 + score1 : resid2 + cent2 + plug2 + score2;
    }
};

// which treatment-score formula to use; automatic picks the shift form for
// discrete_shift specs and the tilt form otherwise, corollary is the binary-A
// closed form available for tilt specs
enum class ScoreBranch { automatic, tilt, corollary };

double h_ratio(int j, const NuisanceTables& t, const std::vector<double>& g_delta, int w, int a,
               int l, int z);

double score_a(int j, const NuisanceTables& t, const InterventionSpec& spec,
               const std::vector<double>& g_delta, int w, int a, ScoreBranch branch);

EifValue eif_value(const NuisanceTables& t, const InterventionSpec& spec,
                   const std::vector<double>& a_values, int w, int a, int l, int z, double y,
                   ScoreBranch branch = ScoreBranch::automatic);

// fold-matched per-row evaluation
std::vector<EifValue> eif_columns(const Dataset& data, const std::vector<NuisanceTables>& tables,
                                  const FoldPlan& folds, const InterventionSpec& spec,
                                  ScoreBranch branch = ScoreBranch::automatic);

// divide the residual terms by the empirical mean of H^j and the centered
// and score terms by the empirical mean of g_delta/g
std::vector<EifValue> stabilize(const std::vector<EifValue>& values);

} // namespace medshift
