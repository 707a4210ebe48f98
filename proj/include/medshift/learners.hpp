#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "medshift/irls.hpp"

namespace medshift {

enum class LearnerKind { intercept_only, logistic_main_terms, saturated };

LearnerKind learner_from_string(const std::string& name);
std::string learner_to_string(LearnerKind kind);

struct LearnerSpec {
    LearnerKind kind = LearnerKind::saturated;
    double alpha = 0.5; // add-alpha smoothing for the saturated learner
};

// regression of a [0,1]-valued outcome on integer-coded covariates
class BinaryFit {
  public:
    double predict(const std::vector<double>& row) const;

    LearnerKind kind;
    double alpha = 0.0;
    // intercept_only / logistic_main_terms
    IrlsResult glm;
    // saturated: per covariate pattern, (weighted sum y, weighted count);
    // global_mean backs empty unsmoothed strata
    std::map<std::vector<double>, std::pair<double, double>> strata;
    double global_mean = 0.0;
};

BinaryFit fit_binary(const LearnerSpec& spec, const std::vector<std::vector<double>>& x,
                     const std::vector<double>& y, const std::vector<double>& weights);

// regression of an outcome with n_levels categories (coded 0..K-1)
class CategoricalFit {
  public:
    std::vector<double> predict(const std::vector<double>& row) const;

    LearnerKind kind;
    std::size_t n_levels = 0;
    double alpha = 0.0;
    std::vector<double> marginal;        // intercept_only
    std::vector<IrlsResult> one_vs_rest; // logistic_main_terms
    std::map<std::vector<double>, std::vector<double>> strata; // weighted counts per level
};

CategoricalFit fit_categorical(const LearnerSpec& spec, const std::vector<std::vector<double>>& x,
                               const std::vector<std::size_t>& y, std::size_t n_levels,
                               const std::vector<double>& weights);

} // namespace medshift
