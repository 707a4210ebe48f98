#pragma once

#include <cstdint>
#include <vector>

namespace medshift {

struct IrlsOptions {
    double tol = 1e-10;
    int max_iter = 50;
    bool intercept = true;
    double ridge_on_separation = 1e-6;
    double separation_coef_bound = 30.0;
    // also accept scores below a sqrt(eps) floor scaled by each column's
    // total weighted magnitude; for ill-conditioned offset tilts where the
    // absolute tol sits beneath floating-point resolution
    bool relative_floor = false;
};

struct IrlsResult {
    std::vector<double> coef;   // intercept first when requested
    bool converged = false;
    int iterations = 0;
    double score_norm = 0.0;    // max absolute score component at exit
    bool ridged = false;        // separation detected, ridge refit applied
};

// Weighted quasi-binomial logistic regression with a fixed offset,
// fit by Newton iterations with step halving. `design` is row-major with
// `n_cols` columns (not counting the intercept); responses may be any
// values in [0,1]. Throws on non-convergence.
IrlsResult fit_logistic_irls(const std::vector<double>& design, std::size_t n_cols,
                             const std::vector<double>& y, const std::vector<double>& weights,
                             const std::vector<double>& offset, const IrlsOptions& opts = {});

// fitted probability for one row given a fitted coefficient vector
double irls_predict(const IrlsResult& fit, const std::vector<double>& row, double offset,
                    bool intercept);

} // namespace medshift
