#include "medshift/irls.hpp"
#include <cstdio>

#include <cmath>
#include <stdexcept>
#include <string>

#include "medshift/common.hpp"

namespace medshift {

namespace {

// solve (A + lambda I) x = rhs in place via Cholesky with a small jitter
// fallback; A is symmetric positive semidefinite, p x p row-major
std::vector<double> solve_spd(std::vector<double> a, std::vector<double> rhs, std::size_t p,
                              double lambda) {
    for (std::size_t i = 0; i < p; ++i) a[i * p + i] += lambda;
    for (int attempt = 0; attempt < 6; ++attempt) {
        std::vector<double> chol(a);
        bool ok = true;
        for (std::size_t j = 0; j < p && ok; ++j) {
            double diag = chol[j * p + j];
            for (std::size_t k = 0; k < j; ++k) diag -= chol[j * p + k] * chol[j * p + k];
            if (diag <= 0.0) {
                ok = false;
                break;
            }
            chol[j * p + j] = std::sqrt(diag);
            for (std::size_t i = j + 1; i < p; ++i) {
                double v = chol[i * p + j];
                for (std::size_t k = 0; k < j; ++k) v -= chol[i * p + k] * chol[j * p + k];
                chol[i * p + j] = v / chol[j * p + j];
            }
        }
        if (!ok) {
            double jitter = (lambda > 0 ? lambda : 1e-12) * 100.0;
            for (std::size_t i = 0; i < p; ++i) a[i * p + i] += jitter;
            lambda = jitter;
            continue;
        }
        // forward/back substitution
        std::vector<double> x(rhs);
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t k = 0; k < i; ++k) x[i] -= chol[i * p + k] * x[k];
            x[i] /= chol[i * p + i];
        }
        for (std::size_t ii = p; ii-- > 0;) {
            for (std::size_t k = ii + 1; k < p; ++k) x[ii] -= chol[k * p + ii] * x[k];
            x[ii] /= chol[ii * p + ii];
        }
        return x;
    }
    throw std::runtime_error("solve_spd: matrix not positive definite");
}

struct WorkingFit {
    std::vector<double> coef;
    double loglik = 0.0;
    double score_norm = 0.0;
};

} // namespace

IrlsResult fit_logistic_irls(const std::vector<double>& design, std::size_t n_cols,
                             const std::vector<double>& y, const std::vector<double>& weights,
                             const std::vector<double>& offset, const IrlsOptions& opts) {
    const std::size_t n = y.size();
    if (n == 0) throw std::invalid_argument("fit_logistic_irls: empty data");
    if (design.size() != n * n_cols)
        throw std::invalid_argument("fit_logistic_irls: design size mismatch");
    if (weights.size() != n || offset.size() != n)
        throw std::invalid_argument("fit_logistic_irls: weights/offset size mismatch");
    if (!(opts.tol > 0.0)) throw std::invalid_argument("fit_logistic_irls: tol must be positive");
    const std::size_t p = n_cols + (opts.intercept ? 1 : 0);

    auto feature = [&](std::size_t i, std::size_t j) -> double {
        if (opts.intercept) return j == 0 ? 1.0 : design[i * n_cols + (j - 1)];
        return design[i * n_cols + j];
    };
    auto eta_of = [&](const std::vector<double>& coef, std::size_t i) {
        double eta = offset[i];
        for (std::size_t j = 0; j < p; ++j) eta += coef[j] * feature(i, j);
        return eta;
    };
    auto loglik_of = [&](const std::vector<double>& coef) {
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (weights[i] == 0.0) continue;
            // degenerate offsets pin mu at 0 or 1; the contribution is
            // coefficient-free, so the row drops out of the fit
            if (!std::isfinite(offset[i])) continue;
            double eta = eta_of(coef, i);
            // quasi-binomial log-likelihood, stable via log1p
            double log1pe = eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
            ll += weights[i] * (y[i] * eta - log1pe);
        }
        return ll;
    };

    // p == 0: nothing to fit, the fixed offset is the model
    if (p == 0) return IrlsResult{{}, true, 0, 0.0, false};

    // per-column score magnitude, for the stall tolerance below
    std::vector<double> col_scale(p, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (weights[i] == 0.0 || !std::isfinite(offset[i])) continue;
        for (std::size_t j = 0; j < p; ++j)
            col_scale[j] += weights[i] * std::abs(feature(i, j));
    }

    // the likelihood is a sum of n O(1) terms, so its floating-point noise
    // grows like sqrt(n) relative to eps
    const double floor_scale = 1.5e-8 * std::sqrt(static_cast<double>(n));

    auto run = [&](double lambda) {
        IrlsResult res;
        res.coef.assign(p, 0.0);
        double ll = loglik_of(res.coef) - 0.5 * lambda * 0.0;
        for (res.iterations = 0; res.iterations < opts.max_iter; ++res.iterations) {
            std::vector<double> score(p, 0.0), info(p * p, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                if (weights[i] == 0.0) continue;
                if (!std::isfinite(offset[i])) continue;
                double mu = expit(eta_of(res.coef, i));
                double resid = weights[i] * (y[i] - mu);
                double wv = weights[i] * mu * (1.0 - mu);
                for (std::size_t j = 0; j < p; ++j) {
                    double xj = feature(i, j);
                    score[j] += resid * xj;
                    for (std::size_t k = 0; k <= j; ++k) info[j * p + k] += wv * xj * feature(i, k);
                }
            }
            for (std::size_t j = 0; j < p; ++j) {
                score[j] -= lambda * res.coef[j];
                for (std::size_t k = j + 1; k < p; ++k) info[j * p + k] = info[k * p + j];
            }
            res.score_norm = 0.0;
            for (double s : score) res.score_norm = std::max(res.score_norm, std::abs(s));
            if (res.score_norm <= opts.tol) {
                res.converged = true;
                return res;
            }
            if (opts.relative_floor) {
                bool small = true;
                for (std::size_t j = 0; j < p; ++j)
                    if (std::abs(score[j]) > floor_scale * col_scale[j]) small = false;
                if (small) {
                    res.converged = true;
                    return res;
                }
            }
            std::vector<double> step = solve_spd(info, score, p, lambda);
            // step halving on likelihood decrease
            double scale = 1.0;
            std::vector<double> trial(p);
            bool stepped = false;
            for (int half = 0; half < 30; ++half) {
                for (std::size_t j = 0; j < p; ++j) trial[j] = res.coef[j] + scale * step[j];
                double pen = 0.0;
                for (std::size_t j = 0; j < p; ++j) pen += trial[j] * trial[j];
                double ll_trial = loglik_of(trial) - 0.5 * lambda * pen;
                if (ll_trial >= ll - 1e-14) {
                    res.coef = trial;
                    ll = ll_trial;
                    stepped = true;
                    break;
                }
                scale *= 0.5;
            }
            if (!stepped) {
                // the likelihood cannot improve at floating-point
                // resolution; accept the fit if every score component is
                // below the sqrt(eps)-scaled floor
                bool small = true;
                for (std::size_t j = 0; j < p; ++j)
                    if (std::abs(score[j]) > floor_scale * col_scale[j]) small = false;
                res.converged = small && opts.relative_floor;
                break;
            }
        }
        return res;
    };

    IrlsResult res = run(0.0);
    bool separated = false;
    for (double c : res.coef)
        if (std::abs(c) > opts.separation_coef_bound) separated = true;
    if (separated || !res.converged) {
        IrlsResult ridged = run(opts.ridge_on_separation);
        ridged.ridged = true;
        if (ridged.converged) return ridged;
        res = ridged;
    }
    if (!res.converged) {
        char msg[160];
        std::snprintf(msg, sizeof msg,
                      "fit_logistic_irls: no convergence after %d iterations "
                      "(score norm %.3e, tol %.3e)",
                      res.iterations, res.score_norm, opts.tol);
        throw std::runtime_error(msg);
    }
    return res;
}

double irls_predict(const IrlsResult& fit, const std::vector<double>& row, double offset,
                    bool intercept) {
    double eta = offset;
    std::size_t j0 = 0;
    if (intercept) {
        eta += fit.coef.empty() ? 0.0 : fit.coef[0];
        j0 = 1;
    }
    for (std::size_t k = 0; k < row.size(); ++k) eta += fit.coef[j0 + k] * row[k];
    return expit(eta);
}

} // namespace medshift
