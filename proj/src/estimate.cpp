#include "medshift/estimate.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "medshift/common.hpp"
#include "medshift/irls.hpp"

namespace medshift {

namespace {

double mean_of(const std::vector<double>& xs) {
    double total = 0.0;
    for (double x : xs) total += x;
    return total / static_cast<double>(xs.size());
}

double sd_of(const std::vector<double>& xs) {
    const double mu = mean_of(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - mu) * (x - mu);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

void fill_estimate(EffectEstimate& est, const std::vector<double>& col_d,
                   const std::vector<double>& col_i, double y_scale, double alpha) {
    const double n = static_cast<double>(col_d.size());
    est.psi_d = mean_of(col_d) * y_scale;
    est.psi_i = mean_of(col_i) * y_scale;
    est.se_d = sd_of(col_d) * y_scale / std::sqrt(n);
    est.se_i = sd_of(col_i) * y_scale / std::sqrt(n);
    est.ci_d = wald_ci(est.psi_d, est.se_d, alpha);
    est.ci_i = wald_ci(est.psi_i, est.se_i, alpha);
    est.eif_d.resize(col_d.size());
    est.eif_i.resize(col_i.size());
    // center so the stored columns are the estimated influence function
    const double mu_d = mean_of(col_d), mu_i = mean_of(col_i);
    for (std::size_t i = 0; i < col_d.size(); ++i) {
        est.eif_d[i] = (col_d[i] - mu_d) * y_scale;
        est.eif_i[i] = (col_i[i] - mu_i) * y_scale;
    }
}

} // namespace

std::string EffectEstimate::to_json() const {
    nlohmann::json j;
    j["psi_d"] = psi_d;
    j["psi_i"] = psi_i;
    j["se_d"] = se_d;
    j["se_i"] = se_i;
    j["ci_d"] = {ci_d.first, ci_d.second};
    j["ci_i"] = {ci_i.first, ci_i.second};
    j["diagnostics"] = {{"clamp_events", diagnostics.clamp_events},
                        {"tmle_iterations", diagnostics.tmle_iterations},
                        {"score_d", diagnostics.score_d},
                        {"score_i", diagnostics.score_i},
                        {"converged", diagnostics.converged}};
    return j.dump();
}

std::pair<double, double> wald_ci(double point, double se, double alpha) {
    if (se < 0) throw std::invalid_argument("wald_ci: negative standard error");
    const double half = z_value(alpha) * se;
    return {point - half, point + half};
}

EffectEstimate onestep(const Dataset& data, const std::vector<NuisanceTables>& tables,
                       const FoldPlan& folds, const InterventionSpec& spec,
                       bool use_stabilization, double alpha) {
    spec.validate(data.space.n_a());
    InterventionSpec identity;
    std::vector<EifValue> at_null = eif_columns(data, tables, folds, identity);
    std::vector<EifValue> at_delta = eif_columns(data, tables, folds, spec);
    if (use_stabilization) {
        at_null = stabilize(at_null);
        at_delta = stabilize(at_delta);
    }
    std::vector<double> col_d(data.n()), col_i(data.n());
    for (std::size_t i = 0; i < data.n(); ++i) {
        col_d[i] = at_null[i].d(1) - at_delta[i].d(2);
        col_i[i] = at_delta[i].d(2) - at_delta[i].d(1);
    }
    EffectEstimate est;
    fill_estimate(est, col_d, col_i, data.y_scale(), alpha);
    for (const NuisanceTables& t : tables) est.diagnostics.clamp_events += t.clamp_events;
    return est;
}

namespace {

// state shared across TMLE iterations: per-fold post-intervention densities
// (recomputed whenever g is tilted)
struct GdCache {
    std::vector<std::vector<double>> rows; // [fold * n_w + w]

    void refresh(const std::vector<NuisanceTables>& tables, const InterventionSpec& spec,
                 const std::vector<double>& a_values) {
        const int n_w = tables[0].n_w;
        rows.assign(tables.size() * n_w, {});
        for (std::size_t f = 0; f < tables.size(); ++f)
            for (int w = 0; w < n_w; ++w) {
                std::vector<double> g_row(tables[f].n_a);
                for (int a = 0; a < tables[f].n_a; ++a) g_row[a] = tables[f].g[tables[f].ia(w, a)];
                rows[f * n_w + w] = post_density(spec, g_row, a_values);
            }
    }
    const std::vector<double>& at(std::size_t fold, int n_w, int w) const {
        return rows[fold * n_w + w];
    }
};

IrlsResult fit_tilt(const char* name, const std::vector<double>& design, std::size_t n_cols,
                    const std::vector<double>& y, const std::vector<double>& weights,
                    const std::vector<double>& offset, IrlsOptions opts) {
    // the clever covariates carry density ratios that can reach ~1e3, so an
    // absolute score tolerance is unattainable; scale it by the score's own
    // floating-point noise floor
    const std::size_t p = n_cols + (opts.intercept ? 1 : 0);
    double scale = 1.0;
    for (std::size_t j = 0; j < p; ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            double xj = opts.intercept ? (j == 0 ? 1.0 : design[i * n_cols + j - 1])
                                       : design[i * n_cols + j];
            col += std::abs(xj);
        }
        scale = std::max(scale, col);
    }
    opts.tol = std::max(opts.tol, 1e-10 * scale);
    opts.relative_floor = true;
    try {
        return fit_logistic_irls(design, n_cols, y, weights, offset, opts);
    } catch (const std::exception& ex) {
        throw std::runtime_error(std::string("tmle: ") + name +
                                 " tilting model failed: " + ex.what());
    }
}

} // namespace

EffectEstimate tmle(const Dataset& data, std::vector<NuisanceTables> tables,
                    const FoldPlan& folds, const InterventionSpec& spec, double alpha,
                    int max_iter, double tol_factor) {
    const StateSpace& sp = data.space;
    spec.validate(sp.n_a());
    if (sp.n_a() != 2)
        throw std::invalid_argument("tmle: binary treatment required");
    if (spec.kind == InterventionKind::discrete_shift)
        throw std::invalid_argument("tmle: shift interventions are not supported; use onestep");
    if (folds.assignment.size() != data.n())
        throw std::invalid_argument("tmle: fold plan does not match dataset");
    const std::size_t n = data.n();
    const int n_w = sp.n_w(), n_z = sp.n_z();
    const InterventionSpec identity;

    EffectEstimate est;
    for (const NuisanceTables& t : tables) est.diagnostics.clamp_events += t.clamp_events;

    IrlsOptions tilt_opts;
    tilt_opts.max_iter = 100;

    GdCache gd;
    const std::vector<double> ones(n, 1.0);
    std::vector<double> yl(n), ya(n);
    for (std::size_t i = 0; i < n; ++i) {
        yl[i] = data.l[i];
        ya[i] = data.a[i];
    }

    double psi_d_plug = 0, psi_i_plug = 0;
    std::vector<double> col_d(n), col_i(n);
    bool converged = false;
    int iter = 0;
    for (; iter < max_iter && !converged; ++iter) {
        // refresh the secondary nuisances from the current tilted tables
        for (NuisanceTables& t : tables) {
            t.derive_secondary_exact();
            t.finalize();
        }
        gd.refresh(tables, spec, sp.a_values);

        // m tilt on (H_D, H_I)
        {
            std::vector<double> design(n * 2), offset(n);
            for (std::size_t i = 0; i < n; ++i) {
                const NuisanceTables& t = tables[folds.assignment[i]];
                const int w = data.w[i], a = data.a[i], l = data.l[i], z = data.z[i];
                const std::vector<double>& gdr = gd.at(folds.assignment[i], n_w, w);
                const double bd = t.b_at(l, a, w) / t.d_at(l, z, a, w);
                const double ge = gdr[a] / t.e[t.iza(w, z, a)];
                const double gg = gdr[a] / t.g[t.ia(w, a)];
                design[i * 2] = bd * (1.0 - ge);     // H_D
                design[i * 2 + 1] = bd * (ge - gg);  // H_I
                offset[i] = logit(t.m_at(z, l, a, w));
            }
            IrlsOptions opts = tilt_opts;
            opts.intercept = false;
            IrlsResult fit = fit_tilt("m", design, 2, data.y, ones, offset, opts);
            for (std::size_t f = 0; f < tables.size(); ++f) {
                NuisanceTables& t = tables[f];
                for (int w = 0; w < n_w; ++w) {
                    const std::vector<double>& gdr = gd.at(f, n_w, w);
                    for (int a = 0; a < 2; ++a)
                        for (int l = 0; l < 2; ++l)
                            for (int z = 0; z < n_z; ++z) {
                                const double bd = t.b_at(l, a, w) / t.d_at(l, z, a, w);
                                const double ge = gdr[a] / t.e[t.iza(w, z, a)];
                                const double gg = gdr[a] / t.g[t.ia(w, a)];
                                const double inc = fit.coef[0] * bd * (1.0 - ge) +
                                                   fit.coef[1] * bd * (ge - gg);
                                // zero-probability cells produce degenerate
                                // covariates and stay untouched
                                if (!std::isfinite(inc)) continue;
                                double& cell = t.m[t.ial(w, a, l) * n_z + z];
                                cell = expit(logit(cell) + inc);
                            }
                }
                t.derive_secondary_exact();
                t.finalize();
            }
        }

        // b tilt on (K_D, K_I)
        {
            std::vector<double> design(n * 2), offset(n);
            for (std::size_t i = 0; i < n; ++i) {
                const NuisanceTables& t = tables[folds.assignment[i]];
                const int w = data.w[i], a = data.a[i];
                const std::vector<double>& gdr = gd.at(folds.assignment[i], n_w, w);
                const double gg = gdr[a] / t.g[t.ia(w, a)];
                const double dv = t.v[t.ial(w, a, 1)] - t.v[t.ial(w, a, 0)];
                const double ds = t.s[t.ial(w, a, 1)] - t.s[t.ial(w, a, 0)];
                design[i * 2] = dv - gg * ds;      // K_D
                design[i * 2 + 1] = gg * (ds - dv); // K_I
                offset[i] = logit(t.b1[t.ia(w, a)]);
            }
            IrlsOptions opts = tilt_opts;
            opts.intercept = false;
            IrlsResult fit = fit_tilt("b", design, 2, yl, ones, offset, opts);
            for (std::size_t f = 0; f < tables.size(); ++f) {
                NuisanceTables& t = tables[f];
                for (int w = 0; w < n_w; ++w) {
                    const std::vector<double>& gdr = gd.at(f, n_w, w);
                    for (int a = 0; a < 2; ++a) {
                        const double gg = gdr[a] / t.g[t.ia(w, a)];
                        const double dv = t.v[t.ial(w, a, 1)] - t.v[t.ial(w, a, 0)];
                        const double ds = t.s[t.ial(w, a, 1)] - t.s[t.ial(w, a, 0)];
                        const double inc = fit.coef[0] * (dv - gg * ds) +
                                           fit.coef[1] * gg * (ds - dv);
                        if (!std::isfinite(inc)) continue;
                        double& cell = t.b1[t.ia(w, a)];
                        cell = expit(logit(cell) + inc);
                    }
                }
                t.derive_secondary_exact();
                t.finalize();
            }
        }

        // g tilt on (M_D, M_I)
        {
            std::vector<double> design(n * 2), offset(n);
            for (std::size_t i = 0; i < n; ++i) {
                const NuisanceTables& t = tables[folds.assignment[i]];
                const int w = data.w[i];
                const std::vector<double>& gdr = gd.at(folds.assignment[i], n_w, w);
                const double g1 = t.g[t.ia(w, 1)];
                const double factor = gdr[1] * (1.0 - gdr[1]) / (g1 * (1.0 - g1));
                design[i * 2] = -factor * t.q2[w];               // M_D
                design[i * 2 + 1] = factor * (t.q2[w] - t.q1[w]); // M_I
                offset[i] = logit(g1);
            }
            IrlsOptions opts = tilt_opts;
            opts.intercept = false;
            IrlsResult fit = fit_tilt("g", design, 2, ya, ones, offset, opts);
            for (std::size_t f = 0; f < tables.size(); ++f) {
                NuisanceTables& t = tables[f];
                for (int w = 0; w < n_w; ++w) {
                    const std::vector<double>& gdr = gd.at(f, n_w, w);
                    const double g1 = t.g[t.ia(w, 1)];
                    const double factor = gdr[1] * (1.0 - gdr[1]) / (g1 * (1.0 - g1));
                    const double inc = fit.coef[0] * (-factor * t.q2[w]) +
                                       fit.coef[1] * factor * (t.q2[w] - t.q1[w]);
                    if (!std::isfinite(inc)) continue;
                    const double g1_new = expit(logit(g1) + inc);
                    t.g[t.ia(w, 1)] = g1_new;
                    t.g[t.ia(w, 0)] = 1.0 - g1_new;
                }
                t.derive_secondary_exact();
                t.finalize();
            }
            gd.refresh(tables, spec, sp.a_values);
        }

        // ubar tilt: intercept plus J = g_delta/g, quasi-likelihood fit of
        // u(Z_i, A_i, W_i)
        {
            std::vector<double> design(n), offset(n), pseudo(n);
            for (std::size_t i = 0; i < n; ++i) {
                const NuisanceTables& t = tables[folds.assignment[i]];
                const int w = data.w[i], a = data.a[i], z = data.z[i];
                const std::vector<double>& gdr = gd.at(folds.assignment[i], n_w, w);
                design[i] = gdr[a] / t.g[t.ia(w, a)];
                offset[i] = logit(t.ubar[t.ia(w, a)]);
                pseudo[i] = t.u[t.iaz(w, a, z)];
            }
            IrlsOptions opts = tilt_opts;
            opts.intercept = true;
            IrlsResult fit = fit_tilt("ubar", design, 1, pseudo, ones, offset, opts);
            for (std::size_t f = 0; f < tables.size(); ++f) {
                NuisanceTables& t = tables[f];
                for (int w = 0; w < n_w; ++w) {
                    const std::vector<double>& gdr = gd.at(f, n_w, w);
                    for (int a = 0; a < 2; ++a) {
                        const double j_cov = gdr[a] / t.g[t.ia(w, a)];
                        const double inc = fit.coef[0] + fit.coef[1] * j_cov;
                        if (!std::isfinite(inc)) continue;
                        double& cell = t.ubar[t.ia(w, a)];
                        cell = expit(logit(cell) + inc);
                    }
                }
                // keep the tilted ubar; only its functionals are refreshed
                t.finalize();
            }
        }

        // plug-in estimates and score-equation check
        psi_d_plug = 0;
        psi_i_plug = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t f = folds.assignment[i];
            const NuisanceTables& t = tables[f];
            const int w = data.w[i], z = data.z[i];
            const std::vector<double>& gdr = gd.at(f, n_w, w);
            for (int a = 0; a < 2; ++a) {
                const double ub = t.ubar[t.ia(w, a)];
                const double uz = t.u[t.iaz(w, a, z)];
                psi_d_plug += ub * t.g[t.ia(w, a)] - uz * gdr[a];
                psi_i_plug += (uz - ub) * gdr[a];
            }
        }
        psi_d_plug /= static_cast<double>(n);
        psi_i_plug /= static_cast<double>(n);

        std::vector<EifValue> at_null = eif_columns(data, tables, folds, identity);
        std::vector<EifValue> at_delta = eif_columns(data, tables, folds, spec);
        for (std::size_t i = 0; i < n; ++i) {
            col_d[i] = at_null[i].d(1) - at_delta[i].d(2);
            col_i[i] = at_delta[i].d(2) - at_delta[i].d(1);
        }
        const double root_n_log_n = std::sqrt(static_cast<double>(n)) *
                                    std::log(static_cast<double>(n));
        const double tol_d = tol_factor * sd_of(col_d) / root_n_log_n;
        const double tol_i = tol_factor * sd_of(col_i) / root_n_log_n;
        est.diagnostics.score_d = mean_of(col_d) - psi_d_plug;
        est.diagnostics.score_i = mean_of(col_i) - psi_i_plug;
        converged = std::abs(est.diagnostics.score_d) <= tol_d &&
                    std::abs(est.diagnostics.score_i) <= tol_i;
    }

    est.diagnostics.tmle_iterations = iter;
    est.diagnostics.converged = converged;
    // centered EIF columns around the plug-ins give the variance estimate
    fill_estimate(est, col_d, col_i, 1.0, alpha);
    est.psi_d = psi_d_plug * data.y_scale();
    est.psi_i = psi_i_plug * data.y_scale();
    est.se_d *= data.y_scale();
    est.se_i *= data.y_scale();
    for (std::size_t i = 0; i < n; ++i) {
        est.eif_d[i] *= data.y_scale();
        est.eif_i[i] *= data.y_scale();
    }
    est.ci_d = wald_ci(est.psi_d, est.se_d, alpha);
    est.ci_i = wald_ci(est.psi_i, est.se_i, alpha);
    return est;
}

} // namespace medshift
