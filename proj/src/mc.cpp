#include "medshift/mc.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "medshift/common.hpp"
#include "medshift/estimate.hpp"
#include "medshift/oracle.hpp"

namespace medshift {

std::string SimConfig::to_json() const {
    nlohmann::json j;
    j["intervention"] = nlohmann::json::parse(spec.to_json());
    j["sample_sizes"] = sample_sizes;
    j["n_reps"] = n_reps;
    j["run_onestep"] = run_onestep;
    j["run_tmle"] = run_tmle;
    j["arm"] = arm;
    j["n_folds"] = n_folds;
    j["master_seed"] = master_seed;
    j["stabilize"] = stabilize;
    j["alpha"] = alpha;
    j["learner_alpha"] = learner_alpha;
    return j.dump();
}

SimConfig SimConfig::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    SimConfig c;
    if (j.contains("intervention")) c.spec = InterventionSpec::from_json(j["intervention"].dump());
    if (j.contains("sample_sizes")) c.sample_sizes = j["sample_sizes"].get<std::vector<std::size_t>>();
    if (j.contains("n_reps")) c.n_reps = j["n_reps"].get<std::size_t>();
    if (j.contains("run_onestep")) c.run_onestep = j["run_onestep"].get<bool>();
    if (j.contains("run_tmle")) c.run_tmle = j["run_tmle"].get<bool>();
    if (j.contains("arm")) c.arm = j["arm"].get<std::string>();
    if (j.contains("n_folds")) c.n_folds = j["n_folds"].get<std::size_t>();
    if (j.contains("master_seed")) c.master_seed = j["master_seed"].get<std::uint64_t>();
    if (j.contains("stabilize")) c.stabilize = j["stabilize"].get<bool>();
    if (j.contains("alpha")) c.alpha = j["alpha"].get<double>();
    if (j.contains("learner_alpha")) c.learner_alpha = j["learner_alpha"].get<double>();
    if (c.n_reps < 1) throw std::invalid_argument("SimConfig: n_reps must be >= 1");
    return c;
}

LearnConfig arm_learn_config(const std::string& arm, double learner_alpha) {
    LearnConfig config;
    LearnerSpec saturated{LearnerKind::saturated, learner_alpha};
    LearnerSpec intercept{LearnerKind::intercept_only, 0.0};
    config.m = config.g = config.e = config.b = config.d = config.r = config.h = saturated;
    config.secondary = saturated;
    if (arm == "none") return config;
    if (arm == "m") {
        config.m = intercept;
    } else if (arm == "b") {
        config.b = intercept;
        // keep d consistent: fit it directly rather than deriving from b
        config.bayes_coherent_d = false;
    } else if (arm == "g") {
        config.g = intercept;
        config.bayes_coherent_e = false;
    } else if (arm == "e") {
        config.e = intercept;
        config.bayes_coherent_e = false;
    } else if (arm == "d") {
        config.d = intercept;
        config.bayes_coherent_d = false;
    } else {
        throw std::invalid_argument("unknown arm '" + arm +
                                    "'; valid arms: none, e, m, d, g, b");
    }
    return config;
}

unsigned worker_count() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("MEDSHIFT_THREADS")) {
        long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1 && static_cast<unsigned>(cap) < hw) hw = static_cast<unsigned>(cap);
    }
    return hw;
}

namespace {

double mean_of(const std::vector<double>& xs) {
    double t = 0;
    for (double x : xs) t += x;
    return t / static_cast<double>(xs.size());
}

// delete-one jackknife standard error of a statistic of the replications
double jackknife_se(std::size_t n_reps,
                    const std::function<double(std::size_t /*skip*/)>& stat_without) {
    std::vector<double> loo(n_reps);
    for (std::size_t i = 0; i < n_reps; ++i) loo[i] = stat_without(i);
    const double mu = mean_of(loo);
    double ss = 0;
    for (double v : loo) ss += (v - mu) * (v - mu);
    return std::sqrt(ss * static_cast<double>(n_reps - 1) / static_cast<double>(n_reps));
}

MetricsRow one_effect_row(const CellResults& cell, const std::vector<double>& psi,
                          const std::vector<int>& covered, double truth, double bound,
                          const std::string& effect) {
    const std::size_t r = psi.size();
    if (r < 2) throw std::runtime_error("summarize: fewer than 2 successful replications in cell " +
                                        cell.estimator + "/" + cell.arm + "/n=" +
                                        std::to_string(cell.n));
    MetricsRow row;
    row.estimator = cell.estimator;
    row.arm = cell.arm;
    row.n = cell.n;
    row.effect = effect;
    row.truth = truth;
    row.bound = bound;
    row.n_success = r;
    row.n_failed = cell.n_failed;

    const double nd = static_cast<double>(cell.n);
    auto stats_without = [&](std::size_t skip, double& bias, double& sd, double& mse,
                             double& cov) {
        double sum = 0, sum2 = 0, covs = 0;
        std::size_t k = 0;
        for (std::size_t i = 0; i < r; ++i) {
            if (i == skip) continue;
            sum += psi[i];
            sum2 += psi[i] * psi[i];
            covs += covered[i];
            ++k;
        }
        const double kd = static_cast<double>(k);
        const double mu = sum / kd;
        bias = mu - truth;
        const double var = (sum2 - kd * mu * mu) / (kd - 1.0);
        sd = std::sqrt(var > 0 ? var : 0);
        mse = bias * bias + var * (kd - 1.0) / kd;
        cov = covs / kd;
    };
    double bias, sd, mse, cov;
    stats_without(r, bias, sd, mse, cov); // skip index r == keep all
    row.bias = bias;
    row.sd = sd;
    row.sqrtn_abs_bias = std::sqrt(nd) * std::abs(bias);
    row.n_mse_over_bound = nd * mse / bound;
    row.coverage = cov;

    row.bias_mcse = jackknife_se(r, [&](std::size_t skip) {
        double b, s, m, c;
        stats_without(skip, b, s, m, c);
        return b;
    });
    row.sqrtn_abs_bias_mcse = jackknife_se(r, [&](std::size_t skip) {
        double b, s, m, c;
        stats_without(skip, b, s, m, c);
        return std::sqrt(nd) * std::abs(b);
    });
    row.sd_mcse = jackknife_se(r, [&](std::size_t skip) {
        double b, s, m, c;
        stats_without(skip, b, s, m, c);
        return s;
    });
    row.n_mse_over_bound_mcse = jackknife_se(r, [&](std::size_t skip) {
        double b, s, m, c;
        stats_without(skip, b, s, m, c);
        return nd * m / bound;
    });
    row.coverage_mcse = jackknife_se(r, [&](std::size_t skip) {
        double b, s, m, c;
        stats_without(skip, b, s, m, c);
        return c;
    });
    return row;
}

struct RepOutcome {
    bool ok_onestep = false, ok_tmle = false;
    double os_d = 0, os_i = 0;
    int os_cov_d = 0, os_cov_i = 0;
    double tm_d = 0, tm_i = 0;
    int tm_cov_d = 0, tm_cov_i = 0;
};

} // namespace

std::vector<MetricsRow> summarize(const CellResults& cell, double truth_d, double truth_i,
                                  double bound_d, double bound_i) {
    return {one_effect_row(cell, cell.psi_d, cell.covered_d, truth_d, bound_d, "D"),
            one_effect_row(cell, cell.psi_i, cell.covered_i, truth_i, bound_i, "I")};
}

MetricsReport run_replications(const DiscreteLaw& law, const SimConfig& config) {
    if (config.n_reps < 1) throw std::invalid_argument("run_replications: n_reps must be >= 1");
    const OracleEffects truth = oracle_effects(law, config.spec);
    const auto bounds = oracle_efficiency_bounds(law, config.spec);
    const LearnConfig learn = arm_learn_config(config.arm, config.learner_alpha);

    MetricsReport report;
    for (std::size_t n_index = 0; n_index < config.sample_sizes.size(); ++n_index) {
        const std::size_t n = config.sample_sizes[n_index];
        std::vector<RepOutcome> outcomes(config.n_reps);

        std::atomic<std::size_t> next{0};
        auto work = [&]() {
            for (;;) {
                const std::size_t rep = next.fetch_add(1);
                if (rep >= config.n_reps) return;
                RepOutcome& out = outcomes[rep];
                const std::uint64_t data_seed =
                    derive_seed(config.master_seed, n_index, rep, 0);
                const std::uint64_t fold_seed =
                    derive_seed(config.master_seed, n_index, rep, 1);
                try {
                    Dataset data = sample(law, n, data_seed);
                    FoldPlan folds = make_folds(n, config.n_folds, fold_seed);
                    std::vector<NuisanceTables> tables = fit_nuisances(data, folds, learn);
                    if (config.run_onestep) {
                        EffectEstimate est = onestep(data, tables, folds, config.spec,
                                                     config.stabilize, config.alpha);
                        out.os_d = est.psi_d;
                        out.os_i = est.psi_i;
                        out.os_cov_d = est.ci_d.first <= truth.psi_d &&
                                       truth.psi_d <= est.ci_d.second;
                        out.os_cov_i = est.ci_i.first <= truth.psi_i &&
                                       truth.psi_i <= est.ci_i.second;
                        out.ok_onestep = true;
                    }
                    if (config.run_tmle) {
                        EffectEstimate est =
                            tmle(data, tables, folds, config.spec, config.alpha);
                        out.tm_d = est.psi_d;
                        out.tm_i = est.psi_i;
                        out.tm_cov_d = est.ci_d.first <= truth.psi_d &&
                                       truth.psi_d <= est.ci_d.second;
                        out.tm_cov_i = est.ci_i.first <= truth.psi_i &&
                                       truth.psi_i <= est.ci_i.second;
                        out.ok_tmle = true;
                    }
                } catch (const std::exception&) {
                    // failure recorded via the ok flags
                }
            }
        };
        const unsigned workers = worker_count();
        if (workers <= 1 || config.n_reps == 1) {
            work();
        } else {
            std::vector<std::thread> pool;
            for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
            for (std::thread& t : pool) t.join();
        }

        // sequential aggregation keeps the report independent of worker count
        auto collect = [&](bool enabled, const std::string& estimator, auto get_ok, auto get_d,
                           auto get_i, auto get_cd, auto get_ci) {
            if (!enabled) return;
            CellResults cell;
            cell.n = n;
            cell.estimator = estimator;
            cell.arm = config.arm;
            for (const RepOutcome& out : outcomes) {
                if (!get_ok(out)) {
                    ++cell.n_failed;
                    continue;
                }
                cell.psi_d.push_back(get_d(out));
                cell.psi_i.push_back(get_i(out));
                cell.covered_d.push_back(get_cd(out));
                cell.covered_i.push_back(get_ci(out));
            }
            for (MetricsRow& row :
                 summarize(cell, truth.psi_d, truth.psi_i, bounds.first, bounds.second))
                report.rows.push_back(row);
        };
        collect(config.run_onestep, "onestep", [](const RepOutcome& o) { return o.ok_onestep; },
                [](const RepOutcome& o) { return o.os_d; },
                [](const RepOutcome& o) { return o.os_i; },
                [](const RepOutcome& o) { return o.os_cov_d; },
                [](const RepOutcome& o) { return o.os_cov_i; });
        collect(config.run_tmle, "tmle", [](const RepOutcome& o) { return o.ok_tmle; },
                [](const RepOutcome& o) { return o.tm_d; },
                [](const RepOutcome& o) { return o.tm_i; },
                [](const RepOutcome& o) { return o.tm_cov_d; },
                [](const RepOutcome& o) { return o.tm_cov_i; });
    }
    return report;
}

std::string MetricsReport::to_csv() const {
    std::ostringstream out;
    out << "estimator,arm,n,effect,truth,bound,n_success,n_failed,bias,bias_mcse,"
           "sqrtn_abs_bias,sqrtn_abs_bias_mcse,sd,sd_mcse,n_mse_over_bound,"
           "n_mse_over_bound_mcse,coverage,coverage_mcse\n";
    char buf[512];
    for (const MetricsRow& r : rows) {
        std::snprintf(buf, sizeof(buf),
                      "%s,%s,%zu,%s,%.17g,%.17g,%zu,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                      "%.17g,%.17g,%.17g,%.17g\n",
                      r.estimator.c_str(), r.arm.c_str(), r.n, r.effect.c_str(), r.truth, r.bound,
                      r.n_success, r.n_failed, r.bias, r.bias_mcse, r.sqrtn_abs_bias,
                      r.sqrtn_abs_bias_mcse, r.sd, r.sd_mcse, r.n_mse_over_bound,
                      r.n_mse_over_bound_mcse, r.coverage, r.coverage_mcse);
        out << buf;
    }
    return out.str();
}

std::string MetricsReport::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const MetricsRow& r : rows) {
        arr.push_back({{"estimator", r.estimator},
                       {"arm", r.arm},
                       {"n", r.n},
                       {"effect", r.effect},
                       {"truth", r.truth},
                       {"bound", r.bound},
                       {"n_success", r.n_success},
                       {"n_failed", r.n_failed},
                       {"bias", r.bias},
                       {"bias_mcse", r.bias_mcse},
                       {"sqrtn_abs_bias", r.sqrtn_abs_bias},
                       {"sqrtn_abs_bias_mcse", r.sqrtn_abs_bias_mcse},
                       {"sd", r.sd},
                       {"sd_mcse", r.sd_mcse},
                       {"n_mse_over_bound", r.n_mse_over_bound},
                       {"n_mse_over_bound_mcse", r.n_mse_over_bound_mcse},
                       {"coverage", r.coverage},
                       {"coverage_mcse", r.coverage_mcse}});
    }
    return arr.dump(2);
}

} // namespace medshift
