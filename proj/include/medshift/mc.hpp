#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "medshift/discrete_law.hpp"
#include "medshift/intervention.hpp"
#include "medshift/nuisance.hpp"

namespace medshift {

// replication design: which single nuisance (if any) is fit with an
// intercept-only learner, which estimators run, sizes and seeds
struct SimConfig {
    InterventionSpec spec{InterventionKind::odds_tilt, 2.0};
    std::vector<std::size_t> sample_sizes{200, 800, 3200};
    std::size_t n_reps = 300;
    bool run_onestep = true;
    bool run_tmle = true;
    std::string arm = "none"; // none | e | m | d | g | b
    std::size_t n_folds = 5;
    std::uint64_t master_seed = 1;
    bool stabilize = false;
    double alpha = 0.05;
    double learner_alpha = 0.5; // saturated-learner smoothing

    std::string to_json() const;
    static SimConfig from_json(const std::string& text);
};

// learner configuration implied by a misspecification arm
LearnConfig arm_learn_config(const std::string& arm, double learner_alpha);

struct MetricsRow {
    std::string estimator; // "onestep" | "tmle"
    std::string arm;
    std::size_t n = 0;
    std::string effect; // "D" | "I"
    double truth = 0, bound = 0;
    std::size_t n_success = 0, n_failed = 0;
    double bias = 0, bias_mcse = 0;
    double sqrtn_abs_bias = 0, sqrtn_abs_bias_mcse = 0;
    double sd = 0, sd_mcse = 0;
    double n_mse_over_bound = 0, n_mse_over_bound_mcse = 0;
    double coverage = 0, coverage_mcse = 0;
};

struct MetricsReport {
    std::vector<MetricsRow> rows;

    std::string to_csv() const;
    std::string to_json() const;
};

// per-replication raw results for one (arm, n) cell
struct CellResults {
    std::size_t n = 0;
    std::string estimator, arm;
    std::vector<double> psi_d, psi_i;     // successful replications only
    std::vector<int> covered_d, covered_i;
    std::size_t n_failed = 0;
};

MetricsReport run_replications(const DiscreteLaw& law, const SimConfig& config);

// metrics with delete-one jackknife MC standard errors
std::vector<MetricsRow> summarize(const CellResults& cell, double truth_d, double truth_i,
                                  double bound_d, double bound_i);

// worker count: min(hardware, MEDSHIFT_THREADS if set)
unsigned worker_count();

} // namespace medshift
