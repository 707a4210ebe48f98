#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "medshift/dgp.hpp"
#include "medshift/mc.hpp"

using namespace medshift;

TEST_CASE("summarize hand case: symmetric errors around the truth") {
    CellResults cell;
    cell.n = 100;
    cell.estimator = "onestep";
    cell.arm = "none";
    double truth_d = 0.2, truth_i = -0.1;
    cell.psi_d = {truth_d + 1.0, truth_d - 1.0};
    cell.psi_i = {truth_i + 0.5, truth_i - 0.5};
    cell.covered_d = {1, 0};
    cell.covered_i = {1, 1};
    double bound_d = 4.0, bound_i = 1.0;
    std::vector<MetricsRow> rows = summarize(cell, truth_d, truth_i, bound_d, bound_i);
    REQUIRE(rows.size() == 2);
    const MetricsRow& d = rows[0];
    CHECK(d.effect == "D");
    CHECK(std::abs(d.bias - 0.0) < 1e-15);
    // sample sd with n-1 denominator: sqrt(2 * 1 / 1) = sqrt(2)
    CHECK(std::abs(d.sd - std::sqrt(2.0)) < 1e-12);
    // n * mse / bound = 100 * (bias^2 + mean sq dev) ... mse uses the
    // mean squared error about the truth = 1
    CHECK(std::abs(d.n_mse_over_bound - 100.0 * 1.0 / bound_d) < 1e-12);
    CHECK(std::abs(d.coverage - 0.5) < 1e-15);
    const MetricsRow& i = rows[1];
    CHECK(i.effect == "I");
    CHECK(std::abs(i.coverage - 1.0) < 1e-15);
    CHECK(std::abs(i.n_mse_over_bound - 100.0 * 0.25 / bound_i) < 1e-12);
}

TEST_CASE("jackknife mcse is zero for constant replications") {
    CellResults cell;
    cell.n = 50;
    cell.estimator = "tmle";
    cell.arm = "none";
    cell.psi_d = {0.3, 0.3, 0.3, 0.3};
    cell.psi_i = {0.0, 0.0, 0.0, 0.0};
    cell.covered_d = {1, 1, 1, 1};
    cell.covered_i = {0, 0, 0, 0};
    std::vector<MetricsRow> rows = summarize(cell, 0.3, 0.0, 1.0, 1.0);
    CHECK(rows[0].bias_mcse == 0.0);
    CHECK(rows[0].coverage_mcse == 0.0);
    CHECK(rows[0].sd == 0.0);
}

TEST_CASE("replication harness is deterministic across worker counts") {
    DiscreteLaw law = build_sim_dgp();
    SimConfig config;
    config.sample_sizes = {200};
    config.n_reps = 6;
    config.run_tmle = false;
    config.master_seed = 99;

    setenv("MEDSHIFT_THREADS", "1", 1);
    std::string serial = run_replications(law, config).to_csv();
    setenv("MEDSHIFT_THREADS", "4", 1);
    std::string parallel = run_replications(law, config).to_csv();
    unsetenv("MEDSHIFT_THREADS");
    CHECK(serial == parallel);
}

TEST_CASE("seeds isolate replications: changing the master seed changes results") {
    DiscreteLaw law = build_sim_dgp();
    SimConfig config;
    config.sample_sizes = {200};
    config.n_reps = 3;
    config.run_tmle = false;
    config.master_seed = 1;
    std::string a = run_replications(law, config).to_csv();
    config.master_seed = 2;
    std::string b = run_replications(law, config).to_csv();
    CHECK(a != b);
}

TEST_CASE("arm configuration flips the right learner to intercept-only") {
    LearnConfig none = arm_learn_config("none", 0.5);
    CHECK(none.m.kind == LearnerKind::saturated);
    CHECK(none.g.kind == LearnerKind::saturated);

    LearnConfig m = arm_learn_config("m", 0.5);
    CHECK(m.m.kind == LearnerKind::intercept_only);
    CHECK(m.g.kind == LearnerKind::saturated);

    LearnConfig e = arm_learn_config("e", 0.5);
    CHECK(e.e.kind == LearnerKind::intercept_only);
    CHECK_FALSE(e.bayes_coherent_e);

    LearnConfig d = arm_learn_config("d", 0.5);
    CHECK(d.d.kind == LearnerKind::intercept_only);
    CHECK_FALSE(d.bayes_coherent_d);

    CHECK_THROWS(arm_learn_config("bogus", 0.5));
}

TEST_CASE("sim config JSON round trip") {
    SimConfig config;
    config.arm = "g";
    config.n_reps = 12;
    config.sample_sizes = {100, 300};
    config.stabilize = true;
    SimConfig back = SimConfig::from_json(config.to_json());
    CHECK(back.arm == "g");
    CHECK(back.n_reps == 12);
    CHECK(back.sample_sizes == config.sample_sizes);
    CHECK(back.stabilize == true);
    CHECK(back.spec.kind == InterventionKind::odds_tilt);
}

TEST_CASE("metrics serialize to csv with a header") {
    CellResults cell;
    cell.n = 10;
    cell.estimator = "onestep";
    cell.arm = "none";
    cell.psi_d = {0.1, 0.2};
    cell.psi_i = {0.0, 0.1};
    cell.covered_d = {1, 1};
    cell.covered_i = {1, 0};
    MetricsReport report;
    report.rows = summarize(cell, 0.15, 0.05, 1.0, 1.0);
    std::string csv = report.to_csv();
    CHECK(csv.find("estimator") != std::string::npos);
    CHECK(csv.find("coverage") != std::string::npos);
    CHECK(csv.find("onestep") != std::string::npos);
}
