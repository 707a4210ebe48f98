#include <doctest.h>

#include <cmath>
#include <vector>

#include "medshift/dgp.hpp"
#include "medshift/eif.hpp"
#include "medshift/intervention.hpp"
#include "medshift/oracle.hpp"

using namespace medshift;

namespace {

double eif_mean_by_enumeration(const DiscreteLaw& law, const InterventionSpec& spec, int j,
                               ScoreBranch branch) {
    return oracle_eif_mean(law, spec, j, true_nuisances(law), branch);
}

std::vector<InterventionSpec> acceptance_specs() {
    return {InterventionSpec{InterventionKind::identity, 0.0},
            InterventionSpec{InterventionKind::odds_tilt, 0.5},
            InterventionSpec{InterventionKind::odds_tilt, 2.0},
            InterventionSpec{InterventionKind::exp_tilt, -1.0},
            InterventionSpec{InterventionKind::exp_tilt, 1.0}};
}

} // namespace

TEST_CASE("at the truth the EIF mean equals the target parameter") {
    DiscreteLaw law = build_sim_dgp();
    for (const InterventionSpec& spec : acceptance_specs()) {
        for (int j : {1, 2}) {
            double mean = eif_mean_by_enumeration(law, spec, j, ScoreBranch::automatic);
            double theta = oracle_theta(law, spec, j);
            CHECK(std::abs(mean - theta) < 1e-12);
        }
    }
    DiscreteLaw four = build_sim_dgp_four_level();
    InterventionSpec shift{InterventionKind::discrete_shift, 1.0};
    for (int j : {1, 2}) {
        double mean = eif_mean_by_enumeration(four, shift, j, ScoreBranch::automatic);
        CHECK(std::abs(mean - oracle_theta(four, shift, j)) < 1e-12);
    }
}

TEST_CASE("corollary closed form equals the tilt score, binary treatment") {
    DiscreteLaw law = build_sim_dgp();
    NuisanceTables eta = true_nuisances(law);
    for (const InterventionSpec& spec : acceptance_specs()) {
        for (int w = 0; w < law.space().n_w(); ++w) {
            std::vector<double> g_row{eta.g[eta.ia(w, 0)], eta.g[eta.ia(w, 1)]};
            std::vector<double> gd = post_density(spec, g_row, law.space().a_values);
            for (int a = 0; a < 2; ++a)
                for (int j : {1, 2}) {
                    double tilt = score_a(j, eta, spec, gd, w, a, ScoreBranch::tilt);
                    double closed = score_a(j, eta, spec, gd, w, a, ScoreBranch::corollary);
                    CHECK(std::abs(tilt - closed) < 1e-12);
                }
        }
    }
}

TEST_CASE("treatment score has mean zero at the truth") {
    DiscreteLaw law = build_sim_dgp();
    NuisanceTables eta = true_nuisances(law);
    InterventionSpec spec{InterventionKind::odds_tilt, 2.0};
    for (int j : {1, 2}) {
        double mean = 0.0;
        for (int w = 0; w < law.space().n_w(); ++w) {
            std::vector<double> g_row{eta.g[eta.ia(w, 0)], eta.g[eta.ia(w, 1)]};
            std::vector<double> gd = post_density(spec, g_row, law.space().a_values);
            for (int a = 0; a < 2; ++a)
                mean += score_a(j, eta, spec, gd, w, a, ScoreBranch::automatic) * g_row[a] *
                        law.p_w(w);
        }
        CHECK(std::abs(mean) < 1e-14);
    }
}

TEST_CASE("density-ratio weight hand value") {
    // a single-covariate toy: H^1 = (g_delta/g)(b/d)
    DiscreteLaw law = build_sim_dgp();
    NuisanceTables eta = true_nuisances(law);
    InterventionSpec spec{InterventionKind::odds_tilt, 2.0};
    int w = law.space().w_index({1, 0, 0});
    std::vector<double> g_row{eta.g[eta.ia(w, 0)], eta.g[eta.ia(w, 1)]};
    std::vector<double> gd = post_density(spec, g_row, law.space().a_values);
    int a = 1, l = 1, z = 0;
    double expect = (gd[a] / g_row[a]) * eta.b_at(l, a, w) / eta.d_at(l, z, a, w);
    CHECK(std::abs(h_ratio(1, eta, gd, w, a, l, z) - expect) < 1e-15);
    double expect2 = (gd[a] / eta.e[eta.iza(w, z, a)]) * eta.b_at(l, a, w) / eta.d_at(l, z, a, w);
    CHECK(std::abs(h_ratio(2, eta, gd, w, a, l, z) - expect2) < 1e-15);
}

TEST_CASE("eif pieces telescope: d = resid + cent + plug + score") {
    DiscreteLaw law = build_sim_dgp();
    NuisanceTables eta = true_nuisances(law);
    InterventionSpec spec{InterventionKind::exp_tilt, 1.0};
    int w = 3, a = 0, l = 1, z = 1;
    EifValue v = eif_value(eta, spec, law.space().a_values, w, a, l, z, 1.0);
    CHECK(v.d(1) == v.resid1 + v.cent1 + v.plug1 + v.score1);
    CHECK(v.d(2) == v.resid2 + v.cent2 + v.plug2 + v.score2);
    CHECK(v.h1 > 0.0);
    CHECK(v.gd_ratio > 0.0);
}

TEST_CASE("stabilization is a no-op when the weights average to one") {
    DiscreteLaw law = build_sim_dgp();
    NuisanceTables eta = true_nuisances(law);
    InterventionSpec identity{InterventionKind::identity, 0.0};
    // synthetic column with unit weights
    std::vector<EifValue> vals(4);
    for (auto& v : vals) {
        v.resid1 = 0.25;
        v.cent1 = -0.1;
        v.score1 = 0.05;
        v.h1 = 1.0;
        v.h2 = 1.0;
        v.gd_ratio = 1.0;
    }
    std::vector<EifValue> out = stabilize(vals);
    CHECK(std::abs(out[0].resid1 - 0.25) < 1e-15);
    CHECK(std::abs(out[0].cent1 + 0.1) < 1e-15);
    CHECK(std::abs(out[0].score1 - 0.05) < 1e-15);
    (void)eta;
    (void)identity;
}

TEST_CASE("stabilization rescales by the empirical weight means") {
    std::vector<EifValue> vals(2);
    vals[0].resid1 = 1.0;
    vals[0].h1 = 2.0;
    vals[0].h2 = 1.0;
    vals[0].gd_ratio = 4.0;
    vals[0].cent1 = 3.0;
    vals[0].score1 = 1.0;
    vals[1].resid1 = 1.0;
    vals[1].h1 = 2.0;
    vals[1].h2 = 1.0;
    vals[1].gd_ratio = 0.0;
    vals[1].cent1 = 3.0;
    vals[1].score1 = 1.0;
    std::vector<EifValue> out = stabilize(vals);
    // mean h1 = 2, mean gd_ratio = 2
    CHECK(std::abs(out[0].resid1 - 0.5) < 1e-15);
    CHECK(std::abs(out[0].cent1 - 1.5) < 1e-15);
    CHECK(std::abs(out[0].score1 - 0.5) < 1e-15);
    CHECK(std::abs(out[0].plug1 - vals[0].plug1) < 1e-15);
}
