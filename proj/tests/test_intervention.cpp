#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "medshift/intervention.hpp"

using namespace medshift;

TEST_CASE("odds tilt post-intervention density, binary treatment") {
    InterventionSpec spec{InterventionKind::odds_tilt, 2.0};
    std::vector<double> g{0.5, 0.5};
    std::vector<double> a_values{0.0, 1.0};
    std::vector<double> gd = post_density(spec, g, a_values);
    // delta' g / (delta' g + 1 - g) = 1/(1+0.5) = 2/3
    CHECK(std::abs(gd[1] - 2.0 / 3.0) < 1e-15);
    CHECK(std::abs(gd[0] - 1.0 / 3.0) < 1e-15);
}

TEST_CASE("exponential tilt equals odds tilt with delta' = e^delta") {
    std::vector<double> g{0.8, 0.2};
    std::vector<double> a_values{0.0, 1.0};
    for (double delta : {-1.5, -0.25, 0.0, 0.7, 2.0}) {
        InterventionSpec et{InterventionKind::exp_tilt, delta};
        InterventionSpec ot{InterventionKind::odds_tilt, std::exp(delta)};
        std::vector<double> ge = post_density(et, g, a_values);
        std::vector<double> go = post_density(ot, g, a_values);
        for (int a = 0; a < 2; ++a) CHECK(std::abs(ge[a] - go[a]) < 1e-15);
    }
}

TEST_CASE("identity intervention leaves the density unchanged") {
    InterventionSpec id{InterventionKind::identity, 0.0};
    std::vector<double> g{0.1, 0.3, 0.6};
    std::vector<double> a_values{0.0, 1.0, 2.0};
    std::vector<double> gd = post_density(id, g, a_values);
    for (int a = 0; a < 3; ++a) CHECK(gd[a] == g[a]);
    CHECK(id.is_identity_valued());
    // tilts at their neutral parameter are identity valued
    CHECK(InterventionSpec{InterventionKind::odds_tilt, 1.0}.is_identity_valued());
    CHECK(InterventionSpec{InterventionKind::exp_tilt, 0.0}.is_identity_valued());
    CHECK_FALSE(InterventionSpec{InterventionKind::odds_tilt, 2.0}.is_identity_valued());
}

TEST_CASE("discrete shift density is the shifted pmf") {
    InterventionSpec shift{InterventionKind::discrete_shift, 1.0};
    std::vector<double> g{0.5, 0.3, 0.15, 0.05};
    std::vector<double> a_values{0.0, 1.0, 2.0, 3.0};
    std::vector<double> gd = post_density(shift, g, a_values);
    // draws of a map to a-1 unless already within one step of the lower
    // support bound
    CHECK(std::abs(gd[0] - 0.5) < 1e-15);
    CHECK(std::abs(gd[1] - 0.45) < 1e-15);
    CHECK(std::abs(gd[2] - 0.05) < 1e-15);
    CHECK(std::abs(gd[3] - 0.0) < 1e-15);
    CHECK(mtp_map(shift, 0, g) == 0);
    CHECK(mtp_map(shift, 1, g) == 1);
    CHECK(mtp_map(shift, 2, g) == 1);
    CHECK(mtp_map(shift, 3, g) == 2);
}

TEST_CASE("post-intervention density sums to one") {
    std::vector<double> g{0.25, 0.35, 0.4};
    std::vector<double> a_values{0.0, 1.0, 2.0};
    for (auto spec : {InterventionSpec{InterventionKind::exp_tilt, -2.0},
                      InterventionSpec{InterventionKind::discrete_shift, 1.0}}) {
        std::vector<double> gd = post_density(spec, g, a_values);
        double total = 0.0;
        for (double p : gd) total += p;
        CHECK(std::abs(total - 1.0) < 1e-14);
    }
    std::vector<double> gb{0.7, 0.3};
    std::vector<double> ab{0.0, 1.0};
    std::vector<double> gd = post_density(InterventionSpec{InterventionKind::odds_tilt, 3.0}, gb, ab);
    CHECK(std::abs(gd[0] + gd[1] - 1.0) < 1e-15);
}

TEST_CASE("validation rejects bad parameters") {
    CHECK_THROWS_AS(InterventionSpec(InterventionKind::odds_tilt, 0.0).validate(2),
                    std::invalid_argument);
    CHECK_THROWS_AS(InterventionSpec(InterventionKind::odds_tilt, -1.0).validate(2),
                    std::invalid_argument);
    CHECK_THROWS_AS(InterventionSpec(InterventionKind::discrete_shift, 1.5).validate(4),
                    std::invalid_argument);
    CHECK_THROWS_AS(InterventionSpec(InterventionKind::discrete_shift, 4.0).validate(4),
                    std::invalid_argument);
    CHECK_THROWS_AS(InterventionSpec(InterventionKind::discrete_shift, -1.0).validate(4),
                    std::invalid_argument);
    CHECK_NOTHROW(InterventionSpec(InterventionKind::discrete_shift, 1.0).validate(4));
}

TEST_CASE("spec JSON round trip and parsing") {
    InterventionSpec spec{InterventionKind::exp_tilt, 0.75};
    InterventionSpec back = InterventionSpec::from_json(spec.to_json());
    CHECK(back.kind == spec.kind);
    CHECK(back.delta == spec.delta);
    InterventionSpec parsed = InterventionSpec::parse("odds_tilt", 2.0);
    CHECK(parsed.kind == InterventionKind::odds_tilt);
    CHECK(parsed.delta == 2.0);
    CHECK_THROWS_AS(InterventionSpec::parse("nope", 1.0), std::invalid_argument);
}
