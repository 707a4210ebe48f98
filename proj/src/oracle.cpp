#include "medshift/oracle.hpp"

#include <algorithm>
#include <stdexcept>

namespace medshift {

namespace {

std::vector<double> law_g_row(const DiscreteLaw& law, int w) {
    std::vector<double> g_row(law.space().n_a());
    for (int a = 0; a < law.space().n_a(); ++a) g_row[a] = law.g(a, w);
    return g_row;
}

void check_support(const std::vector<double>& g_row, const std::vector<double>& g_delta, int w) {
    for (std::size_t a = 0; a < g_row.size(); ++a)
        if (g_delta[a] > 0.0 && g_row[a] <= 0.0)
            throw std::runtime_error("positivity violation: g_delta > 0 but g = 0 at (a=" +
                                     std::to_string(a) + ", w=" + std::to_string(w) + ")");
}

} // namespace

double oracle_theta(const DiscreteLaw& law, const InterventionSpec& spec, int j) {
    const StateSpace& sp = law.space();
    spec.validate(sp.n_a());
    double total = 0.0;
    for (int w = 0; w < sp.n_w(); ++w) {
        const std::vector<double> g_row = law_g_row(law, w);
        const std::vector<double> gd = post_density(spec, g_row, sp.a_values);
        check_support(g_row, gd, w);
        for (int a = 0; a < sp.n_a(); ++a) {
            if (gd[a] == 0.0) continue;
            double inner = 0.0;
            for (int l = 0; l < 2; ++l)
                for (int z = 0; z < sp.n_z(); ++z) {
                    const double pz = j == 1 ? law.r(z, a, w) : law.h(z, w);
                    inner += law.m(z, l, a, w) * law.b(l, a, w) * pz;
                }
            total += inner * gd[a] * law.p_w(w);
        }
    }
    return total;
}

OracleEffects oracle_effects(const DiscreteLaw& law, const InterventionSpec& spec) {
    OracleEffects out;
    InterventionSpec identity;
    out.theta_1_null = oracle_theta(law, identity, 1);
    out.theta_1_delta = oracle_theta(law, spec, 1);
    out.theta_2_delta = oracle_theta(law, spec, 2);
    out.psi_d = out.theta_1_null - out.theta_2_delta;
    out.psi_i = out.theta_2_delta - out.theta_1_delta;
    return out;
}

double oracle_eif_mean(const DiscreteLaw& law, const InterventionSpec& spec, int j,
                       const NuisanceTables& eta1, ScoreBranch branch) {
    const StateSpace& sp = law.space();
    spec.validate(sp.n_a());
    double total = 0.0;
    for (int w = 0; w < sp.n_w(); ++w) {
        for (int a = 0; a < sp.n_a(); ++a)
            for (int l = 0; l < 2; ++l)
                for (int z = 0; z < sp.n_z(); ++z)
                    for (int y = 0; y < 2; ++y) {
                        const double p = law.p(w, a, l, z, y);
                        if (p == 0.0) continue;
                        EifValue val = eif_value(eta1, spec, sp.a_values, w, a, l, z,
                                                 static_cast<double>(y), branch);
                        total += p * val.d(j);
                    }
    }
    return total;
}

std::pair<double, double> oracle_efficiency_bounds(const DiscreteLaw& law,
                                                   const InterventionSpec& spec) {
    const StateSpace& sp = law.space();
    const NuisanceTables t = true_nuisances(law);
    InterventionSpec identity;
    OracleEffects eff = oracle_effects(law, spec);
    const double psi_d = eff.psi_d, psi_i = eff.psi_i;
    double m2_d = 0.0, m2_i = 0.0;
    for (int w = 0; w < sp.n_w(); ++w)
        for (int a = 0; a < sp.n_a(); ++a)
            for (int l = 0; l < 2; ++l)
                for (int z = 0; z < sp.n_z(); ++z)
                    for (int y = 0; y < 2; ++y) {
                        const double p = law.p(w, a, l, z, y);
                        if (p == 0.0) continue;
                        EifValue at_null = eif_value(t, identity, sp.a_values, w, a, l, z,
                                                     static_cast<double>(y));
                        EifValue at_delta =
                            eif_value(t, spec, sp.a_values, w, a, l, z, static_cast<double>(y));
                        const double fd = at_null.d(1) - at_delta.d(2);
                        const double fi = at_delta.d(2) - at_delta.d(1);
                        m2_d += p * fd * fd;
                        m2_i += p * fi * fi;
                    }
    return {m2_d - psi_d * psi_d, m2_i - psi_i * psi_i};
}

std::vector<RobustnessConfig> robustness_configs() {
    using N = NuisanceId;
    return {
        {"cond1", {N::m, N::g, N::b}},
        {"cond2", {N::m, N::g, N::v, N::s}},
        {"cond3", {N::g, N::b, N::d, N::e}},
        {"cond4", {N::g, N::ubar, N::v, N::d, N::e}},
        {"cond5", {N::m, N::b, N::ubar, N::q}},
        {"cond6", {N::m, N::ubar, N::v, N::s, N::q}},
    };
}

NuisanceTables configured_nuisances(const DiscreteLaw& law, const RobustnessConfig& config) {
    NuisanceTables t = true_nuisances(law);
    auto is_consistent = [&](NuisanceId id) {
        return std::find(config.consistent.begin(), config.consistent.end(), id) !=
               config.consistent.end();
    };
    // the lemmas' eta has nine entries; everything not kept consistent is
    // replaced by its marginal projection, then the functionals of eta
    // (u, vbar, sbar, q1, q2) are recomputed
    for (NuisanceId id : {NuisanceId::m, NuisanceId::g, NuisanceId::b, NuisanceId::ubar,
                          NuisanceId::v, NuisanceId::d, NuisanceId::e, NuisanceId::s,
                          NuisanceId::q})
        if (!is_consistent(id)) project_intercept_only(t, law, id);
    t.finalize();
    return t;
}

} // namespace medshift
