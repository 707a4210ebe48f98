#include "medshift/eif.hpp"

#include <cmath>
#include <stdexcept>

namespace medshift {

double h_ratio(int j, const NuisanceTables& t, const std::vector<double>& g_delta, int w, int a,
               int l, int z) {
    const double bd = t.b_at(l, a, w) / t.d_at(l, z, a, w);
    if (j == 1) return g_delta[a] / t.g[t.ia(w, a)] * bd;
    return g_delta[a] / t.e[t.iza(w, z, a)] * bd;
}

double score_a(int j, const NuisanceTables& t, const InterventionSpec& spec,
               const std::vector<double>& g_delta, int w, int a, ScoreBranch branch) {
    auto x_at = [&](int aa) { return j == 1 ? t.ubar[t.ia(w, aa)] : t.q[t.ia(w, aa)]; };

    if (branch == ScoreBranch::corollary) {
        if (t.n_a != 2)
            throw std::invalid_argument("score_a: corollary form requires binary treatment");
        double dp;
        switch (spec.kind) {
            case InterventionKind::identity: dp = 1.0; break;
            case InterventionKind::odds_tilt: dp = spec.delta; break;
            case InterventionKind::exp_tilt: dp = std::exp(spec.delta); break;
            default:
                throw std::invalid_argument("score_a: corollary form requires a tilt spec");
        }
        const double g1 = t.g[t.ia(w, 1)];
        const double qj = j == 1 ? t.q1[w] : t.q2[w];
        const double den = dp * g1 + 1.0 - g1;
        return dp * qj * (a - g1) / (den * den);
    }

    if (branch == ScoreBranch::automatic && spec.kind == InterventionKind::discrete_shift) {
        std::vector<double> g_row(t.n_a);
        for (int aa = 0; aa < t.n_a; ++aa) g_row[aa] = t.g[t.ia(w, aa)];
        double centered = x_at(mtp_map(spec, a, g_row));
        for (int aa = 0; aa < t.n_a; ++aa) centered -= x_at(mtp_map(spec, aa, g_row)) * g_row[aa];
        return centered;
    }

    // tilt form (exact for identity as well: the ratio is 1 and g_delta = g)
    double centered = x_at(a);
    for (int aa = 0; aa < t.n_a; ++aa) centered -= x_at(aa) * g_delta[aa];
    return g_delta[a] / t.g[t.ia(w, a)] * centered;
}

namespace {

EifValue eif_value_gd(const NuisanceTables& t, const InterventionSpec& spec,
                      const std::vector<double>& gd, int w, int a, int l, int z, double y,
                      ScoreBranch branch) {
    EifValue val;
    const double resid = y - t.m_at(z, l, a, w);
    val.h1 = h_ratio(1, t, gd, w, a, l, z);
    val.h2 = h_ratio(2, t, gd, w, a, l, z);
    val.gd_ratio = gd[a] / t.g[t.ia(w, a)];

    val.resid1 = val.h1 * resid;
    val.cent1 = val.gd_ratio * (t.v[t.ial(w, a, l)] - t.vbar[t.ia(w, a)] + t.u[t.iaz(w, a, z)] -
                                t.ubar[t.ia(w, a)]);
    val.resid2 = val.h2 * resid;
    val.cent2 = val.gd_ratio * (t.s[t.ial(w, a, l)] - t.sbar[t.ia(w, a)]);
    for (int aa = 0; aa < t.n_a; ++aa) {
        val.plug1 += t.ubar[t.ia(w, aa)] * gd[aa];
        val.plug2 += t.u[t.iaz(w, aa, z)] * gd[aa];
    }
    val.score1 = score_a(1, t, spec, gd, w, a, branch);
    val.score2 = score_a(2, t, spec, gd, w, a, branch);
    return val;
}

std::vector<double> g_delta_row(const NuisanceTables& t, const InterventionSpec& spec,
                                const std::vector<double>& a_values, int w) {
    std::vector<double> g_row(t.n_a);
    for (int a = 0; a < t.n_a; ++a) g_row[a] = t.g[t.ia(w, a)];
    return post_density(spec, g_row, a_values);
}

} // namespace

EifValue eif_value(const NuisanceTables& t, const InterventionSpec& spec,
                   const std::vector<double>& a_values, int w, int a, int l, int z, double y,
                   ScoreBranch branch) {
    return eif_value_gd(t, spec, g_delta_row(t, spec, a_values, w), w, a, l, z, y, branch);
}

std::vector<EifValue> eif_columns(const Dataset& data, const std::vector<NuisanceTables>& tables,
                                  const FoldPlan& folds, const InterventionSpec& spec,
                                  ScoreBranch branch) {
    if (folds.assignment.size() != data.n())
        throw std::invalid_argument("eif_columns: fold plan does not match dataset");
    const std::vector<double>& av = data.space.a_values;
    // post-intervention densities per (fold, w), computed once
    std::vector<std::vector<double>> gd(tables.size() * data.space.n_w());
    std::vector<EifValue> out(data.n());
    for (std::size_t i = 0; i < data.n(); ++i) {
        const std::size_t fold = folds.assignment[i];
        const NuisanceTables& t = tables[fold];
        std::vector<double>& cache = gd[fold * data.space.n_w() + data.w[i]];
        if (cache.empty()) cache = g_delta_row(t, spec, av, data.w[i]);
        out[i] = eif_value_gd(t, spec, cache, data.w[i], data.a[i], data.l[i], data.z[i],
                              data.y[i], branch);
    }
    return out;
}

std::vector<EifValue> stabilize(const std::vector<EifValue>& values) {
    if (values.empty()) throw std::invalid_argument("stabilize: no values");
    double mh1 = 0, mh2 = 0, mr = 0;
    for (const EifValue& v : values) {
        mh1 += v.h1;
        mh2 += v.h2;
        mr += v.gd_ratio;
    }
    const double n = static_cast<double>(values.size());
    mh1 /= n;
    mh2 /= n;
    mr /= n;
    if (mh1 <= 0 || mh2 <= 0 || mr <= 0)
        throw std::runtime_error("stabilize: nonpositive weight normalizer");
    std::vector<EifValue> out(values);
    for (EifValue& v : out) {
        v.resid1 /= mh1;
        v.resid2 /= mh2;
        v.cent1 /= mr;
        v.cent2 /= mr;
        v.score1 /= mr;
        v.score2 /= mr;
    }
    return out;
}

} // namespace medshift
