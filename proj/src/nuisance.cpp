#include "medshift/nuisance.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "medshift/common.hpp"

namespace medshift {

void NuisanceTables::allocate(int n_w_, int n_a_, int n_z_) {
    n_w = n_w_;
    n_a = n_a_;
    n_z = n_z_;
    const std::size_t wa = static_cast<std::size_t>(n_w) * n_a;
    m.assign(wa * 2 * n_z, 0.0);
    g.assign(wa, 0.0);
    e.assign(static_cast<std::size_t>(n_w) * n_z * n_a, 0.0);
    b1.assign(wa, 0.0);
    d1.assign(wa * n_z, 0.0);
    r.assign(wa * n_z, 0.0);
    h.assign(static_cast<std::size_t>(n_w) * n_z, 0.0);
    v.assign(wa * 2, 0.0);
    s.assign(wa * 2, 0.0);
    ubar.assign(wa, 0.0);
    q.assign(wa, 0.0);
}

void NuisanceTables::derive_secondary_exact() {
    for (int w = 0; w < n_w; ++w)
        for (int a = 0; a < n_a; ++a) {
            for (int l = 0; l < 2; ++l) {
                double vv = 0.0, ss = 0.0;
                for (int z = 0; z < n_z; ++z) {
                    vv += m_at(z, l, a, w) * r[iaz(w, a, z)];
                    ss += m_at(z, l, a, w) * h[iz(w, z)];
                }
                v[ial(w, a, l)] = vv;
                s[ial(w, a, l)] = ss;
            }
            double ub = 0.0, qq = 0.0;
            for (int z = 0; z < n_z; ++z) {
                double uz = 0.0;
                for (int l = 0; l < 2; ++l) uz += m_at(z, l, a, w) * b_at(l, a, w);
                ub += uz * r[iaz(w, a, z)];
                qq += uz * h[iz(w, z)];
            }
            ubar[ia(w, a)] = ub;
            q[ia(w, a)] = qq;
        }
}

void NuisanceTables::finalize() {
    const std::size_t wa = static_cast<std::size_t>(n_w) * n_a;
    u.assign(wa * n_z, 0.0);
    vbar.assign(wa, 0.0);
    sbar.assign(wa, 0.0);
    for (int w = 0; w < n_w; ++w)
        for (int a = 0; a < n_a; ++a) {
            for (int z = 0; z < n_z; ++z) {
                double uz = 0.0;
                for (int l = 0; l < 2; ++l) uz += m_at(z, l, a, w) * b_at(l, a, w);
                u[iaz(w, a, z)] = uz;
            }
            for (int l = 0; l < 2; ++l) {
                vbar[ia(w, a)] += v[ial(w, a, l)] * b_at(l, a, w);
                sbar[ia(w, a)] += s[ial(w, a, l)] * b_at(l, a, w);
            }
        }
    if (n_a == 2) {
        q1.assign(n_w, 0.0);
        q2.assign(n_w, 0.0);
        for (int w = 0; w < n_w; ++w) {
            q1[w] = ubar[ia(w, 1)] - ubar[ia(w, 0)];
            q2[w] = q[ia(w, 1)] - q[ia(w, 0)];
        }
    } else {
        q1.clear();
        q2.clear();
    }
}

NuisanceTables true_nuisances(const DiscreteLaw& law) {
    const StateSpace& sp = law.space();
    NuisanceTables t;
    t.allocate(sp.n_w(), sp.n_a(), sp.n_z());
    for (int w = 0; w < t.n_w; ++w) {
        for (int z = 0; z < t.n_z; ++z) {
            t.h[t.iz(w, z)] = law.h(z, w);
            for (int a = 0; a < t.n_a; ++a) t.e[t.iza(w, z, a)] = law.e(a, z, w);
        }
        for (int a = 0; a < t.n_a; ++a) {
            t.g[t.ia(w, a)] = law.g(a, w);
            t.b1[t.ia(w, a)] = law.b1(a, w);
            for (int z = 0; z < t.n_z; ++z) {
                t.r[t.iaz(w, a, z)] = law.r(z, a, w);
                t.d1[t.iaz(w, a, z)] = law.d1(z, a, w);
                for (int l = 0; l < 2; ++l)
                    t.m[t.ial(w, a, l) * t.n_z + z] = law.m(z, l, a, w);
            }
        }
    }
    t.derive_secondary_exact();
    t.finalize();
    return t;
}

NuisanceId nuisance_from_string(const std::string& name) {
    if (name == "m") return NuisanceId::m;
    if (name == "g") return NuisanceId::g;
    if (name == "e") return NuisanceId::e;
    if (name == "b") return NuisanceId::b;
    if (name == "d") return NuisanceId::d;
    if (name == "r") return NuisanceId::r;
    if (name == "h") return NuisanceId::h;
    if (name == "ubar") return NuisanceId::ubar;
    if (name == "v") return NuisanceId::v;
    if (name == "s") return NuisanceId::s;
    if (name == "q") return NuisanceId::q;
    throw std::invalid_argument("unknown nuisance: " + name);
}

std::string nuisance_to_string(NuisanceId id) {
    switch (id) {
        case NuisanceId::m: return "m";
        case NuisanceId::g: return "g";
        case NuisanceId::e: return "e";
        case NuisanceId::b: return "b";
        case NuisanceId::d: return "d";
        case NuisanceId::r: return "r";
        case NuisanceId::h: return "h";
        case NuisanceId::ubar: return "ubar";
        case NuisanceId::v: return "v";
        case NuisanceId::s: return "s";
        case NuisanceId::q: return "q";
    }
    throw std::logic_error("nuisance_to_string: bad id");
}

void project_intercept_only(NuisanceTables& t, const DiscreteLaw& law, NuisanceId which) {
    const StateSpace& sp = law.space();
    // law marginals reused by several projections
    auto marginal_a = [&](int a) {
        double p = 0.0;
        for (int w = 0; w < t.n_w; ++w) p += law.g(a, w) * law.p_w(w);
        return p;
    };
    switch (which) {
        case NuisanceId::m: {
            double ey = 0.0;
            for (int w = 0; w < t.n_w; ++w)
                for (int a = 0; a < t.n_a; ++a)
                    for (int l = 0; l < 2; ++l)
                        for (int z = 0; z < t.n_z; ++z)
                            for (int y = 0; y < 2; ++y)
                                ey += y * law.p(w, a, l, z, y);
            std::fill(t.m.begin(), t.m.end(), ey);
            break;
        }
        case NuisanceId::g:
            for (int w = 0; w < t.n_w; ++w)
                for (int a = 0; a < t.n_a; ++a) t.g[t.ia(w, a)] = marginal_a(a);
            break;
        case NuisanceId::e:
            for (int w = 0; w < t.n_w; ++w)
                for (int z = 0; z < t.n_z; ++z)
                    for (int a = 0; a < t.n_a; ++a) t.e[t.iza(w, z, a)] = marginal_a(a);
            break;
        case NuisanceId::b: {
            double pl = 0.0;
            for (int w = 0; w < t.n_w; ++w)
                for (int a = 0; a < t.n_a; ++a)
                    pl += law.b1(a, w) * law.g(a, w) * law.p_w(w);
            std::fill(t.b1.begin(), t.b1.end(), pl);
            break;
        }
        case NuisanceId::d: {
            double pl = 0.0;
            for (int w = 0; w < t.n_w; ++w)
                for (int a = 0; a < t.n_a; ++a)
                    pl += law.b1(a, w) * law.g(a, w) * law.p_w(w);
            std::fill(t.d1.begin(), t.d1.end(), pl);
            break;
        }
        case NuisanceId::r: {
            for (int z = 0; z < t.n_z; ++z) {
                double pz = 0.0;
                for (int w = 0; w < t.n_w; ++w)
                    for (int a = 0; a < t.n_a; ++a)
                        pz += law.r(z, a, w) * law.g(a, w) * law.p_w(w);
                for (int w = 0; w < t.n_w; ++w)
                    for (int a = 0; a < t.n_a; ++a) t.r[t.iaz(w, a, z)] = pz;
            }
            break;
        }
        case NuisanceId::h: {
            for (int z = 0; z < t.n_z; ++z) {
                double pz = 0.0;
                for (int w = 0; w < t.n_w; ++w) pz += law.h(z, w) * law.p_w(w);
                for (int w = 0; w < t.n_w; ++w) t.h[t.iz(w, z)] = pz;
            }
            break;
        }
        case NuisanceId::ubar: {
            double mean = 0.0;
            for (int w = 0; w < t.n_w; ++w)
                for (int a = 0; a < t.n_a; ++a)
                    mean += t.ubar[t.ia(w, a)] * law.g(a, w) * law.p_w(w);
            std::fill(t.ubar.begin(), t.ubar.end(), mean);
            break;
        }
        case NuisanceId::v: {
            double mean = 0.0;
            for (int w = 0; w < t.n_w; ++w)
                for (int a = 0; a < t.n_a; ++a)
                    for (int l = 0; l < 2; ++l)
                        mean += t.v[t.ial(w, a, l)] * law.b(l, a, w) * law.g(a, w) * law.p_w(w);
            std::fill(t.v.begin(), t.v.end(), mean);
            break;
        }
        case NuisanceId::s: {
            double mean = 0.0;
            for (int w = 0; w < t.n_w; ++w)
                for (int a = 0; a < t.n_a; ++a)
                    for (int l = 0; l < 2; ++l)
                        mean += t.s[t.ial(w, a, l)] * law.b(l, a, w) * law.g(a, w) * law.p_w(w);
            std::fill(t.s.begin(), t.s.end(), mean);
            break;
        }
        case NuisanceId::q: {
            double mean = 0.0;
            for (int w = 0; w < t.n_w; ++w)
                for (int a = 0; a < t.n_a; ++a)
                    mean += t.q[t.ia(w, a)] * law.g(a, w) * law.p_w(w);
            std::fill(t.q.begin(), t.q.end(), mean);
            break;
        }
    }
    (void)sp;
}

namespace {

LearnerSpec learner_spec_from_json(const nlohmann::json& j) {
    LearnerSpec spec;
    if (j.is_string()) {
        spec.kind = learner_from_string(j.get<std::string>());
    } else {
        spec.kind = learner_from_string(j.at("kind").get<std::string>());
        if (j.contains("alpha")) spec.alpha = j.at("alpha").get<double>();
    }
    return spec;
}

nlohmann::json learner_spec_to_json(const LearnerSpec& spec) {
    return nlohmann::json{{"kind", learner_to_string(spec.kind)}, {"alpha", spec.alpha}};
}

double clamp_or_pass(double p, double lo, long& counter) {
    if (lo <= 0.0) return p;
    if (p < lo || p > 1.0 - lo) {
        ++counter;
        return clamp_prob(p, lo);
    }
    return p;
}

} // namespace

std::string LearnConfig::to_json() const {
    nlohmann::json j;
    j["m"] = learner_spec_to_json(m);
    j["g"] = learner_spec_to_json(g);
    j["e"] = learner_spec_to_json(e);
    j["b"] = learner_spec_to_json(b);
    j["d"] = learner_spec_to_json(d);
    j["r"] = learner_spec_to_json(r);
    j["h"] = learner_spec_to_json(h);
    j["secondary"] = learner_spec_to_json(secondary);
    j["bayes_coherent_e"] = bayes_coherent_e;
    j["bayes_coherent_d"] = bayes_coherent_d;
    j["clamp_lo"] = clamp_lo;
    j["secondary_path"] = path == SecondaryPath::exact_sum ? "exact_sum" : "regression";
    return j.dump();
}

LearnConfig LearnConfig::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    LearnConfig c;
    auto set = [&](const char* key, LearnerSpec& spec) {
        if (j.contains(key)) spec = learner_spec_from_json(j.at(key));
    };
    set("m", c.m);
    set("g", c.g);
    set("e", c.e);
    set("b", c.b);
    set("d", c.d);
    set("r", c.r);
    set("h", c.h);
    set("secondary", c.secondary);
    if (j.contains("bayes_coherent_e")) c.bayes_coherent_e = j.at("bayes_coherent_e").get<bool>();
    if (j.contains("bayes_coherent_d")) c.bayes_coherent_d = j.at("bayes_coherent_d").get<bool>();
    if (j.contains("clamp_lo")) c.clamp_lo = j.at("clamp_lo").get<double>();
    if (j.contains("secondary_path")) {
        std::string p = j.at("secondary_path").get<std::string>();
        if (p == "exact_sum")
            c.path = SecondaryPath::exact_sum;
        else if (p == "regression")
            c.path = SecondaryPath::regression;
        else
            throw std::invalid_argument("unknown secondary_path: " + p);
    }
    return c;
}

namespace {

// covariate rows for the learners; W columns as level indices, A and Z as
// their numeric values, L as 0/1
struct RowBuilder {
    const StateSpace& sp;

    std::vector<double> w_row(int w_idx) const {
        std::vector<int> cols = sp.w_decode(w_idx);
        return {cols.begin(), cols.end()};
    }
    std::vector<double> wa_row(int w_idx, int a) const {
        auto row = w_row(w_idx);
        row.push_back(sp.a_values[a]);
        return row;
    }
    std::vector<double> wz_row(int w_idx, int z) const {
        auto row = w_row(w_idx);
        row.push_back(sp.z_values[z]);
        return row;
    }
    std::vector<double> waz_row(int w_idx, int a, int z) const {
        auto row = wa_row(w_idx, a);
        row.push_back(sp.z_values[z]);
        return row;
    }
    std::vector<double> wal_row(int w_idx, int a, int l) const {
        auto row = wa_row(w_idx, a);
        row.push_back(l);
        return row;
    }
    std::vector<double> walz_row(int w_idx, int a, int l, int z) const {
        auto row = wal_row(w_idx, a, l);
        row.push_back(sp.z_values[z]);
        return row;
    }
};

void clamp_pmf(std::vector<double>& probs, double lo, long& counter) {
    if (lo <= 0.0) return;
    double total = 0.0;
    for (double& p : probs) {
        p = clamp_or_pass(p, lo, counter);
        total += p;
    }
    for (double& p : probs) p /= total;
}

} // namespace

std::vector<NuisanceTables> fit_primary(const Dataset& data, const FoldPlan& folds,
                                        const LearnConfig& config) {
    const StateSpace& sp = data.space;
    const RowBuilder rb{sp};
    const int n_w = sp.n_w(), n_a = sp.n_a(), n_z = sp.n_z();
    std::vector<NuisanceTables> out(folds.n_folds);
    for (std::size_t fold = 0; fold < folds.n_folds; ++fold) {
        NuisanceTables& t = out[fold];
        t.allocate(n_w, n_a, n_z);
        const std::vector<std::size_t> train = folds.train_indices(fold);
        const std::vector<double> ones(train.size(), 1.0);

        std::vector<std::vector<double>> xw, xwa, xwz, xwaz, xwal, xwalz;
        std::vector<std::size_t> ya, yz;
        std::vector<double> yl, yy;
        xw.reserve(train.size());
        for (std::size_t i : train) {
            xw.push_back(rb.w_row(data.w[i]));
            xwa.push_back(rb.wa_row(data.w[i], data.a[i]));
            xwz.push_back(rb.wz_row(data.w[i], data.z[i]));
            xwaz.push_back(rb.waz_row(data.w[i], data.a[i], data.z[i]));
            xwal.push_back(rb.wal_row(data.w[i], data.a[i], data.l[i]));
            xwalz.push_back(rb.walz_row(data.w[i], data.a[i], data.l[i], data.z[i]));
            ya.push_back(data.a[i]);
            yz.push_back(data.z[i]);
            yl.push_back(data.l[i]);
            yy.push_back(data.y[i]);
        }

        CategoricalFit fg = fit_categorical(config.g, xw, ya, n_a, ones);
        CategoricalFit fr = fit_categorical(config.r, xwa, yz, n_z, ones);
        CategoricalFit fh = fit_categorical(config.h, xw, yz, n_z, ones);
        BinaryFit fb = fit_binary(config.b, xwa, yl, ones);
        BinaryFit fm = fit_binary(config.m, xwalz, yy, ones);
        CategoricalFit fe;
        if (!config.bayes_coherent_e) fe = fit_categorical(config.e, xwz, ya, n_a, ones);
        BinaryFit fd;
        CategoricalFit frl; // p(z | l, a, w), for Bayes-coherent d
        if (config.bayes_coherent_d)
            frl = fit_categorical(config.r, xwal, yz, n_z, ones);
        else
            fd = fit_binary(config.d, xwaz, yl, ones);

        for (int w = 0; w < n_w; ++w) {
            std::vector<double> gp = fg.predict(rb.w_row(w));
            clamp_pmf(gp, config.clamp_lo, t.clamp_events);
            std::vector<double> hp = fh.predict(rb.w_row(w));
            clamp_pmf(hp, config.clamp_lo, t.clamp_events);
            for (int a = 0; a < n_a; ++a) t.g[t.ia(w, a)] = gp[a];
            for (int z = 0; z < n_z; ++z) t.h[t.iz(w, z)] = hp[z];

            for (int a = 0; a < n_a; ++a) {
                std::vector<double> rp = fr.predict(rb.wa_row(w, a));
                clamp_pmf(rp, config.clamp_lo, t.clamp_events);
                for (int z = 0; z < n_z; ++z) t.r[t.iaz(w, a, z)] = rp[z];
                t.b1[t.ia(w, a)] =
                    clamp_or_pass(fb.predict(rb.wa_row(w, a)), config.clamp_lo, t.clamp_events);
                for (int l = 0; l < 2; ++l)
                    for (int z = 0; z < n_z; ++z)
                        t.m[t.ial(w, a, l) * n_z + z] = clamp_or_pass(
                            fm.predict(rb.walz_row(w, a, l, z)), config.clamp_lo, t.clamp_events);
            }

            for (int z = 0; z < n_z; ++z) {
                std::vector<double> ep(n_a);
                if (config.bayes_coherent_e) {
                    double total = 0.0;
                    for (int a = 0; a < n_a; ++a) {
                        ep[a] = t.r[t.iaz(w, a, z)] * t.g[t.ia(w, a)];
                        total += ep[a];
                    }
                    if (total <= 0.0) {
                        // z carries no fitted mass at this w; the cell is
                        // never weighted, fall back to independence
                        for (int a = 0; a < n_a; ++a) ep[a] = t.g[t.ia(w, a)];
                    } else {
                        for (double& p : ep) p /= total;
                    }
                } else {
                    ep = fe.predict(rb.wz_row(w, z));
                }
                clamp_pmf(ep, config.clamp_lo, t.clamp_events);
                for (int a = 0; a < n_a; ++a) t.e[t.iza(w, z, a)] = ep[a];
            }

            for (int a = 0; a < n_a; ++a)
                for (int z = 0; z < n_z; ++z) {
                    double p1;
                    if (config.bayes_coherent_d) {
                        double num = frl.predict(rb.wal_row(w, a, 1))[z] * t.b1[t.ia(w, a)];
                        double den = num +
                                     frl.predict(rb.wal_row(w, a, 0))[z] * (1.0 - t.b1[t.ia(w, a)]);
                        // zero-mass conditioning event: fall back to b
                        p1 = den > 0.0 ? num / den : t.b1[t.ia(w, a)];
                    } else {
                        p1 = fd.predict(rb.waz_row(w, a, z));
                    }
                    t.d1[t.iaz(w, a, z)] = clamp_or_pass(p1, config.clamp_lo, t.clamp_events);
                }
        }
    }
    return out;
}

namespace {

// stratum-mean regression used for the pseudo-outcome (Lemma-style) path:
// saturated -> weighted group mean, intercept_only -> global mean; the
// pseudo-outcomes need not lie in [0,1], so logistic learners do not apply
struct MeanRegression {
    bool saturated;
    double global = 0.0;
    std::map<std::vector<double>, std::pair<double, double>> cells;

    void fit(const LearnerSpec& spec, const std::vector<std::vector<double>>& x,
             const std::vector<double>& y) {
        if (spec.kind == LearnerKind::logistic_main_terms)
            throw std::invalid_argument(
                "regression secondary path supports saturated or intercept_only learners");
        saturated = spec.kind == LearnerKind::saturated;
        double sy = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            sy += y[i];
            if (saturated) {
                auto& c = cells[x[i]];
                c.first += y[i];
                c.second += 1.0;
            }
        }
        global = sy / static_cast<double>(y.size());
    }
    double predict(const std::vector<double>& row) const {
        if (!saturated) return global;
        auto it = cells.find(row);
        if (it == cells.end()) return global;
        return it->second.first / it->second.second;
    }
};

} // namespace

void derive_secondary(NuisanceTables& t, const Dataset& data,
                      const std::vector<std::size_t>& train_rows, const LearnConfig& config) {
    if (config.path == SecondaryPath::exact_sum) {
        t.derive_secondary_exact();
        return;
    }
    const StateSpace& sp = data.space;
    const RowBuilder rb{sp};
    // u is needed as a pseudo-outcome input
    t.finalize();

    std::vector<std::vector<double>> xwa, xwal;
    std::vector<double> pv, ps, pu, pq;
    for (std::size_t i : train_rows) {
        const int w = data.w[i], a = data.a[i], l = data.l[i], z = data.z[i];
        xwa.push_back(rb.wa_row(w, a));
        xwal.push_back(rb.wal_row(w, a, l));
        const double bd = t.b_at(l, a, w) / t.d_at(l, z, a, w);
        const double ge = t.g[t.ia(w, a)] / t.e[t.iza(w, z, a)];
        pv.push_back(t.m_at(z, l, a, w) * bd);
        ps.push_back(t.m_at(z, l, a, w) * bd * ge);
        pu.push_back(t.u[t.iaz(w, a, z)]);
        pq.push_back(ge * t.u[t.iaz(w, a, z)]);
    }
    MeanRegression mv, ms, mu, mq;
    mv.fit(config.secondary, xwal, pv);
    ms.fit(config.secondary, xwal, ps);
    mu.fit(config.secondary, xwa, pu);
    mq.fit(config.secondary, xwa, pq);
    for (int w = 0; w < t.n_w; ++w)
        for (int a = 0; a < t.n_a; ++a) {
            for (int l = 0; l < 2; ++l) {
                t.v[t.ial(w, a, l)] = mv.predict(rb.wal_row(w, a, l));
                t.s[t.ial(w, a, l)] = ms.predict(rb.wal_row(w, a, l));
            }
            t.ubar[t.ia(w, a)] = mu.predict(rb.wa_row(w, a));
            t.q[t.ia(w, a)] = mq.predict(rb.wa_row(w, a));
        }
}

std::vector<NuisanceTables> fit_nuisances(const Dataset& data, const FoldPlan& folds,
                                          const LearnConfig& config) {
    std::vector<NuisanceTables> tables = fit_primary(data, folds, config);
    for (std::size_t fold = 0; fold < folds.n_folds; ++fold) {
        derive_secondary(tables[fold], data, folds.train_indices(fold), config);
        tables[fold].finalize();
    }
    return tables;
}

} // namespace medshift
