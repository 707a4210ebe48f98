#include "medshift/dgp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "medshift/common.hpp"

namespace medshift {

void DgpSpec::validate() const {
    if (!(clamp.first > 0.0 && clamp.first < 0.5 && clamp.second > 0.5 && clamp.second < 1.0))
        throw std::invalid_argument("DgpSpec: clamp must satisfy 0 < lo < 0.5 < hi < 1");
    if (clamp.second != 1.0 - clamp.first && !(clamp.first < clamp.second))
        throw std::invalid_argument("DgpSpec: clamp lower must be below upper");
}

namespace {

struct Mechanisms {
    const DgpSpec& spec;

    double ex(double x) const {
        return spec.orientation == ExpitOrientation::as_printed ? expit_reversed(x) : expit(x);
    }
    double cl(double p) const {
        if (p < spec.clamp.first) return spec.clamp.first;
        if (p > spec.clamp.second) return spec.clamp.second;
        return p;
    }

    double p_w1() const { return cl(0.6); }
    double p_w2() const { return cl(0.3); }
    double p_w3(int w1, int w2) const { return cl(0.2 + (w1 + w2) / 3.0); }
    double p_a(int w1, int w2, int w3) const {
        int s = w1 + w2 + w3;
        double x = s == 0 ? std::numeric_limits<double>::infinity() : 2.0 + 5.0 / s;
        return cl(ex(x));
    }
    double p_l(double a, int w1, int w2, int w3) const {
        return cl(ex((w1 + w2 + w3) / 3.0 - a - std::log(2.0) + 0.2));
    }
    double p_z(int l, double a, int w1, int w2) const {
        return cl(ex(std::log(3.0) * (w1 + w2) + a - l));
    }
    double p_y(int z, int l, double a, int w1, int w2, int w3) const {
        return cl(ex(1.0 - 3.0 * (3.0 - l - 3.0 * a + z) / (2.0 + w1 + w2 + w3)));
    }
};

double bern(double p1, int x) { return x ? p1 : 1.0 - p1; }

DiscreteLaw build_dgp(const DgpSpec& spec, const std::vector<double>& a_values) {
    spec.validate();
    Mechanisms mech{spec};
    StateSpace space;
    space.w_cards = {2, 2, 2};
    space.a_values = a_values;
    space.z_values = {0.0, 1.0};
    const int na = space.n_a();

    std::vector<double> pmf(space.n_states(), 0.0);
    for (int w1 = 0; w1 < 2; ++w1)
        for (int w2 = 0; w2 < 2; ++w2)
            for (int w3 = 0; w3 < 2; ++w3) {
                double pw = bern(mech.p_w1(), w1) * bern(mech.p_w2(), w2) *
                            bern(mech.p_w3(w1, w2), w3);
                int w = space.w_index({w1, w2, w3});
                // treatment pmf: Bernoulli for binary A, softmax of the same
                // linear index scaled by the level value otherwise
                std::vector<double> ga(na);
                if (na == 2) {
                    double p1 = mech.p_a(w1, w2, w3);
                    ga = {1.0 - p1, p1};
                } else {
                    int s = w1 + w2 + w3;
                    double total = 0.0;
                    for (int ai = 0; ai < na; ++ai) {
                        double x = s == 0 ? 40.0 : (2.0 + 5.0 / s);
                        ga[ai] = std::exp(-0.4 * a_values[ai] * x / 3.0);
                        total += ga[ai];
                    }
                    for (int ai = 0; ai < na; ++ai) ga[ai] = mech.cl(ga[ai] / total);
                    total = 0.0;
                    for (double v : ga) total += v;
                    for (int ai = 0; ai < na; ++ai) ga[ai] /= total;
                }
                for (int ai = 0; ai < na; ++ai) {
                    double av = a_values[ai];
                    for (int l = 0; l < 2; ++l) {
                        double pl = bern(mech.p_l(av, w1, w2, w3), l);
                        for (int z = 0; z < 2; ++z) {
                            double pz = bern(mech.p_z(l, av, w1, w2), z);
                            double py1 = mech.p_y(z, l, av, w1, w2, w3);
                            double base = pw * ga[ai] * pl * pz;
                            pmf[space.state_index(w, ai, l, z, 0)] = base * (1.0 - py1);
                            pmf[space.state_index(w, ai, l, z, 1)] = base * py1;
                        }
                    }
                }
            }
    return DiscreteLaw(std::move(space), std::move(pmf));
}

} // namespace

DiscreteLaw build_sim_dgp(const DgpSpec& spec) { return build_dgp(spec, {0.0, 1.0}); }

DiscreteLaw build_sim_dgp_four_level(const DgpSpec& spec) {
    return build_dgp(spec, {0.0, 1.0, 2.0, 3.0});
}

} // namespace medshift
