#pragma once

#include <string>
#include <vector>

#include "medshift/state_space.hpp"

namespace medshift {

// Exact joint probability table over the finite (W, A, L, Z, Y) space.
// Immutable after construction; conditionals are precomputed so repeated
// oracle evaluation is cheap. Conditioning events with zero mass are
// flagged degenerate and yield a uniform conditional.
class DiscreteLaw {
public:
    DiscreteLaw(StateSpace space, std::vector<double> pmf);

    const StateSpace& space() const { return space_; }
    double p(int w, int a, int l, int z, int y) const {
        return pmf_[space_.state_index(w, a, l, z, y)];
    }
    const std::vector<double>& pmf() const { return pmf_; }

    double p_w(int w) const { return pw_[w]; }
    // treatment mechanism and its mediator-conditional counterpart
    double g(int a, int w) const { return g_[w * space_.n_a() + a]; }
    double e(int a, int z, int w) const { return e_[(w * space_.n_z() + z) * space_.n_a() + a]; }
    // intermediate confounder
    double b1(int a, int w) const { return b1_[w * space_.n_a() + a]; }
    double b(int l, int a, int w) const { return l ? b1(a, w) : 1.0 - b1(a, w); }
    double d1(int z, int a, int w) const { return d1_[(w * space_.n_a() + a) * space_.n_z() + z]; }
    double d(int l, int z, int a, int w) const { return l ? d1(z, a, w) : 1.0 - d1(z, a, w); }
    // mediator densities
    double r(int z, int a, int w) const { return r_[(w * space_.n_a() + a) * space_.n_z() + z]; }
    double h(int z, int w) const { return h_[w * space_.n_z() + z]; }
    double r_given_l(int z, int l, int a, int w) const {
        return rl_[((w * space_.n_a() + a) * 2 + l) * space_.n_z() + z];
    }
    // outcome regression E[Y | z, l, a, w]
    double m(int z, int l, int a, int w) const {
        return m_[((w * space_.n_a() + a) * 2 + l) * space_.n_z() + z];
    }

    int degenerate_events() const { return degenerate_events_; }

    std::string to_json() const;
    static DiscreteLaw from_json(const std::string& text);

private:
    void build_conditionals();

    StateSpace space_;
    std::vector<double> pmf_;
    std::vector<double> pw_, g_, e_, b1_, d1_, r_, h_, rl_, m_;
    int degenerate_events_ = 0;
};

} // namespace medshift
