#pragma once

#include <string>
#include <vector>

#include "medshift/dataset.hpp"
#include "medshift/discrete_law.hpp"
#include "medshift/folds.hpp"
#include "medshift/learners.hpp"

namespace medshift {

// Dense nuisance tables over the discrete strata. Primary entries
// (m, g, e, b, d, r, h) come from exact law conditionals or fitted learners;
// the secondary entries of the influence function (v, s, ubar, q) are either
// exact sums against the stored mediator densities or pseudo-outcome
// regressions. finalize() recomputes everything that is defined as a
// deterministic functional of those entries (u, vbar, sbar, q1, q2).
struct NuisanceTables {
    int n_w = 0, n_a = 0, n_z = 0;

    // primary
    std::vector<double> m;  // ((w*n_a+a)*2+l)*n_z+z, E[Y|z,l,a,w]
    std::vector<double> g;  // w*n_a+a
    std::vector<double> e;  // (w*n_z+z)*n_a+a
    std::vector<double> b1; // w*n_a+a, P(L=1|a,w)
    std::vector<double> d1; // (w*n_a+a)*n_z+z, P(L=1|z,a,w)
    std::vector<double> r;  // (w*n_a+a)*n_z+z
    std::vector<double> h;  // w*n_z+z

    // secondary
    std::vector<double> v;    // (w*n_a+a)*2+l
    std::vector<double> s;    // (w*n_a+a)*2+l
    std::vector<double> ubar; // w*n_a+a
    std::vector<double> q;    // w*n_a+a

    // functionals of the above, filled by finalize()
    std::vector<double> u;          // (w*n_a+a)*n_z+z
    std::vector<double> vbar, sbar; // w*n_a+a
    std::vector<double> q1, q2;     // w, binary A only

    long clamp_events = 0;

    std::size_t ia(int w, int a) const { return static_cast<std::size_t>(w) * n_a + a; }
    std::size_t iaz(int w, int a, int z) const { return ia(w, a) * n_z + z; }
    std::size_t ial(int w, int a, int l) const { return ia(w, a) * 2 + l; }
    std::size_t iza(int w, int z, int a) const {
        return (static_cast<std::size_t>(w) * n_z + z) * n_a + a;
    }
    std::size_t iz(int w, int z) const { return static_cast<std::size_t>(w) * n_z + z; }

    double m_at(int z, int l, int a, int w) const { return m[ial(w, a, l) * n_z + z]; }
    double b_at(int l, int a, int w) const { return l ? b1[ia(w, a)] : 1.0 - b1[ia(w, a)]; }
    double d_at(int l, int z, int a, int w) const {
        return l ? d1[iaz(w, a, z)] : 1.0 - d1[iaz(w, a, z)];
    }

    void allocate(int n_w_, int n_a_, int n_z_);

    // v, s, ubar, q as exact finite sums against r, h, b
    void derive_secondary_exact();
    // u, vbar, sbar, q1, q2 from the current entries
    void finalize();
};

// exact nuisances of a law; no clamping
NuisanceTables true_nuisances(const DiscreteLaw& law);

enum class NuisanceId { m, g, e, b, d, r, h, ubar, v, s, q };

NuisanceId nuisance_from_string(const std::string& name);
std::string nuisance_to_string(NuisanceId id);

// replace one entry by its marginal (intercept-only) projection under the
// law; the misspecification device of the robustness checks
void project_intercept_only(NuisanceTables& tables, const DiscreteLaw& law, NuisanceId which);

enum class SecondaryPath { exact_sum, regression };

struct LearnConfig {
    LearnerSpec m, g, e, b, d, r, h;
    LearnerSpec secondary;             // regression path only
    bool bayes_coherent_e = true;      // e from (g, r)
    bool bayes_coherent_d = true;      // d from (b, r within L)
    double clamp_lo = 1e-3;            // 0 disables clamping
    SecondaryPath path = SecondaryPath::exact_sum;

    std::string to_json() const;
    static LearnConfig from_json(const std::string& text);
};

// per-fold tables, each fit only on the fold's training rows
std::vector<NuisanceTables> fit_primary(const Dataset& data, const FoldPlan& folds,
                                        const LearnConfig& config);

// fill v, s, ubar, q; the regression path refits them as pseudo-outcome
// regressions on the training rows, the exact path sums against r and h
void derive_secondary(NuisanceTables& tables, const Dataset& data,
                      const std::vector<std::size_t>& train_rows, const LearnConfig& config);

// convenience: fit_primary + derive_secondary + finalize for every fold
std::vector<NuisanceTables> fit_nuisances(const Dataset& data, const FoldPlan& folds,
                                          const LearnConfig& config);

} // namespace medshift
