#pragma once

#include <utility>

#include "medshift/discrete_law.hpp"

namespace medshift {

// Orientation of the expit used by the simulation mechanisms. The published
// mechanism defines expit(x) = {1 + exp(x)}^{-1}, which is reversed relative
// to the usual convention; both are supported, reversed is the default.
enum class ExpitOrientation { as_printed, conventional };

struct DgpSpec {
    std::pair<double, double> clamp{0.001, 0.999};
    ExpitOrientation orientation = ExpitOrientation::as_printed;

    void validate() const;
};

// Exact 128-state joint law of the binary simulation mechanism
// (W1, W2, W3, A, L, Z, Y all Bernoulli). The A-mechanism term 5/(W1+W2+W3)
// is +infinity when the covariate sum is zero; the resulting probability is
// resolved by the clamp.
DiscreteLaw build_sim_dgp(const DgpSpec& spec = DgpSpec{});

// Variant with a four-level treatment on {0,1,2,3}, used to exercise
// discrete-shift interventions. Downstream mechanisms reuse the binary
// formulas with the numeric treatment value substituted.
DiscreteLaw build_sim_dgp_four_level(const DgpSpec& spec = DgpSpec{});

} // namespace medshift
