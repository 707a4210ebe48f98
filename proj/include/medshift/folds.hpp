#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace medshift {

// balanced random partition of {0..n-1} into J folds
struct FoldPlan {
    std::size_t n_folds = 0;
    std::vector<std::size_t> assignment; // assignment[i] in [0, n_folds)

    std::vector<std::size_t> train_indices(std::size_t fold) const;
    std::vector<std::size_t> test_indices(std::size_t fold) const;
};

FoldPlan make_folds(std::size_t n, std::size_t n_folds, std::uint64_t seed);

// everything trains and evaluates on the full sample (used for oracle-style
// single-pass fits, e.g. TMLE fixed-point checks)
FoldPlan single_fold(std::size_t n);

} // namespace medshift
