#include "medshift/folds.hpp"

#include <random>
#include <stdexcept>

#include "medshift/common.hpp"

namespace medshift {

std::vector<std::size_t> FoldPlan::train_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    out.reserve(assignment.size());
    for (std::size_t i = 0; i < assignment.size(); ++i)
        if (assignment[i] != fold || n_folds == 1) out.push_back(i);
    return out;
}

std::vector<std::size_t> FoldPlan::test_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignment.size(); ++i)
        if (assignment[i] == fold) out.push_back(i);
    return out;
}

FoldPlan make_folds(std::size_t n, std::size_t n_folds, std::uint64_t seed) {
    if (n_folds < 2) throw std::invalid_argument("make_folds: need at least 2 folds");
    if (n_folds > n) throw std::invalid_argument("make_folds: more folds than observations");
    // block of fold labels 0,1,...,J-1,0,1,... then a Fisher-Yates shuffle
    std::vector<std::size_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = i % n_folds;
    std::mt19937_64 rng(seed);
    for (std::size_t i = n; i-- > 1;) {
        std::size_t j = static_cast<std::size_t>(u01(rng()) * static_cast<double>(i + 1));
        if (j > i) j = i;
        std::swap(labels[i], labels[j]);
    }
    return FoldPlan{n_folds, std::move(labels)};
}

FoldPlan single_fold(std::size_t n) {
    return FoldPlan{1, std::vector<std::size_t>(n, 0)};
}

} // namespace medshift
