#pragma once

#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace medshift {

// Finite state space for (W, A, L, Z, Y). W is a vector of discrete
// covariate columns, L and Y are binary, A and Z carry numeric level values
// (A ordered ascending). States are indexed lexicographically over
// (W columns..., A, L, Z, Y), first coordinate most significant.
struct StateSpace {
    std::vector<int> w_cards;      // cardinality of each covariate column
    std::vector<double> a_values;  // ordered ascending
    std::vector<double> z_values;  // numeric codes for the mediator levels

    int n_w() const {
        int n = 1;
        for (int c : w_cards) n *= c;
        return n;
    }
    int n_a() const { return static_cast<int>(a_values.size()); }
    int n_z() const { return static_cast<int>(z_values.size()); }

    std::size_t n_states() const {
        return static_cast<std::size_t>(n_w()) * n_a() * 2 * n_z() * 2;
    }

    void validate() const {
        if (w_cards.empty() || a_values.empty() || z_values.empty())
            throw std::invalid_argument("StateSpace: every level set must be nonempty");
        for (int c : w_cards)
            if (c < 1) throw std::invalid_argument("StateSpace: covariate cardinality < 1");
        for (std::size_t i = 1; i < a_values.size(); ++i)
            if (!(a_values[i] > a_values[i - 1]))
                throw std::invalid_argument("StateSpace: A levels must be strictly ascending");
        if (n_states() > 1000000)
            throw std::invalid_argument("StateSpace: state count exceeds 10^6");
    }

    std::size_t state_index(int w, int a, int l, int z, int y) const {
        return ((((static_cast<std::size_t>(w) * n_a() + a) * 2 + l) * n_z() + z) * 2 + y);
    }

    // flattened covariate stratum index, first column most significant
    int w_index(const std::vector<int>& cols) const {
        if (cols.size() != w_cards.size())
            throw std::invalid_argument("StateSpace: covariate arity mismatch");
        int idx = 0;
        for (std::size_t k = 0; k < cols.size(); ++k) {
            if (cols[k] < 0 || cols[k] >= w_cards[k])
                throw std::invalid_argument("StateSpace: covariate level out of range");
            idx = idx * w_cards[k] + cols[k];
        }
        return idx;
    }

    std::vector<int> w_decode(int w_idx) const {
        std::vector<int> cols(w_cards.size());
        for (int k = static_cast<int>(w_cards.size()) - 1; k >= 0; --k) {
            cols[k] = w_idx % w_cards[k];
            w_idx /= w_cards[k];
        }
        return cols;
    }
};

} // namespace medshift
