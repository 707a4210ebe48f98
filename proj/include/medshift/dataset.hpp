#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "medshift/discrete_law.hpp"
#include "medshift/state_space.hpp"

namespace medshift {

// n observations over the discrete state space. The outcome is kept on the
// [0,1] scale used by the estimators; the affine back-transform constants
// are stored so results can be reported in original units.
struct Dataset {
    StateSpace space;
    std::vector<int> w;        // flattened covariate stratum per row
    std::vector<int> a;        // treatment level index
    std::vector<int> l;        // binary intermediate confounder
    std::vector<int> z;        // mediator level index
    std::vector<double> y;     // outcome, scaled to [0,1]
    double y_min = 0.0;
    double y_max = 1.0;

    std::size_t n() const { return y.size(); }
    double y_scale() const { return y_max - y_min; }
    double back_transform(double scaled) const { return y_min + scaled * y_scale(); }
};

// i.i.d. draws by inverse CDF over the lexicographic state ordering;
// a pure function of (law, n, seed)
Dataset sample(const DiscreteLaw& law, std::size_t n, std::uint64_t seed);

// column-role mapping for generic CSV data
struct ColumnRoles {
    std::vector<std::string> w_columns;
    std::string a_column, l_column, z_column, y_column;

    std::string to_json() const;
    static ColumnRoles from_json(const std::string& text);
};

// CSV I/O: comma separated, mandatory header, '#' comment lines skipped.
void write_csv(const Dataset& data, std::ostream& out,
               const std::vector<std::string>& provenance = {});
Dataset read_csv(std::istream& in, const ColumnRoles& roles);

} // namespace medshift
