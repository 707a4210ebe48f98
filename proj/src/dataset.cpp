#include "medshift/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "medshift/common.hpp"

namespace medshift {

Dataset sample(const DiscreteLaw& law, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
    const auto& space = law.space();
    const auto& pmf = law.pmf();
    std::vector<double> cdf(pmf.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < pmf.size(); ++i) {
        acc += pmf[i];
        cdf[i] = acc;
    }
    cdf.back() = 1.0;

    Dataset data;
    data.space = space;
    data.w.reserve(n);
    data.a.reserve(n);
    data.l.reserve(n);
    data.z.reserve(n);
    data.y.reserve(n);
    const int na = space.n_a(), nz = space.n_z();
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        double u = u01(rng());
        std::size_t k = std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
        if (k >= pmf.size()) k = pmf.size() - 1;
        int y = static_cast<int>(k % 2);
        k /= 2;
        int z = static_cast<int>(k % nz);
        k /= nz;
        int l = static_cast<int>(k % 2);
        k /= 2;
        int a = static_cast<int>(k % na);
        k /= na;
        data.w.push_back(static_cast<int>(k));
        data.a.push_back(a);
        data.l.push_back(l);
        data.z.push_back(z);
        data.y.push_back(static_cast<double>(y));
    }
    return data;
}

std::string ColumnRoles::to_json() const {
    nlohmann::json j;
    j["W"] = w_columns;
    j["A"] = a_column;
    j["L"] = l_column;
    j["Z"] = z_column;
    j["Y"] = y_column;
    return j.dump();
}

ColumnRoles ColumnRoles::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    ColumnRoles roles;
    roles.w_columns = j.at("W").get<std::vector<std::string>>();
    roles.a_column = j.at("A").get<std::string>();
    roles.l_column = j.at("L").get<std::string>();
    roles.z_column = j.at("Z").get<std::string>();
    roles.y_column = j.at("Y").get<std::string>();
    if (roles.w_columns.empty()) throw std::invalid_argument("roles: no W columns");
    std::vector<std::string> all = roles.w_columns;
    all.push_back(roles.a_column);
    all.push_back(roles.l_column);
    all.push_back(roles.z_column);
    all.push_back(roles.y_column);
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end())
        throw std::invalid_argument("roles: column roles must be disjoint");
    return roles;
}

namespace {

std::string format_number(double v) {
    if (v == std::floor(v) && std::abs(v) < 1e15) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.0f", v);
        return buf;
    }
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

void write_csv(const Dataset& data, std::ostream& out,
               const std::vector<std::string>& provenance) {
    for (const auto& line : provenance) out << "# " << line << "\n";
    const std::size_t nwcols = data.space.w_cards.size();
    for (std::size_t k = 0; k < nwcols; ++k) out << "W" << (k + 1) << ",";
    out << "A,L,Z,Y\n";
    for (std::size_t i = 0; i < data.n(); ++i) {
        auto cols = data.space.w_decode(data.w[i]);
        for (int c : cols) out << c << ",";
        out << format_number(data.space.a_values[data.a[i]]) << "," << data.l[i] << ","
            << format_number(data.space.z_values[data.z[i]]) << ","
            << format_number(data.back_transform(data.y[i])) << "\n";
    }
}

Dataset read_csv(std::istream& in, const ColumnRoles& roles) {
    std::string line;
    std::vector<std::string> header;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
        break;
    }
    if (header.empty()) throw std::invalid_argument("read_csv: missing header row");

    auto col_of = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            throw std::invalid_argument("read_csv: column '" + name + "' not found");
        return static_cast<std::size_t>(it - header.begin());
    };
    std::vector<std::size_t> w_cols;
    for (const auto& name : roles.w_columns) w_cols.push_back(col_of(name));
    std::size_t ac = col_of(roles.a_column), lc = col_of(roles.l_column),
                zc = col_of(roles.z_column), yc = col_of(roles.y_column);

    std::vector<std::vector<double>> raw; // row-major, header order
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t pos = 0;
                double v = std::stod(cell, &pos);
                if (pos != cell.size()) throw std::invalid_argument("trailing");
                row.push_back(v);
            } catch (const std::exception&) {
                throw std::invalid_argument("read_csv: non-numeric cell at line " +
                                            std::to_string(lineno) + ", column " +
                                            std::to_string(row.size() + 1));
            }
        }
        if (row.size() != header.size())
            throw std::invalid_argument("read_csv: wrong cell count at line " +
                                        std::to_string(lineno));
        raw.push_back(std::move(row));
    }
    if (raw.empty()) throw std::invalid_argument("read_csv: no data rows");

    auto as_int = [](double v, const char* what) {
        if (v != std::floor(v))
            throw std::invalid_argument(std::string("read_csv: ") + what + " must be integral");
        return static_cast<int>(v);
    };

    Dataset data;
    // covariate cards from observed maxima (levels assumed coded 0..k-1)
    for (std::size_t k = 0; k < w_cols.size(); ++k) {
        int card = 1;
        for (const auto& row : raw)
            card = std::max(card, as_int(row[w_cols[k]], "W level") + 1);
        data.space.w_cards.push_back(card);
    }
    // treatment and mediator levels from distinct observed values
    std::vector<double> a_levels, z_levels;
    for (const auto& row : raw) {
        a_levels.push_back(row[ac]);
        z_levels.push_back(row[zc]);
    }
    auto uniq = [](std::vector<double>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    uniq(a_levels);
    uniq(z_levels);
    data.space.a_values = a_levels;
    data.space.z_values = z_levels;
    data.space.validate();

    double y_lo = raw[0][yc], y_hi = raw[0][yc];
    for (const auto& row : raw) {
        y_lo = std::min(y_lo, row[yc]);
        y_hi = std::max(y_hi, row[yc]);
    }
    bool binary_y = true;
    for (const auto& row : raw)
        if (row[yc] != 0.0 && row[yc] != 1.0) binary_y = false;
    if (binary_y) {
        data.y_min = 0.0;
        data.y_max = 1.0;
    } else {
        if (y_hi == y_lo) y_hi = y_lo + 1.0; // constant outcome, avoid 0/0
        data.y_min = y_lo;
        data.y_max = y_hi;
    }

    for (const auto& row : raw) {
        std::vector<int> cols(w_cols.size());
        for (std::size_t k = 0; k < w_cols.size(); ++k) cols[k] = as_int(row[w_cols[k]], "W level");
        data.w.push_back(data.space.w_index(cols));
        data.a.push_back(static_cast<int>(
            std::lower_bound(a_levels.begin(), a_levels.end(), row[ac]) - a_levels.begin()));
        int l = as_int(row[lc], "L");
        if (l != 0 && l != 1) throw std::invalid_argument("read_csv: L must be binary");
        data.l.push_back(l);
        data.z.push_back(static_cast<int>(
            std::lower_bound(z_levels.begin(), z_levels.end(), row[zc]) - z_levels.begin()));
        data.y.push_back((row[yc] - data.y_min) / (data.y_max - data.y_min));
    }
    return data;
}

} // namespace medshift
