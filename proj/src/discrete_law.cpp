#include "medshift/discrete_law.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace medshift {

DiscreteLaw::DiscreteLaw(StateSpace space, std::vector<double> pmf)
    : space_(std::move(space)), pmf_(std::move(pmf)) {
    space_.validate();
    if (pmf_.size() != space_.n_states())
        throw std::invalid_argument("DiscreteLaw: pmf size does not match state space");
    double total = 0.0;
    for (double p : pmf_) {
        if (p < 0.0) throw std::invalid_argument("DiscreteLaw: negative probability");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("DiscreteLaw: pmf does not sum to 1 within 1e-12");
    build_conditionals();
}

void DiscreteLaw::build_conditionals() {
    const int nw = space_.n_w(), na = space_.n_a(), nz = space_.n_z();
    pw_.assign(nw, 0.0);
    g_.assign(nw * na, 0.0);
    e_.assign(nw * nz * na, 0.0);
    b1_.assign(nw * na, 0.0);
    d1_.assign(nw * na * nz, 0.0);
    r_.assign(nw * na * nz, 0.0);
    h_.assign(nw * nz, 0.0);
    rl_.assign(nw * na * 2 * nz, 0.0);
    m_.assign(nw * na * 2 * nz, 0.0);

    // joint over (w,a,l,z) and y=1 slice
    std::vector<double> jwalz(nw * na * 2 * nz, 0.0), jy1(nw * na * 2 * nz, 0.0);
    for (int w = 0; w < nw; ++w)
        for (int a = 0; a < na; ++a)
            for (int l = 0; l < 2; ++l)
                for (int z = 0; z < nz; ++z) {
                    std::size_t k = ((static_cast<std::size_t>(w) * na + a) * 2 + l) * nz + z;
                    double p0 = p(w, a, l, z, 0), p1 = p(w, a, l, z, 1);
                    jwalz[k] = p0 + p1;
                    jy1[k] = p1;
                }

    auto cond = [this](double num, double den, int k_levels) {
        if (den <= 0.0) {
            ++degenerate_events_;
            return 1.0 / k_levels;
        }
        return num / den;
    };

    for (int w = 0; w < nw; ++w) {
        double mass_w = 0.0;
        std::vector<double> mass_wa(na, 0.0), mass_wal(na * 2, 0.0), mass_waz(na * nz, 0.0),
            mass_wz(nz, 0.0), mass_walz(na * 2 * nz, 0.0);
        for (int a = 0; a < na; ++a)
            for (int l = 0; l < 2; ++l)
                for (int z = 0; z < nz; ++z) {
                    double pj = jwalz[((static_cast<std::size_t>(w) * na + a) * 2 + l) * nz + z];
                    mass_w += pj;
                    mass_wa[a] += pj;
                    mass_wal[a * 2 + l] += pj;
                    mass_waz[a * nz + z] += pj;
                    mass_wz[z] += pj;
                    mass_walz[(a * 2 + l) * nz + z] = pj;
                }
        pw_[w] = mass_w;
        for (int a = 0; a < na; ++a) {
            g_[w * na + a] = cond(mass_wa[a], mass_w, na);
            b1_[w * na + a] = cond(mass_wal[a * 2 + 1], mass_wa[a], 2);
            for (int z = 0; z < nz; ++z) {
                r_[(w * na + a) * nz + z] = cond(mass_waz[a * nz + z], mass_wa[a], nz);
                d1_[(w * na + a) * nz + z] =
                    cond(mass_walz[(a * 2 + 1) * nz + z], mass_waz[a * nz + z], 2);
                for (int l = 0; l < 2; ++l) {
                    std::size_t k = ((static_cast<std::size_t>(w) * na + a) * 2 + l) * nz + z;
                    rl_[k] = cond(mass_walz[(a * 2 + l) * nz + z], mass_wal[a * 2 + l], nz);
                    m_[k] = cond(jy1[k], jwalz[k], 2);
                }
            }
        }
        for (int z = 0; z < nz; ++z) {
            h_[w * nz + z] = cond(mass_wz[z], mass_w, nz);
            for (int a = 0; a < na; ++a)
                e_[(w * nz + z) * na + a] = cond(mass_waz[a * nz + z], mass_wz[z], na);
        }
    }
}

std::string DiscreteLaw::to_json() const {
    nlohmann::json j;
    j["space"] = {{"w_cards", space_.w_cards},
                  {"a_levels", space_.a_values},
                  {"z_levels", space_.z_values}};
    nlohmann::json cells = nlohmann::json::array();
    const int nw = space_.n_w(), na = space_.n_a(), nz = space_.n_z();
    for (int w = 0; w < nw; ++w) {
        auto cols = space_.w_decode(w);
        for (int a = 0; a < na; ++a)
            for (int l = 0; l < 2; ++l)
                for (int z = 0; z < nz; ++z)
                    for (int y = 0; y < 2; ++y) {
                        nlohmann::json state = nlohmann::json::array();
                        for (int c : cols) state.push_back(c);
                        state.push_back(a);
                        state.push_back(l);
                        state.push_back(z);
                        state.push_back(y);
                        cells.push_back({{"state", state}, {"p", p(w, a, l, z, y)}});
                    }
    }
    j["pmf"] = std::move(cells);
    return j.dump();
}

DiscreteLaw DiscreteLaw::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    StateSpace space;
    space.w_cards = j.at("space").at("w_cards").get<std::vector<int>>();
    space.a_values = j.at("space").at("a_levels").get<std::vector<double>>();
    space.z_values = j.at("space").at("z_levels").get<std::vector<double>>();
    space.validate();
    std::vector<double> pmf(space.n_states(), 0.0);
    const std::size_t nwcols = space.w_cards.size();
    for (const auto& cell : j.at("pmf")) {
        const auto& st = cell.at("state");
        if (st.size() != nwcols + 4)
            throw std::invalid_argument("DiscreteLaw::from_json: state arity mismatch");
        std::vector<int> cols(nwcols);
        for (std::size_t k = 0; k < nwcols; ++k) cols[k] = st[k].get<int>();
        int w = space.w_index(cols);
        int a = st[nwcols].get<int>();
        int l = st[nwcols + 1].get<int>();
        int z = st[nwcols + 2].get<int>();
        int y = st[nwcols + 3].get<int>();
        double p = cell.at("p").is_string() ? std::stod(cell.at("p").get<std::string>())
                                            : cell.at("p").get<double>();
        pmf[space.state_index(w, a, l, z, y)] = p;
    }
    return DiscreteLaw(std::move(space), std::move(pmf));
}

} // namespace medshift
