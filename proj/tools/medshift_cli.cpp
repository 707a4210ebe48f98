#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "medshift/common.hpp"
#include "medshift/dataset.hpp"
#include "medshift/dgp.hpp"
#include "medshift/estimate.hpp"
#include "medshift/mc.hpp"
#include "medshift/oracle.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

// stable hash of the canonical config string, for provenance headers
std::string config_hash(const std::string& text) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) hash = medshift::mix64(hash ^ c);
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

std::vector<std::string> provenance_lines(const std::string& config, std::uint64_t seed) {
    return {"medshift version " + std::string(kVersion), "config_hash " + config_hash(config),
            "seed " + std::to_string(seed)};
}

nlohmann::json provenance_json(const std::string& config, std::uint64_t seed) {
    return {{"version", kVersion}, {"config_hash", config_hash(config)}, {"seed", seed}};
}

std::vector<double> parse_delta_grid(const std::string& text) {
    std::vector<double> grid;
    if (text.find(':') != std::string::npos) {
        double start, stop, step;
        char c1, c2;
        std::istringstream ss(text);
        if (!(ss >> start >> c1 >> stop >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0)
            throw std::invalid_argument("bad delta grid '" + text + "' (expected start:stop:step)");
        for (double d = start; d <= stop + 1e-12; d += step) grid.push_back(d);
    } else {
        std::istringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item.empty()) continue;
            grid.push_back(std::stod(item));
        }
    }
    if (grid.empty()) throw std::invalid_argument("empty delta grid");
    return grid;
}

medshift::DiscreteLaw load_law(const std::string& law_path, const std::string& variant) {
    if (!law_path.empty()) return medshift::DiscreteLaw::from_json(read_file(law_path));
    if (variant == "binary") return medshift::build_sim_dgp();
    if (variant == "four_level") return medshift::build_sim_dgp_four_level();
    throw std::invalid_argument("unknown law variant '" + variant +
                                "' (expected binary or four_level)");
}

struct EstimateRow {
    std::string intervention;
    double delta;
    std::string estimator;
    medshift::EffectEstimate est;
};

std::string estimates_csv(const std::vector<EstimateRow>& rows,
                          const std::vector<std::string>& provenance) {
    std::ostringstream out;
    for (const std::string& line : provenance) out << "# " << line << "\n";
    out << "intervention,delta,estimator,psi_d,se_d,ci_d_lo,ci_d_hi,psi_i,se_i,ci_i_lo,ci_i_hi,"
           "converged,tmle_iterations\n";
    char buf[512];
    for (const EstimateRow& r : rows) {
        std::snprintf(buf, sizeof(buf),
                      "%s,%.17g,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d\n",
                      r.intervention.c_str(), r.delta, r.estimator.c_str(), r.est.psi_d,
                      r.est.se_d, r.est.ci_d.first, r.est.ci_d.second, r.est.psi_i, r.est.se_i,
                      r.est.ci_i.first, r.est.ci_i.second, r.est.diagnostics.converged ? 1 : 0,
                      r.est.diagnostics.tmle_iterations);
        out << buf;
    }
    return out.str();
}

int cmd_simulate(const std::string& law_path, const std::string& variant, std::size_t n,
                 std::uint64_t seed, bool metrics, const std::string& config_path,
                 const std::string& out_dir) {
    medshift::DiscreteLaw law = load_law(law_path, variant);
    std::filesystem::create_directories(out_dir);
    if (!metrics) {
        medshift::Dataset data = medshift::sample(law, n, seed);
        std::ostringstream out;
        medshift::write_csv(data, out, provenance_lines("simulate n=" + std::to_string(n), seed));
        write_file(out_dir + "/dataset.csv", out.str());
        std::cout << "wrote " << out_dir << "/dataset.csv (" << n << " rows)\n";
        return 0;
    }
    medshift::SimConfig config;
    if (!config_path.empty()) config = medshift::SimConfig::from_json(read_file(config_path));
    const std::string canonical = config.to_json();
    medshift::MetricsReport report = medshift::run_replications(law, config);
    std::ostringstream csv;
    for (const std::string& line : provenance_lines(canonical, config.master_seed))
        csv << "# " << line << "\n";
    csv << report.to_csv();
    write_file(out_dir + "/metrics.csv", csv.str());
    nlohmann::json j;
    j["_provenance"] = provenance_json(canonical, config.master_seed);
    j["config"] = nlohmann::json::parse(canonical);
    j["rows"] = nlohmann::json::parse(report.to_json());
    write_file(out_dir + "/metrics.json", j.dump(2) + "\n");
    std::cout << "wrote " << out_dir << "/metrics.csv and metrics.json\n";
    return 0;
}

int cmd_estimate(const std::string& input, const std::string& roles_path,
                 const std::string& intervention, const std::string& delta_grid,
                 const std::string& estimator, const std::string& learners_path,
                 std::size_t n_folds, std::uint64_t seed, bool use_stabilization,
                 const std::string& out_dir, const std::string& eif_out) {
    if (estimator != "onestep" && estimator != "tmle" && estimator != "both")
        throw std::invalid_argument("unknown estimator '" + estimator +
                                    "' (expected onestep, tmle, both)");
    medshift::ColumnRoles roles = medshift::ColumnRoles::from_json(read_file(roles_path));
    std::ifstream in(input);
    if (!in) throw std::invalid_argument("cannot open file: " + input);
    medshift::Dataset data = medshift::read_csv(in, roles);

    std::vector<double> grid = parse_delta_grid(delta_grid);
    medshift::LearnConfig learn;
    if (!learners_path.empty())
        learn = medshift::LearnConfig::from_json(read_file(learners_path));
    medshift::FoldPlan folds = medshift::make_folds(data.n(), n_folds, seed);
    std::vector<medshift::NuisanceTables> tables = medshift::fit_nuisances(data, folds, learn);

    const bool want_tmle = estimator == "tmle" || estimator == "both";
    std::vector<EstimateRow> rows;
    nlohmann::json jrows = nlohmann::json::array();
    for (double delta : grid) {
        medshift::InterventionSpec spec = medshift::InterventionSpec::parse(intervention, delta);
        spec.validate(data.space.n_a());
        if (want_tmle && spec.kind == medshift::InterventionKind::discrete_shift)
            throw std::invalid_argument(
                "tmle does not support discrete_shift interventions; use --estimator onestep");
        if (estimator != "tmle") {
            EstimateRow row{intervention, delta, "onestep",
                            medshift::onestep(data, tables, folds, spec, use_stabilization)};
            jrows.push_back(nlohmann::json::parse(row.est.to_json()));
            jrows.back()["estimator"] = "onestep";
            jrows.back()["delta"] = delta;
            rows.push_back(std::move(row));
        }
        if (want_tmle) {
            EstimateRow row{intervention, delta, "tmle",
                            medshift::tmle(data, tables, folds, spec)};
            jrows.push_back(nlohmann::json::parse(row.est.to_json()));
            jrows.back()["estimator"] = "tmle";
            jrows.back()["delta"] = delta;
            rows.push_back(std::move(row));
        }
    }

    const std::string canonical = "estimate " + intervention + " " + delta_grid + " " + estimator;
    std::filesystem::create_directories(out_dir);
    write_file(out_dir + "/estimates.csv", estimates_csv(rows, provenance_lines(canonical, seed)));
    nlohmann::json j;
    j["_provenance"] = provenance_json(canonical, seed);
    j["estimates"] = jrows;
    write_file(out_dir + "/estimates.json", j.dump(2) + "\n");
    if (!eif_out.empty()) {
        std::ostringstream out;
        out << "row,eif_d,eif_i,estimator,delta\n";
        char buf[160];
        for (const EstimateRow& r : rows)
            for (std::size_t i = 0; i < r.est.eif_d.size(); ++i) {
                std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%s,%.17g\n", i, r.est.eif_d[i],
                              r.est.eif_i[i], r.estimator.c_str(), r.delta);
                out << buf;
            }
        write_file(eif_out, out.str());
    }
    std::cout << "wrote " << out_dir << "/estimates.csv and estimates.json\n";
    return 0;
}

int cmd_oracle(const std::string& law_path, const std::string& variant,
               const std::string& intervention, const std::string& delta_grid, bool robustness,
               const std::string& out_dir) {
    medshift::DiscreteLaw law = load_law(law_path, variant);
    std::vector<double> grid = parse_delta_grid(delta_grid);
    nlohmann::json points = nlohmann::json::array();
    for (double delta : grid) {
        medshift::InterventionSpec spec = medshift::InterventionSpec::parse(intervention, delta);
        spec.validate(law.space().n_a());
        medshift::OracleEffects eff = medshift::oracle_effects(law, spec);
        auto bounds = medshift::oracle_efficiency_bounds(law, spec);
        points.push_back({{"intervention", intervention},
                          {"delta", delta},
                          {"theta_1_null", eff.theta_1_null},
                          {"theta_1_delta", eff.theta_1_delta},
                          {"theta_2_delta", eff.theta_2_delta},
                          {"psi_d", eff.psi_d},
                          {"psi_i", eff.psi_i},
                          {"sigma2_d", bounds.first},
                          {"sigma2_i", bounds.second}});
    }
    nlohmann::json j;
    const std::string canonical = "oracle " + intervention + " " + delta_grid;
    j["_provenance"] = provenance_json(canonical, 0);
    j["points"] = points;

    if (robustness) {
        nlohmann::json checks = nlohmann::json::array();
        for (const medshift::RobustnessConfig& config : medshift::robustness_configs()) {
            medshift::NuisanceTables eta1 = medshift::configured_nuisances(law, config);
            for (double delta : grid) {
                medshift::InterventionSpec spec =
                    medshift::InterventionSpec::parse(intervention, delta);
                for (int jj : {1, 2}) {
                    double theta = medshift::oracle_theta(law, spec, jj);
                    double mean = medshift::oracle_eif_mean(law, spec, jj, eta1);
                    checks.push_back({{"config", config.name},
                                      {"delta", delta},
                                      {"j", jj},
                                      {"theta", theta},
                                      {"eif_mean", mean},
                                      {"pass", std::abs(mean - theta) <= 1e-8}});
                }
            }
        }
        j["robustness"] = checks;
    }
    std::filesystem::create_directories(out_dir);
    write_file(out_dir + "/oracle.json", j.dump(2) + "\n");
    std::cout << "wrote " << out_dir << "/oracle.json\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic-interventional (in)direct effect estimation"};
    app.require_subcommand(1);

    std::string law_path, variant = "binary", out_dir = ".", config_path;
    std::string input, roles_path, intervention = "odds_tilt", delta_grid = "2";
    std::string estimator = "both", learners_path, eif_out;
    std::size_t n = 1000, n_folds = 5;
    std::uint64_t seed = 1;
    bool metrics = false, use_stabilization = false, robustness = false;

    CLI::App* sim = app.add_subcommand("simulate", "draw datasets or run the replication study");
    sim->add_option("--law", law_path, "law JSON file (default: built-in mechanism)");
    sim->add_option("--law-variant", variant, "binary | four_level");
    sim->add_option("--n", n, "sample size");
    sim->add_option("--seed", seed, "RNG seed");
    sim->add_flag("--metrics", metrics, "run the replication study instead of sampling");
    sim->add_option("--config", config_path, "SimConfig JSON (with --metrics)");
    sim->add_option("--out-dir", out_dir, "output directory");

    CLI::App* est = app.add_subcommand("estimate", "estimate effects on a CSV dataset");
    est->add_option("--input", input, "input CSV")->required();
    est->add_option("--roles", roles_path, "column-role JSON")->required();
    est->add_option("--intervention", intervention,
                    "identity | odds_tilt | exp_tilt | discrete_shift");
    est->add_option("--delta,--delta-grid", delta_grid, "delta value, list, or start:stop:step");
    est->add_option("--estimator", estimator, "onestep | tmle | both");
    est->add_option("--learners", learners_path, "learner config JSON");
    est->add_option("--folds", n_folds, "cross-fitting folds");
    est->add_option("--seed", seed, "fold-assignment seed");
    est->add_flag("--stabilize", use_stabilization, "weight stabilization (one-step)");
    est->add_option("--out-dir", out_dir, "output directory");
    est->add_option("--eif-out", eif_out, "per-observation EIF CSV path");

    CLI::App* ora = app.add_subcommand("oracle", "exact truth for a discrete law");
    ora->add_option("--law", law_path, "law JSON file (default: built-in mechanism)");
    ora->add_option("--law-variant", variant, "binary | four_level");
    ora->add_option("--intervention", intervention,
                    "identity | odds_tilt | exp_tilt | discrete_shift");
    ora->add_option("--delta,--delta-grid", delta_grid, "delta value, list, or start:stop:step");
    ora->add_flag("--robustness", robustness, "also check the consistency configurations");
    ora->add_option("--out-dir", out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed())
            return cmd_simulate(law_path, variant, n, seed, metrics, config_path, out_dir);
        if (est->parsed())
            return cmd_estimate(input, roles_path, intervention, delta_grid, estimator,
                                learners_path, n_folds, seed, use_stabilization, out_dir, eif_out);
        if (ora->parsed())
            return cmd_oracle(law_path, variant, intervention, delta_grid, robustness, out_dir);
    } catch (const std::invalid_argument& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
    return 1;
}
