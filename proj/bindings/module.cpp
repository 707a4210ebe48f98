#include <sstream>

#include <pybind11/pybind11.h>

#include <json.hpp>

#include "medshift/dataset.hpp"
#include "medshift/dgp.hpp"
#include "medshift/estimate.hpp"
#include "medshift/mc.hpp"
#include "medshift/oracle.hpp"

namespace py = pybind11;
using namespace medshift;

namespace {

DiscreteLaw law_from_arg(const std::string& law_json, const std::string& variant) {
    if (!law_json.empty()) return DiscreteLaw::from_json(law_json);
    if (variant == "binary") return build_sim_dgp();
    if (variant == "four_level") return build_sim_dgp_four_level();
    throw std::invalid_argument("unknown law variant: " + variant);
}

std::string oracle_json(const std::string& law_json, const std::string& variant,
                        const std::string& kind, double delta) {
    DiscreteLaw law = law_from_arg(law_json, variant);
    InterventionSpec spec = InterventionSpec::parse(kind, delta);
    spec.validate(law.space().n_a());
    OracleEffects eff = oracle_effects(law, spec);
    auto bounds = oracle_efficiency_bounds(law, spec);
    nlohmann::json j{{"theta_1_null", eff.theta_1_null},
                     {"theta_1_delta", eff.theta_1_delta},
                     {"theta_2_delta", eff.theta_2_delta},
                     {"psi_d", eff.psi_d},
                     {"psi_i", eff.psi_i},
                     {"sigma2_d", bounds.first},
                     {"sigma2_i", bounds.second}};
    return j.dump();
}

std::string simulate_csv(const std::string& law_json, const std::string& variant, std::size_t n,
                         std::uint64_t seed) {
    DiscreteLaw law = law_from_arg(law_json, variant);
    Dataset data = sample(law, n, seed);
    std::ostringstream out;
    write_csv(data, out);
    return out.str();
}

std::string estimate_csv(const std::string& csv_text, const std::string& roles_json,
                         const std::string& kind, double delta, const std::string& estimator,
                         std::size_t n_folds, std::uint64_t seed,
                         const std::string& learners_json, bool use_stabilization) {
    ColumnRoles roles = ColumnRoles::from_json(roles_json);
    std::istringstream in(csv_text);
    Dataset data = read_csv(in, roles);
    InterventionSpec spec = InterventionSpec::parse(kind, delta);
    spec.validate(data.space.n_a());
    LearnConfig learn;
    if (!learners_json.empty()) learn = LearnConfig::from_json(learners_json);
    FoldPlan folds = make_folds(data.n(), n_folds, seed);
    std::vector<NuisanceTables> tables = fit_nuisances(data, folds, learn);
    nlohmann::json out;
    if (estimator == "onestep" || estimator == "both")
        out["onestep"] =
            nlohmann::json::parse(onestep(data, tables, folds, spec, use_stabilization).to_json());
    if (estimator == "tmle" || estimator == "both")
        out["tmle"] = nlohmann::json::parse(tmle(data, tables, folds, spec).to_json());
    if (out.empty()) throw std::invalid_argument("unknown estimator: " + estimator);
    return out.dump();
}

std::string law_json_of(const std::string& variant) {
    return law_from_arg("", variant).to_json();
}

} // namespace

PYBIND11_MODULE(_medshift, mod) {
    mod.doc() = "stochastic-interventional (in)direct effect estimation";
    mod.def("law_json", &law_json_of, py::arg("variant") = "binary",
            "built-in simulation law as a JSON document");
    mod.def("oracle", &oracle_json, py::arg("law_json") = "", py::arg("variant") = "binary",
            py::arg("kind") = "odds_tilt", py::arg("delta") = 2.0,
            "exact effects and efficiency bounds (JSON)");
    mod.def("simulate", &simulate_csv, py::arg("law_json") = "", py::arg("variant") = "binary",
            py::arg("n") = 1000, py::arg("seed") = 1, "draw a dataset as CSV text");
    mod.def("estimate", &estimate_csv, py::arg("csv_text"), py::arg("roles_json"),
            py::arg("kind") = "odds_tilt", py::arg("delta") = 2.0, py::arg("estimator") = "both",
            py::arg("n_folds") = 5, py::arg("seed") = 1, py::arg("learners_json") = "",
            py::arg("stabilize") = false, "one-step and/or TML estimates (JSON)");
}
