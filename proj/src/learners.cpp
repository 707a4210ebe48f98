#include "medshift/learners.hpp"

#include <stdexcept>

#include "medshift/common.hpp"

namespace medshift {

LearnerKind learner_from_string(const std::string& name) {
    if (name == "intercept_only") return LearnerKind::intercept_only;
    if (name == "logistic_main_terms") return LearnerKind::logistic_main_terms;
    if (name == "saturated") return LearnerKind::saturated;
    throw std::invalid_argument("unknown learner: " + name);
}

std::string learner_to_string(LearnerKind kind) {
    switch (kind) {
        case LearnerKind::intercept_only: return "intercept_only";
        case LearnerKind::logistic_main_terms: return "logistic_main_terms";
        case LearnerKind::saturated: return "saturated";
    }
    throw std::logic_error("learner_to_string: bad kind");
}

double BinaryFit::predict(const std::vector<double>& row) const {
    switch (kind) {
        case LearnerKind::intercept_only:
            return expit(glm.coef[0]);
        case LearnerKind::logistic_main_terms:
            return irls_predict(glm, row, 0.0, true);
        case LearnerKind::saturated: {
            auto it = strata.find(row);
            double sy = 0.0, sw = 0.0;
            if (it != strata.end()) {
                sy = it->second.first;
                sw = it->second.second;
            }
            // empty unsmoothed stratum: fall back to the training mean
            if (sw == 0.0 && alpha == 0.0) return global_mean;
            return (sy + alpha) / (sw + 2.0 * alpha);
        }
    }
    throw std::logic_error("BinaryFit::predict: bad kind");
}

BinaryFit fit_binary(const LearnerSpec& spec, const std::vector<std::vector<double>>& x,
                     const std::vector<double>& y, const std::vector<double>& weights) {
    const std::size_t n = y.size();
    if (x.size() != n || weights.size() != n)
        throw std::invalid_argument("fit_binary: row count mismatch");
    if (n == 0) throw std::invalid_argument("fit_binary: empty training data");
    BinaryFit fit;
    fit.kind = spec.kind;
    fit.alpha = spec.alpha;
    switch (spec.kind) {
        case LearnerKind::intercept_only: {
            std::vector<double> design; // no columns beyond intercept
            IrlsOptions opts;
            opts.intercept = true;
            fit.glm = fit_logistic_irls(design, 0, y, weights, std::vector<double>(n, 0.0), opts);
            break;
        }
        case LearnerKind::logistic_main_terms: {
            const std::size_t p = x[0].size();
            std::vector<double> design(n * p);
            for (std::size_t i = 0; i < n; ++i) {
                if (x[i].size() != p)
                    throw std::invalid_argument("fit_binary: ragged covariate rows");
                for (std::size_t j = 0; j < p; ++j) design[i * p + j] = x[i][j];
            }
            IrlsOptions opts;
            opts.intercept = true;
            fit.glm = fit_logistic_irls(design, p, y, weights, std::vector<double>(n, 0.0), opts);
            break;
        }
        case LearnerKind::saturated: {
            double sy = 0.0, sw = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                auto& cell = fit.strata[x[i]];
                cell.first += weights[i] * y[i];
                cell.second += weights[i];
                sy += weights[i] * y[i];
                sw += weights[i];
            }
            if (sw == 0.0) throw std::runtime_error("fit_binary: zero total weight");
            fit.global_mean = sy / sw;
            break;
        }
    }
    return fit;
}

std::vector<double> CategoricalFit::predict(const std::vector<double>& row) const {
    std::vector<double> probs(n_levels, 0.0);
    switch (kind) {
        case LearnerKind::intercept_only:
            return marginal;
        case LearnerKind::logistic_main_terms: {
            double total = 0.0;
            for (std::size_t k = 0; k < n_levels; ++k) {
                probs[k] = irls_predict(one_vs_rest[k], row, 0.0, true);
                total += probs[k];
            }
            for (double& p : probs) p /= total;
            return probs;
        }
        case LearnerKind::saturated: {
            auto it = strata.find(row);
            // empty unsmoothed stratum: fall back to the training marginal
            if (it == strata.end() && alpha == 0.0) return marginal;
            double total = 0.0;
            for (std::size_t k = 0; k < n_levels; ++k) {
                double c = (it != strata.end()) ? it->second[k] : 0.0;
                probs[k] = c + alpha;
                total += probs[k];
            }
            for (double& p : probs) p /= total;
            return probs;
        }
    }
    throw std::logic_error("CategoricalFit::predict: bad kind");
}

CategoricalFit fit_categorical(const LearnerSpec& spec, const std::vector<std::vector<double>>& x,
                               const std::vector<std::size_t>& y, std::size_t n_levels,
                               const std::vector<double>& weights) {
    const std::size_t n = y.size();
    if (x.size() != n || weights.size() != n)
        throw std::invalid_argument("fit_categorical: row count mismatch");
    if (n == 0) throw std::invalid_argument("fit_categorical: empty training data");
    if (n_levels < 2) throw std::invalid_argument("fit_categorical: need at least 2 levels");
    for (std::size_t v : y)
        if (v >= n_levels) throw std::invalid_argument("fit_categorical: outcome out of range");
    CategoricalFit fit;
    fit.kind = spec.kind;
    fit.n_levels = n_levels;
    fit.alpha = spec.alpha;
    switch (spec.kind) {
        case LearnerKind::intercept_only: {
            fit.marginal.assign(n_levels, spec.alpha);
            double total = spec.alpha * static_cast<double>(n_levels);
            for (std::size_t i = 0; i < n; ++i) {
                fit.marginal[y[i]] += weights[i];
                total += weights[i];
            }
            if (total == 0.0) throw std::runtime_error("fit_categorical: zero total weight");
            for (double& p : fit.marginal) p /= total;
            break;
        }
        case LearnerKind::logistic_main_terms: {
            // one-vs-rest logits, normalized at prediction time
            for (std::size_t k = 0; k < n_levels; ++k) {
                std::vector<double> yk(n);
                for (std::size_t i = 0; i < n; ++i) yk[i] = (y[i] == k) ? 1.0 : 0.0;
                LearnerSpec sub{LearnerKind::logistic_main_terms, spec.alpha};
                fit.one_vs_rest.push_back(fit_binary(sub, x, yk, weights).glm);
            }
            break;
        }
        case LearnerKind::saturated: {
            fit.marginal.assign(n_levels, 0.0);
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                auto it = fit.strata.find(x[i]);
                if (it == fit.strata.end())
                    it = fit.strata.emplace(x[i], std::vector<double>(n_levels, 0.0)).first;
                it->second[y[i]] += weights[i];
                fit.marginal[y[i]] += weights[i];
                total += weights[i];
            }
            if (total == 0.0) throw std::runtime_error("fit_categorical: zero total weight");
            for (double& p : fit.marginal) p /= total;
            break;
        }
    }
    return fit;
}

} // namespace medshift
