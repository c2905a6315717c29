// Copyright (c) 2026 The lorahull authors
// SPDX-License-Identifier: Apache-2.0

#include "lorahull/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "lorahull/diagnostics.hpp"
#include "lorahull/errors.hpp"

namespace lorahull {

namespace {

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

std::string row_id(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "r%04zu", index);
    return buf;
}

std::string grid_str(std::span<const float> grid) {
    std::string s = "[";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (i) s += ",";
        s += fmt_g(grid[i]);
    }
    return s + "]";
}

void check_attribute(std::size_t attribute, std::size_t n) {
    if (attribute >= n) {
        throw ValidationError("attribute index " + std::to_string(attribute) +
                              " out of range for " + std::to_string(n) + " attributes");
    }
}

void check_binary_alpha(float value, const char* what) {
    if (value != 0.0f && value != 1.0f) {
        throw ValidationError(std::string(what) + " must be 0 or 1, got " + fmt_g(value));
    }
}

// Derives the trailing lambda so the 32-bit left-to-right fold of the row is
// exactly 1.0f (clamped at zero against pathological rounding).
void finalize_lambda(std::vector<float>& lambda) {
    float partial = 0.0f;
    for (std::size_t j = 0; j + 1 < lambda.size(); ++j) partial += lambda[j];
    lambda.back() = std::max(0.0f, 1.0f - partial);
}

std::vector<float> lambda_with_fill(std::size_t n, std::size_t varied, float lambda_i) {
    std::vector<float> lambda(n, 0.0f);
    const float fill =
        n > 1 ? static_cast<float>((1.0f - lambda_i) / static_cast<float>(n - 1)) : 0.0f;
    for (std::size_t j = 0; j < n; ++j) lambda[j] = (j == varied) ? lambda_i : fill;
    finalize_lambda(lambda);
    return lambda;
}

}  // namespace

const char* plan_kind_name(PlanKind kind) {
    switch (kind) {
        case PlanKind::alpha_line: return "alpha_line";
        case PlanKind::spider: return "spider";
        case PlanKind::lambda_line: return "lambda_line";
        case PlanKind::simplex: return "simplex";
    }
    return "unknown";
}

SweepPlan plan_alpha_line(std::size_t n_attributes, std::size_t attribute, float alpha_min,
                          float alpha_max, std::size_t steps) {
    check_attribute(attribute, n_attributes);
    if (!(alpha_min < alpha_max)) {
        throw ValidationError("alpha range is empty: [" + fmt_g(alpha_min) + ", " +
                              fmt_g(alpha_max) + "]");
    }
    if (steps < 2) {
        throw ValidationError("alpha line needs at least 2 steps");
    }

    SweepPlan plan{PlanKind::alpha_line,
                   "alpha_line(n=" + std::to_string(n_attributes) +
                       ",attr=" + std::to_string(attribute) + ",min=" + fmt_g(alpha_min) +
                       ",max=" + fmt_g(alpha_max) + ",steps=" + std::to_string(steps) + ")",
                   n_attributes,
                   {attribute},
                   {}};

    std::vector<float> lambda(n_attributes, 0.0f);
    lambda[attribute] = 1.0f;
    finalize_lambda(lambda);

    const double span = static_cast<double>(alpha_max) - static_cast<double>(alpha_min);
    for (std::size_t j = 0; j < steps; ++j) {
        float a;
        if (j == 0) {
            a = alpha_min;
        } else if (j == steps - 1) {
            a = alpha_max;
        } else {
            a = static_cast<float>(alpha_min +
                                   span * static_cast<double>(j) / static_cast<double>(steps - 1));
        }
        std::vector<float> alpha(n_attributes, 0.0f);
        alpha[attribute] = a;
        plan.rows.push_back(SweepRow{row_id(j), std::move(alpha), lambda});
    }
    return plan;
}

SweepPlan plan_spider(std::size_t n_attributes, std::size_t varied,
                      std::span<const float> alpha_grid, float lambda_i,
                      float fixed_alpha_others) {
    if (n_attributes < 2) {
        throw ValidationError("spider plans need at least 2 attributes");
    }
    check_attribute(varied, n_attributes);
    check_binary_alpha(fixed_alpha_others, "fixed alpha for the remaining attributes");
    if (lambda_i < 0.0f || lambda_i > 1.0f) {
        throw ValidationError("lambda_i must lie in [0, 1], got " + fmt_g(lambda_i));
    }
    if (alpha_grid.empty()) {
        throw ValidationError("spider plan needs a non-empty alpha grid");
    }

    SweepPlan plan{PlanKind::spider,
                   "spider(n=" + std::to_string(n_attributes) + ",varied=" +
                       std::to_string(varied) + ",lambda_i=" + fmt_g(lambda_i) +
                       ",fixed_alpha=" + fmt_g(fixed_alpha_others) +
                       ",grid=" + grid_str(alpha_grid) + ")",
                   n_attributes,
                   {varied},
                   {}};

    const std::vector<float> lambda = lambda_with_fill(n_attributes, varied, lambda_i);
    for (std::size_t j = 0; j < alpha_grid.size(); ++j) {
        std::vector<float> alpha(n_attributes, fixed_alpha_others);
        alpha[varied] = alpha_grid[j];
        plan.rows.push_back(SweepRow{row_id(j), std::move(alpha), lambda});
    }
    return plan;
}

SweepPlan plan_lambda_line(std::size_t n_attributes, std::size_t attribute, float alpha_i,
                           std::span<const float> lambda_grid, float fixed_alpha_others) {
    if (n_attributes < 2) {
        throw ValidationError("lambda lines need at least 2 attributes");
    }
    check_attribute(attribute, n_attributes);
    check_binary_alpha(alpha_i, "alpha_i");
    check_binary_alpha(fixed_alpha_others, "fixed alpha for the remaining attributes");
    if (lambda_grid.empty()) {
        throw ValidationError("lambda line needs a non-empty grid");
    }
    for (float l : lambda_grid) {
        if (l < 0.0f || l > 1.0f) {
            throw ValidationError("lambda grid value " + fmt_g(l) + " lies outside [0, 1]");
        }
    }

    SweepPlan plan{PlanKind::lambda_line,
                   "lambda_line(n=" + std::to_string(n_attributes) + ",attr=" +
                       std::to_string(attribute) + ",alpha_i=" + fmt_g(alpha_i) +
                       ",fixed_alpha=" + fmt_g(fixed_alpha_others) +
                       ",grid=" + grid_str(lambda_grid) + ")",
                   n_attributes,
                   {attribute},
                   {}};

    std::vector<float> alpha(n_attributes, fixed_alpha_others);
    alpha[attribute] = alpha_i;
    for (std::size_t j = 0; j < lambda_grid.size(); ++j) {
        plan.rows.push_back(SweepRow{
            row_id(j), alpha, lambda_with_fill(n_attributes, attribute, lambda_grid[j])});
    }
    return plan;
}

SweepPlan plan_simplex(std::size_t n_attributes, std::array<std::size_t, 3> attributes,
                       std::size_t resolution, float alpha_common) {
    for (std::size_t idx : attributes) check_attribute(idx, n_attributes);
    if (attributes[0] == attributes[1] || attributes[0] == attributes[2] ||
        attributes[1] == attributes[2]) {
        throw ValidationError("simplex plan needs three distinct attribute indices");
    }
    if (resolution == 0) {
        throw ValidationError("simplex resolution must be >= 1");
    }

    // The coordinate at the highest of the three indices is derived from the
    // other two, so the left-to-right 32-bit fold of the full row is exactly 1.
    std::array<std::size_t, 3> sorted = attributes;
    std::sort(sorted.begin(), sorted.end());

    SweepPlan plan{PlanKind::simplex,
                   "simplex(n=" + std::to_string(n_attributes) + ",attrs=[" +
                       std::to_string(sorted[0]) + "," + std::to_string(sorted[1]) + "," +
                       std::to_string(sorted[2]) + "],m=" + std::to_string(resolution) +
                       ",alpha=" + fmt_g(alpha_common) + ")",
                   n_attributes,
                   {sorted.begin(), sorted.end()},
                   {}};

    const float m = static_cast<float>(resolution);
    std::size_t index = 0;
    for (std::size_t a = 0; a <= resolution; ++a) {
        for (std::size_t b = 0; b + a <= resolution; ++b) {
            std::vector<float> lambda(n_attributes, 0.0f);
            const float la = static_cast<float>(a) / m;
            const float lb = static_cast<float>(b) / m;
            lambda[sorted[0]] = la;
            lambda[sorted[1]] = lb;
            lambda[sorted[2]] = std::max(0.0f, 1.0f - (la + lb));
            finalize_lambda(lambda);

            std::vector<float> alpha(n_attributes, 0.0f);
            for (std::size_t idx : sorted) alpha[idx] = alpha_common;
            plan.rows.push_back(SweepRow{row_id(index++), std::move(alpha), std::move(lambda)});
        }
    }
    return plan;
}

SweepResult run_sweep(const SweepPlan& plan, const AnchorSet& set, const Scorer& scorer) {
    if (plan.n_attributes != set.size()) {
        throw ValidationError("plan expects " + std::to_string(plan.n_attributes) +
                              " attributes but the anchor set has " + std::to_string(set.size()));
    }
    SweepResult result{plan.id, plan.n_attributes, {}, {}};
    result.rows.reserve(plan.rows.size());

    std::size_t extrapolated = 0;
    for (const SweepRow& row : plan.rows) {
        const MixSpec spec{row.alpha, row.lambda};
        const CheckedMixSpec checked = validate_mixspec(spec, plan.n_attributes, false);
        if (!checked.warnings.empty()) ++extrapolated;

        const CompositeAdapter composite = compose_multi(set, checked.spec);
        SweepRowResult r{row.id, row.alpha, row.lambda, std::nullopt, "", 0.0};
        r.delta_norm = mean_layer_norm(to_dense(composite));
        if (scorer) {
            try {
                r.scores = scorer(row.id, composite);
                if (r.scores->size() != plan.n_attributes) {
                    r.scores.reset();
                    r.score_error = "scorer returned wrong arity";
                }
            } catch (const std::exception& e) {
                r.score_error = e.what();
            }
        }
        result.rows.push_back(std::move(r));
    }
    if (extrapolated > 0) {
        result.warnings.push_back(std::to_string(extrapolated) +
                                  " row(s) use alpha outside the advisory stable range [-1, 2]");
    }
    return result;
}

std::string plan_to_json(const SweepPlan& plan) {
    nlohmann::ordered_json j;
    j["kind"] = plan_kind_name(plan.kind);
    j["id"] = plan.id;
    j["n_attributes"] = plan.n_attributes;
    j["attributes"] = plan.attributes;
    auto rows = nlohmann::ordered_json::array();
    for (const SweepRow& row : plan.rows) {
        nlohmann::ordered_json r;
        r["row_id"] = row.id;
        r["alpha"] = row.alpha;
        r["lambda"] = row.lambda;
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    return j.dump(2) + "\n";
}

}  // namespace lorahull
