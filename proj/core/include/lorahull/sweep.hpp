// Copyright (c) 2026 The lorahull authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lorahull/adapter.hpp"
#include "lorahull/compose.hpp"

namespace lorahull {

enum class PlanKind { alpha_line, spider, lambda_line, simplex };

const char* plan_kind_name(PlanKind kind);

struct SweepRow {
    std::string id;
    std::vector<float> alpha;
    std::vector<float> lambda;
};

/// A deterministic grid of (alpha, lambda) configurations. Identical plan
/// parameters always produce identical row ids and grids. Every lambda row
/// folds to exactly 1.0f in 32-bit arithmetic: the trailing coordinate is
/// derived as 1 minus the running sum of the others.
struct SweepPlan {
    PlanKind kind;
    std::string id;
    std::size_t n_attributes = 0;
    std::vector<std::size_t> attributes; // indices this plan varies
    std::vector<SweepRow> rows;
};

/// Uniform alpha grid over [alpha_min, alpha_max] inclusive with a one-hot
/// lambda on the chosen attribute.
SweepPlan plan_alpha_line(std::size_t n_attributes, std::size_t attribute, float alpha_min,
                          float alpha_max, std::size_t steps);

/// One row per alpha in `alpha_grid` for the varied attribute; every other
/// attribute keeps alpha = fixed_alpha_others (0 or 1) and receives the
/// uniform lambda fill (1 - lambda_i) / (n - 1).
SweepPlan plan_spider(std::size_t n_attributes, std::size_t varied,
                      std::span<const float> alpha_grid, float lambda_i,
                      float fixed_alpha_others);

/// Varies lambda_i over `lambda_grid` (values in [0, 1]) at fixed
/// alpha_i in {0, 1}; companion attributes follow the spider fill rule.
SweepPlan plan_lambda_line(std::size_t n_attributes, std::size_t attribute, float alpha_i,
                           std::span<const float> lambda_grid, float fixed_alpha_others);

/// Barycentric grid over three attributes: all (a/m, b/m, c/m) with
/// a + b + c = m, exactly (m+1)(m+2)/2 rows. All three alphas equal
/// alpha_common; attributes outside the triple get lambda = 0.
SweepPlan plan_simplex(std::size_t n_attributes, std::array<std::size_t, 3> attributes,
                       std::size_t resolution, float alpha_common);

/// Per-attribute scores for one composed row; may throw, which is recorded
/// on the row without aborting the sweep.
using Scorer = std::function<std::vector<float>(const std::string& row_id,
                                                const CompositeAdapter& composite)>;

struct SweepRowResult {
    std::string id;
    std::vector<float> alpha;
    std::vector<float> lambda;
    std::optional<std::vector<float>> scores;
    std::string score_error;
    double delta_norm = 0.0;
};

struct SweepResult {
    std::string plan_id;
    std::size_t n_attributes = 0;
    std::vector<SweepRowResult> rows;
    std::vector<std::string> warnings;
};

/// Composes every row of the plan against the anchor set, records the mean
/// per-layer delta norm and, when a scorer is given, per-attribute scores.
/// Row order equals plan order; output is deterministic.
SweepResult run_sweep(const SweepPlan& plan, const AnchorSet& set, const Scorer& scorer = {});

/// Canonical JSON of a plan; byte-identical for identical parameters.
std::string plan_to_json(const SweepPlan& plan);

}  // namespace lorahull
