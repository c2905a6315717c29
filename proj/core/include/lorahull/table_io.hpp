// Copyright (c) 2026 The lorahull authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "lorahull/diagnostics.hpp"
#include "lorahull/sweep.hpp"

namespace lorahull {

enum class TableFormat { csv, json };

TableFormat table_format_from_string(const std::string& name);

/// Reals in CSV output carry 9 significant digits so emitted tables diff
/// cleanly across platforms.
std::string format_real(double value);

/// CSV columns: row_id, alpha_1..alpha_n, lambda_1..lambda_n,
/// score_1..score_n (empty cells when unscored), delta_norm.
void export_sweep(const SweepResult& result, const std::filesystem::path& path,
                  TableFormat format);

void export_similarity(const SimilarityMatrix& matrix, const std::filesystem::path& path,
                       TableFormat format);

void export_mds(const MdsEmbedding& embedding, const std::filesystem::path& path,
                TableFormat format);

/// Reads externally computed per-row scores for joining onto sweep rows.
/// CSV needs columns row_id, score_1..score_n; JSON accepts the shape
/// emitted by export_sweep or a flat {"row_id": [scores...]} object.
std::map<std::string, std::vector<float>> load_scores(const std::filesystem::path& path,
                                                      std::size_t n_attributes);

}  // namespace lorahull
