// Copyright (c) 2026 The lorahull authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lorahull/adapter.hpp"
#include "lorahull/compose.hpp"
#include "lorahull/matrix.hpp"

namespace lorahull {

/// Default sigmoid gain: log(19), which places one-hot endpoint scores at
/// exactly 0.05 and 0.95. Larger gains saturate the endpoints into plateaus.
double default_oracle_gain();

/// Recipe for a synthetic anchor set with controlled geometry.
struct SyntheticSpec {
    std::size_t n_attributes = 5;
    std::vector<std::pair<std::string, LayerShape>> layers; // empty -> 4 x (64, 64)
    std::size_t rank = 4;
    double gain = 0.0;                        // <= 0 -> default_oracle_gain()
    std::optional<Matrix> correlation;        // n x n target cosines; empty -> identity
    std::uint64_t seed = 42;
    std::vector<std::string> attribute_names; // empty -> attr0, attr1, ...

    std::vector<std::pair<std::string, LayerShape>> effective_layers() const;
    std::vector<std::string> effective_names() const;
    double effective_gain() const;
    Matrix effective_correlation() const;
};

/// Analytic attribute scorer: score_i = sigmoid(gain * <w_i, vec(delta)> + b_i)
/// over the concatenated flattened delta space. Directions are stored as
/// per-layer matrices in the anchor schema.
struct AttributeOracle {
    double gain = 0.0;
    std::vector<std::string> attributes;
    std::vector<double> offsets;
    std::vector<std::map<std::string, Matrix>> directions; // one map per attribute
};

/// Deterministically generates anchors whose difference directions
/// vec(delta_plus - delta_minus) realize the requested pairwise correlation
/// structure exactly, together with the calibrated oracle: one-hot
/// composition scores 0.05 at alpha=0 and 0.95 at alpha=1 under the default
/// gain. With an identity correlation, cross-attribute effects vanish
/// identically.
std::pair<AnchorSet, AttributeOracle> gen_anchor_set(const SyntheticSpec& spec);

/// Scores a composed update; strictly monotone in alpha_i for one-hot lambda.
std::vector<float> oracle_score(const AttributeOracle& oracle, const CompositeAdapter& composite);

/// Same scorer over precomputed dense deltas.
std::vector<float> oracle_score_dense(const AttributeOracle& oracle,
                                      const std::map<std::string, Matrix>& deltas);

/// Parses a synthetic spec JSON file. Every field is optional:
///   {"n_attributes", "attribute_names", "layers": [{"name", "d1", "d2"}],
///    "rank", "gain", "correlation", "seed"}
SyntheticSpec read_synthetic_spec(const std::filesystem::path& path);

/// Writes the generated anchors as regular adapter checkpoints plus a
/// manifest.json binding them, the oracle description (oracle.json) and the
/// oracle direction tensors (oracle_directions.safetensors). Byte output is
/// deterministic given the spec.
std::vector<std::filesystem::path> write_synthetic_bundle(const AnchorSet& set,
                                                          const AttributeOracle& oracle,
                                                          const std::filesystem::path& dir);

}  // namespace lorahull
