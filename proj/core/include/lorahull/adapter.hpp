// Copyright (c) 2026 The lorahull authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "lorahull/matrix.hpp"

namespace lorahull {

/// One low-rank layer update: delta = scaling * B * A with B (d1 x k) and
/// A (k x d2).
struct AdapterLayer {
    std::string name;
    Matrix b;
    Matrix a;
    float scaling = 1.0f;

    std::size_t d1() const { return b.rows(); }
    std::size_t d2() const { return a.cols(); }
    std::size_t rank() const { return b.cols(); }
};

/// Materializes scaling * B * A (64-bit accumulation, 32-bit result).
Matrix layer_delta(const AdapterLayer& layer);

/// A named collection of adapter layers plus free-form provenance strings.
class Adapter {
public:
    Adapter() = default;
    explicit Adapter(std::string id) : id_(std::move(id)) {}

    const std::string& id() const { return id_; }
    void set_id(std::string id) { id_ = std::move(id); }

    /// Validates the layer (inner dimensions, unique name, positive finite
    /// scaling) before inserting.
    void add_layer(AdapterLayer layer);

    bool has_layer(const std::string& name) const { return layers_.count(name) != 0; }
    const AdapterLayer& layer(const std::string& name) const;
    const std::map<std::string, AdapterLayer>& layers() const { return layers_; }
    std::size_t layer_count() const { return layers_.size(); }

    std::map<std::string, std::string>& meta() { return meta_; }
    const std::map<std::string, std::string>& meta() const { return meta_; }

    /// Dense deltas for every layer, keyed by layer name.
    std::map<std::string, Matrix> dense_deltas() const;

private:
    std::string id_;
    std::map<std::string, AdapterLayer> layers_;
    std::map<std::string, std::string> meta_;
};

struct LayerShape {
    std::size_t d1 = 0;
    std::size_t d2 = 0;
    bool operator==(const LayerShape&) const = default;
};

/// Layer-name -> (d1, d2); ranks are deliberately not part of the schema.
using LayerSchema = std::map<std::string, LayerShape>;

LayerSchema schema_of(const Adapter& adapter);

/// The two endpoint adapters of one attribute: `minus` sits at the score-0
/// extreme, `plus` at the score-1 extreme.
struct AnchorPair {
    std::string attribute;
    Adapter minus;
    Adapter plus;
};

/// An ordered set of anchor pairs over a shared layer schema.
struct AnchorSet {
    std::vector<AnchorPair> pairs;

    std::size_t size() const { return pairs.size(); }
    LayerSchema schema() const;
    std::vector<std::string> attribute_names() const;
};

/// Per-attribute interpolation weights (alpha) and simplex mixing weights
/// (lambda). Values in the advisory stable range alpha in [-1, 2] pass
/// silently; values outside it are flagged, never rejected.
struct MixSpec {
    std::vector<float> alpha;
    std::vector<float> lambda;
};

struct ValidationIssue {
    std::string attribute;
    std::string layer;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;

    bool ok() const { return issues.empty(); }
    std::string to_string() const;
};

ValidationReport validate_anchor_pair(const AnchorPair& pair);
ValidationReport validate_anchor_set(const AnchorSet& set);

struct CheckedMixSpec {
    MixSpec spec;
    std::vector<std::string> warnings; // advisory only (e.g. extrapolated alpha)
};

/// Checks lengths and the simplex constraint. With `normalize`, a lambda
/// vector with positive sum is rescaled onto the simplex; without it, sums
/// off 1 by more than 1e-6 are rejected. Idempotent on valid input.
CheckedMixSpec validate_mixspec(const MixSpec& spec, std::size_t n_attributes, bool normalize);

}  // namespace lorahull
