// Copyright (c) 2026 The lorahull authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <vector>

#include "lorahull/adapter.hpp"
#include "lorahull/matrix.hpp"

namespace lorahull {

/// One scaled low-rank term of a composite layer. Coefficients are kept in
/// 64-bit so endpoint and one-hot reductions stay exact.
struct CompositeTerm {
    double coefficient = 0.0;
    Matrix b;
    Matrix a;
    std::string source; // adapter id the factors came from
};

struct CompositeLayer {
    std::string name;
    std::size_t d1 = 0;
    std::size_t d2 = 0;
    std::vector<CompositeTerm> terms; // summation order is term order
};

struct Provenance {
    std::vector<std::string> anchor_ids;
    MixSpec mix;
};

/// A merged update held as a sum of scaled low-rank products. Zero-coefficient
/// terms are retained here for provenance and only dropped on export.
struct CompositeAdapter {
    std::vector<CompositeLayer> layers; // sorted by layer name
    Provenance provenance;
};

/// theta(alpha) for one attribute: per layer the plus term weighted by
/// alpha * scaling_plus and the minus term by (1 - alpha) * scaling_minus.
/// alpha = 0 and alpha = 1 densify to the anchors exactly. Extrapolated
/// alpha is permitted.
CompositeAdapter compose_single(const AnchorPair& pair, float alpha);

/// The simplex-weighted sum over attributes: per layer the concatenation of
/// (lambda_i * alpha_i * s_plus, B_plus, A_plus) and
/// (lambda_i * (1 - alpha_i) * s_minus, B_minus, A_minus) in attribute order.
/// A one-hot lambda reduces exactly to compose_single.
CompositeAdapter compose_multi(const AnchorSet& set, const MixSpec& spec);

/// Dense per-layer deltas; terms are summed in stored order with 64-bit
/// accumulation so results are bit-reproducible.
std::map<std::string, Matrix> to_dense(const CompositeAdapter& composite);

/// Exact export as a single adapter: coefficients are absorbed into the
/// horizontally concatenated B factors, A factors are stacked vertically and
/// the resulting scaling is 1. Terms with coefficient exactly 0 are dropped.
Adapter to_lowrank_concat(const CompositeAdapter& composite, const std::string& id = "merged");

/// Rank truncation via per-layer SVD of the dense delta: B' = U_r diag(S_r),
/// A' = V_r^T. The per-layer Frobenius error equals the root of the tail
/// singular-value energy.
Adapter recompress(const Adapter& adapter, std::size_t target_rank);

}  // namespace lorahull
