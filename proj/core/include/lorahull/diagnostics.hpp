// Copyright (c) 2026 The lorahull authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lorahull/adapter.hpp"
#include "lorahull/matrix.hpp"

namespace lorahull {

/// Square table of pairwise statistics over labeled adapters or snapshots.
struct SimilarityMatrix {
    std::vector<std::string> labels;
    Matrix values;
    std::vector<std::string> warnings; // e.g. degenerate layers skipped in cosine
};

/// Mean over layers of the cosine between dense per-layer deltas. Layers where
/// either delta norm falls below 1e-12 are skipped for that pair and reported.
/// With `factor_mode` the cosine is taken over the concatenated flattened raw
/// (B, A) factors instead of the dense delta.
SimilarityMatrix pairwise_cosine(std::span<const Adapter> adapters, bool factor_mode = false);

/// Mean over layers of the squared Frobenius distance between dense deltas.
SimilarityMatrix pairwise_sq_l2(std::span<const Adapter> adapters);

/// Labeled dense snapshots (per-layer deltas) for distance computations.
struct DeltaSnapshot {
    std::string label;
    std::map<std::string, Matrix> delta;
};

/// Distance matrix over snapshots: sqrt of the mean over layers of the squared
/// Frobenius distance. This is the distance definition shared by the MDS
/// embedding and the squared-L2 diagnostic.
SimilarityMatrix snapshot_distances(std::span<const DeltaSnapshot> snapshots);

struct MdsEmbedding {
    std::vector<std::string> labels;
    Matrix coordinates;               // n x dim
    std::vector<float> axis_eigenvalues;   // the dim eigenvalues used (clipped at 0)
    std::vector<float> clipped_magnitudes; // |negative eigenvalues| over the full spectrum
    std::vector<std::string> warnings;
};

/// Classical (Torgerson) multidimensional scaling of a distance matrix:
/// square, double-center, take the top-`dim` eigenpairs and scale the
/// eigenvectors by the root eigenvalues. Negative eigenvalues are clipped to
/// zero and reported, never silently dropped.
MdsEmbedding mds_embed(const SimilarityMatrix& distances, std::size_t dim);

/// Dense snapshots of compose_single at alpha = 0, step, 2*step, ..., 1.
/// A non-divisor step still ends exactly at 1.
std::vector<DeltaSnapshot> interpolation_trajectory(const AnchorPair& pair, double step);

/// Builds the point cloud for an MDS plot over an anchor set: the zero "base"
/// point, every anchor delta and, when step > 0, interpolation trajectories
/// for every attribute.
std::vector<DeltaSnapshot> mds_point_cloud(const AnchorSet& set, double trajectory_step);

/// (alpha, mean over layers of the Frobenius norm of the dense delta) per
/// requested alpha, in input order.
std::vector<std::pair<float, double>> norm_profile(const AnchorPair& pair,
                                                   std::span<const float> alphas);

/// Mean over layers of per-layer Frobenius norms; the delta_norm diagnostic
/// attached to sweep rows.
double mean_layer_norm(const std::map<std::string, Matrix>& deltas);

}  // namespace lorahull
