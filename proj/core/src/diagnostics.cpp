// Copyright (c) 2026 The lorahull authors
// SPDX-License-Identifier: Apache-2.0

#include "lorahull/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "lorahull/compose.hpp"
#include "lorahull/errors.hpp"

namespace lorahull {

namespace {

std::string fmt_alpha(double a) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", a);
    return buf;
}

void require_shared_schema(std::span<const Adapter> adapters) {
    if (adapters.empty()) {
        throw ValidationError("pairwise diagnostics need at least one adapter");
    }
    const LayerSchema schema = schema_of(adapters.front());
    for (const Adapter& adapter : adapters) {
        const LayerSchema other = schema_of(adapter);
        if (other != schema) {
            throw ValidationError("adapter '" + adapter.id() +
                                  "' does not share the layer schema of '" +
                                  adapters.front().id() + "'");
        }
    }
}

// Flattened per-layer vectors: dense delta by default, raw concatenated
// (B, A) factors in factor mode.
std::vector<std::vector<std::vector<float>>> flatten_all(std::span<const Adapter> adapters,
                                                         bool factor_mode) {
    std::vector<std::vector<std::vector<float>>> flat(adapters.size());
    for (std::size_t p = 0; p < adapters.size(); ++p) {
        for (const auto& [name, layer] : adapters[p].layers()) {
            if (factor_mode) {
                std::vector<float> v;
                v.reserve(layer.b.size() + layer.a.size());
                v.insert(v.end(), layer.b.data().begin(), layer.b.data().end());
                v.insert(v.end(), layer.a.data().begin(), layer.a.data().end());
                flat[p].push_back(std::move(v));
            } else {
                const Matrix delta = layer_delta(layer);
                flat[p].emplace_back(delta.data().begin(), delta.data().end());
            }
        }
    }
    return flat;
}

double vec_dot(const std::vector<float>& a, const std::vector<float>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    return acc;
}

}  // namespace

SimilarityMatrix pairwise_cosine(std::span<const Adapter> adapters, bool factor_mode) {
    require_shared_schema(adapters);
    const std::size_t n = adapters.size();
    const std::size_t n_layers = adapters.front().layer_count();
    if (n_layers == 0) {
        throw ValidationError("pairwise_cosine: adapters have no layers");
    }

    const auto flat = flatten_all(adapters, factor_mode);
    std::vector<std::vector<double>> norms(n, std::vector<double>(n_layers));
    SimilarityMatrix out{{}, Matrix(n, n), {}};
    std::vector<std::string> layer_names;
    for (const auto& [name, layer] : adapters.front().layers()) {
        (void)layer;
        layer_names.push_back(name);
    }

    for (std::size_t p = 0; p < n; ++p) {
        out.labels.push_back(adapters[p].id());
        for (std::size_t l = 0; l < n_layers; ++l) {
            norms[p][l] = std::sqrt(vec_dot(flat[p][l], flat[p][l]));
            if (norms[p][l] < 1e-12) {
                out.warnings.push_back("adapter '" + adapters[p].id() + "' layer '" +
                                       layer_names[l] + "' has near-zero delta; skipped in cosine");
            }
        }
    }

    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = p; q < n; ++q) {
            double acc = 0.0;
            std::size_t used = 0;
            for (std::size_t l = 0; l < n_layers; ++l) {
                if (norms[p][l] < 1e-12 || norms[q][l] < 1e-12) continue;
                acc += vec_dot(flat[p][l], flat[q][l]) / (norms[p][l] * norms[q][l]);
                ++used;
            }
            if (used == 0) {
                throw ValidationError("pairwise_cosine: every layer is degenerate for pair '" +
                                      adapters[p].id() + "' / '" + adapters[q].id() + "'");
            }
            const float value = static_cast<float>(acc / static_cast<double>(used));
            out.values.at(p, q) = value;
            out.values.at(q, p) = value;
        }
    }
    return out;
}

SimilarityMatrix pairwise_sq_l2(std::span<const Adapter> adapters) {
    require_shared_schema(adapters);
    const std::size_t n = adapters.size();
    const std::size_t n_layers = adapters.front().layer_count();
    if (n_layers == 0) {
        throw ValidationError("pairwise_sq_l2: adapters have no layers");
    }

    const auto flat = flatten_all(adapters, /*factor_mode=*/false);
    SimilarityMatrix out{{}, Matrix(n, n), {}};
    for (const Adapter& adapter : adapters) out.labels.push_back(adapter.id());

    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = p; q < n; ++q) {
            double acc = 0.0;
            for (std::size_t l = 0; l < n_layers; ++l) {
                double layer_acc = 0.0;
                const auto& va = flat[p][l];
                const auto& vb = flat[q][l];
                for (std::size_t i = 0; i < va.size(); ++i) {
                    const double d = static_cast<double>(va[i]) - static_cast<double>(vb[i]);
                    layer_acc += d * d;
                }
                acc += layer_acc;
            }
            const float value = static_cast<float>(acc / static_cast<double>(n_layers));
            out.values.at(p, q) = value;
            out.values.at(q, p) = value;
        }
    }
    return out;
}

SimilarityMatrix snapshot_distances(std::span<const DeltaSnapshot> snapshots) {
    if (snapshots.empty()) {
        throw ValidationError("snapshot_distances needs at least one snapshot");
    }
    const std::size_t n = snapshots.size();
    const std::size_t n_layers = snapshots.front().delta.size();
    if (n_layers == 0) {
        throw ValidationError("snapshot_distances: snapshots carry no layers");
    }
    SimilarityMatrix out{{}, Matrix(n, n), {}};
    for (const auto& s : snapshots) out.labels.push_back(s.label);

    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
            double acc = 0.0;
            auto itp = snapshots[p].delta.begin();
            auto itq = snapshots[q].delta.begin();
            for (; itp != snapshots[p].delta.end(); ++itp, ++itq) {
                if (itq == snapshots[q].delta.end() || itp->first != itq->first ||
                    itp->second.rows() != itq->second.rows() ||
                    itp->second.cols() != itq->second.cols()) {
                    throw ValidationError("snapshot '" + snapshots[q].label +
                                          "' does not share the layer schema of '" +
                                          snapshots[p].label + "'");
                }
                const auto da = itp->second.data();
                const auto db = itq->second.data();
                for (std::size_t i = 0; i < da.size(); ++i) {
                    const double d = static_cast<double>(da[i]) - static_cast<double>(db[i]);
                    acc += d * d;
                }
            }
            const float value = static_cast<float>(std::sqrt(acc / static_cast<double>(n_layers)));
            out.values.at(p, q) = value;
            out.values.at(q, p) = value;
        }
    }
    return out;
}

MdsEmbedding mds_embed(const SimilarityMatrix& distances, std::size_t dim) {
    const std::size_t n = distances.values.rows();
    if (distances.values.cols() != n || distances.labels.size() != n) {
        throw ValidationError("mds_embed: malformed distance matrix");
    }
    if (dim == 0 || dim > n) {
        throw ValidationError("mds_embed: dim=" + std::to_string(dim) +
                              " out of range for " + std::to_string(n) + " points");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(distances.values.at(i, i)) > 1e-9) {
            throw ValidationError("mds_embed: nonzero diagonal at '" + distances.labels[i] + "'");
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (distances.values.at(i, j) < 0.0f) {
                throw ValidationError("mds_embed: negative distance between '" +
                                      distances.labels[i] + "' and '" + distances.labels[j] + "'");
            }
            if (std::abs(static_cast<double>(distances.values.at(i, j)) -
                         distances.values.at(j, i)) > 1e-6) {
                throw ValidationError("mds_embed: asymmetric distances between '" +
                                      distances.labels[i] + "' and '" + distances.labels[j] + "'");
            }
        }
    }

    // Torgerson double-centering: B = -1/2 J D^2 J with J = I - 11^T / n.
    std::vector<double> sq(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double d = distances.values.at(i, j);
            sq[i * n + j] = d * d;
        }
    }
    std::vector<double> row_mean(n, 0.0);
    double total_mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) row_mean[i] += sq[i * n + j];
        row_mean[i] /= static_cast<double>(n);
        total_mean += row_mean[i];
    }
    total_mean /= static_cast<double>(n);

    Matrix gram(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            gram.at(i, j) = static_cast<float>(
                -0.5 * (sq[i * n + j] - row_mean[i] - row_mean[j] + total_mean));
        }
    }

    const SymEigResult full = sym_eig_top(gram, n);
    MdsEmbedding out{distances.labels, Matrix(n, dim), {}, {}, {}};
    double clipped_mass = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (full.values[j] < 0.0f) {
            out.clipped_magnitudes.push_back(-full.values[j]);
            clipped_mass += -static_cast<double>(full.values[j]);
        }
    }
    for (std::size_t j = 0; j < dim; ++j) {
        const float lam = std::max(full.values[j], 0.0f);
        out.axis_eigenvalues.push_back(lam);
        const float scale = std::sqrt(lam);
        for (std::size_t i = 0; i < n; ++i) {
            out.coordinates.at(i, j) = full.vectors.at(i, j) * scale;
        }
    }
    // Magnitudes are always recorded above; warn only when the negative mass
    // is material relative to the leading eigenvalue rather than rounding
    // noise from the 32-bit Gram matrix.
    const double leading = full.values.empty() ? 0.0 : std::abs(full.values.front());
    if (clipped_mass > std::max(1e-4 * leading, 1e-9)) {
        out.warnings.push_back(
            "distance matrix is not Euclidean: clipped negative eigenvalue mass " +
            std::to_string(clipped_mass) +
            "; reconstructed distances will systematically deviate");
    }
    return out;
}

std::vector<DeltaSnapshot> interpolation_trajectory(const AnchorPair& pair, double step) {
    if (!(step > 0.0) || step > 1.0) {
        throw ValidationError("interpolation_trajectory: step must lie in (0, 1], got " +
                              std::to_string(step));
    }
    std::vector<double> alphas;
    const long long divisions = std::llround(1.0 / step);
    if (divisions >= 1 && std::abs(static_cast<double>(divisions) * step - 1.0) <= 1e-9) {
        for (long long k = 0; k <= divisions; ++k) {
            alphas.push_back(static_cast<double>(k) / static_cast<double>(divisions));
        }
    } else {
        for (double a = 0.0; a < 1.0 - 1e-9; a += step) alphas.push_back(a);
        alphas.push_back(1.0);
    }

    std::vector<DeltaSnapshot> out;
    out.reserve(alphas.size());
    for (double a : alphas) {
        const CompositeAdapter composite = compose_single(pair, static_cast<float>(a));
        out.push_back(DeltaSnapshot{pair.attribute + "@" + fmt_alpha(a), to_dense(composite)});
    }
    return out;
}

std::vector<DeltaSnapshot> mds_point_cloud(const AnchorSet& set, double trajectory_step) {
    if (set.pairs.empty()) {
        throw ValidationError("mds_point_cloud: empty anchor set");
    }
    std::vector<DeltaSnapshot> points;

    // The base model's update is identically zero.
    DeltaSnapshot base{"base", {}};
    for (const auto& [name, shape] : set.schema()) {
        base.delta.emplace(name, Matrix(shape.d1, shape.d2));
    }
    points.push_back(std::move(base));

    for (const AnchorPair& pair : set.pairs) {
        points.push_back(DeltaSnapshot{pair.attribute + ".minus", pair.minus.dense_deltas()});
        points.push_back(DeltaSnapshot{pair.attribute + ".plus", pair.plus.dense_deltas()});
    }
    if (trajectory_step > 0.0) {
        for (const AnchorPair& pair : set.pairs) {
            auto traj = interpolation_trajectory(pair, trajectory_step);
            // Endpoints duplicate the anchors; keep interior points only.
            for (std::size_t t = 1; t + 1 < traj.size(); ++t) {
                points.push_back(std::move(traj[t]));
            }
        }
    }
    return points;
}

std::vector<std::pair<float, double>> norm_profile(const AnchorPair& pair,
                                                   std::span<const float> alphas) {
    std::vector<std::pair<float, double>> out;
    out.reserve(alphas.size());
    for (float a : alphas) {
        const CompositeAdapter composite = compose_single(pair, a);
        out.emplace_back(a, mean_layer_norm(to_dense(composite)));
    }
    return out;
}

double mean_layer_norm(const std::map<std::string, Matrix>& deltas) {
    if (deltas.empty()) return 0.0;
    double acc = 0.0;
    for (const auto& [name, delta] : deltas) {
        (void)name;
        acc += frobenius_norm(delta);
    }
    return acc / static_cast<double>(deltas.size());
}

}  // namespace lorahull
