// Copyright (c) 2026 The lorahull authors
// SPDX-License-Identifier: Apache-2.0

#include "lorahull/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <span>

#include "lorahull/errors.hpp"

namespace lorahull {

double default_oracle_gain() { return std::log(19.0); }

std::vector<std::pair<std::string, LayerShape>> SyntheticSpec::effective_layers() const {
    if (!layers.empty()) return layers;
    std::vector<std::pair<std::string, LayerShape>> out;
    for (std::size_t i = 0; i < 4; ++i) {
        out.emplace_back("layers." + std::to_string(i) + ".proj", LayerShape{64, 64});
    }
    return out;
}

std::vector<std::string> SyntheticSpec::effective_names() const {
    if (!attribute_names.empty()) return attribute_names;
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n_attributes; ++i) out.push_back("attr" + std::to_string(i));
    return out;
}

double SyntheticSpec::effective_gain() const { return gain > 0.0 ? gain : default_oracle_gain(); }

Matrix SyntheticSpec::effective_correlation() const {
    return correlation ? *correlation : Matrix::identity(n_attributes);
}

namespace {

// Deterministic Gaussian source: mt19937_64 + explicit Box-Muller, so the
// stream does not depend on the standard library's distribution internals.
class GaussianSource {
public:
    explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

    double uniform() {
        // 53-bit mantissa in (0, 1].
        return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    }

    double gaussian() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    std::vector<std::size_t> permutation(std::size_t n) {
        std::vector<std::size_t> p(n);
        std::iota(p.begin(), p.end(), 0);
        for (std::size_t i = n; i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(engine_() % i);
            std::swap(p[i - 1], p[j]);
        }
        return p;
    }

private:
    std::mt19937_64 engine_;
};

// Symmetric PSD square root via the Jacobi eigensolver; tiny negative
// eigenvalues are clipped, genuine ones rejected.
Matrix psd_sqrt(const Matrix& c) {
    const std::size_t n = c.rows();
    const SymEigResult eig = sym_eig_top(c, n);
    Matrix root(n, n);
    for (float v : eig.values) {
        if (v < -1e-6f) {
            throw ValidationError("correlation matrix is not positive semidefinite (eigenvalue " +
                                  std::to_string(v) + ")");
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                const double lam = std::max(0.0f, eig.values[k]);
                acc += static_cast<double>(eig.vectors.at(i, k)) * std::sqrt(lam) *
                       static_cast<double>(eig.vectors.at(j, k));
            }
            root.at(i, j) = static_cast<float>(acc);
        }
    }
    return root;
}

void validate_correlation(const Matrix& c, std::size_t n) {
    if (c.rows() != n || c.cols() != n) {
        throw ValidationError("correlation matrix must be " + std::to_string(n) + "x" +
                              std::to_string(n) + ", got " + c.shape_str());
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(c.at(i, i) - 1.0f) > 1e-6f) {
            throw ValidationError("correlation diagonal entry " + std::to_string(i) +
                                  " must be 1");
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (std::abs(c.at(i, j) - c.at(j, i)) > 1e-6f) {
                throw ValidationError("correlation matrix must be symmetric");
            }
            if (c.at(i, j) < -1.0f - 1e-6f || c.at(i, j) > 1.0f + 1e-6f) {
                throw ValidationError("correlation entries must lie in [-1, 1]");
            }
        }
    }
}

// One banded coefficient block per attribute and layer. Blocks of different
// attributes occupy disjoint column bands, which keeps cross-attribute inner
// products exactly zero before mixing.
struct Blocks {
    // blocks[attr][layer]: rows x band, in f64 until the final rounding
    std::vector<std::vector<std::vector<double>>> values;
};

Blocks sample_blocks(GaussianSource& rng, std::size_t n_attr, std::span<const std::size_t> bands,
                     std::size_t rows) {
    Blocks blocks;
    blocks.values.assign(n_attr, {});
    for (std::size_t i = 0; i < n_attr; ++i) {
        blocks.values[i].assign(bands.size(), {});
        for (std::size_t l = 0; l < bands.size(); ++l) {
            auto& block = blocks.values[i][l];
            block.resize(rows * bands[l]);
            for (double& v : block) v = rng.gaussian();
        }
    }
    return blocks;
}

void normalize_per_attribute(Blocks& blocks) {
    for (auto& per_layer : blocks.values) {
        double norm2 = 0.0;
        for (const auto& block : per_layer) {
            for (double v : block) norm2 += v * v;
        }
        const double inv = 1.0 / std::sqrt(norm2);
        for (auto& block : per_layer) {
            for (double& v : block) v *= inv;
        }
    }
}

}  // namespace

std::pair<AnchorSet, AttributeOracle> gen_anchor_set(const SyntheticSpec& spec) {
    const std::size_t n = spec.n_attributes;
    if (n == 0) {
        throw ValidationError("synthetic spec needs at least one attribute");
    }
    const auto layers = spec.effective_layers();
    if (layers.empty()) {
        throw ValidationError("synthetic spec needs at least one layer");
    }
    const auto names = spec.effective_names();
    if (names.size() != n) {
        throw ValidationError("synthetic spec has " + std::to_string(names.size()) +
                              " attribute names for " + std::to_string(n) + " attributes");
    }
    const Matrix correlation = spec.effective_correlation();
    validate_correlation(correlation, n);
    const double gain = spec.effective_gain();

    const std::size_t k = spec.rank;
    const std::size_t kw = (k + 1) / 2; // rows carrying the attribute direction
    const std::size_t kc = k - kw;      // rows carrying the shared carrier
    if (k == 0) {
        throw ValidationError("synthetic rank must be >= 1");
    }
    for (const auto& [name, shape] : layers) {
        if (k > std::min(shape.d1, shape.d2)) {
            throw ValidationError("rank " + std::to_string(k) + " infeasible for layer '" + name +
                                  "' of shape " + std::to_string(shape.d1) + "x" +
                                  std::to_string(shape.d2));
        }
        if (n * kw > shape.d2) {
            throw ValidationError("rank infeasible: layer '" + name + "' needs " +
                                  std::to_string(n * kw) + " columns for " + std::to_string(n) +
                                  " disjoint attribute bands but has " +
                                  std::to_string(shape.d2));
        }
    }

    const Matrix mix_root = psd_sqrt(correlation);
    GaussianSource rng(spec.seed);

    // Per-layer row homes: the first kw permuted rows carry the attribute
    // directions (shared across attributes so mixing preserves rank), the
    // next kc rows carry the per-attribute carrier components.
    std::vector<std::vector<std::size_t>> row_homes;
    row_homes.reserve(layers.size());
    for (const auto& [name, shape] : layers) {
        (void)name;
        row_homes.push_back(rng.permutation(shape.d1));
    }

    std::vector<std::size_t> bands(layers.size());
    for (std::size_t l = 0; l < layers.size(); ++l) {
        bands[l] = layers[l].second.d2 / n;
    }

    // Direction blocks, then carrier blocks; both unit norm per attribute.
    Blocks raw_w = sample_blocks(rng, n, bands, kw);
    normalize_per_attribute(raw_w);

    Blocks carrier;
    if (kc > 0) {
        carrier = sample_blocks(rng, n, bands, kc);
        normalize_per_attribute(carrier);
        // Carrier mass above the direction mass keeps the two anchors of one
        // attribute positively correlated while leaving scores untouched
        // (the carrier is orthogonal to every direction).
        for (auto& per_layer : carrier.values) {
            for (auto& block : per_layer) {
                for (double& v : block) v *= 1.4142135623730951;
            }
        }
    }

    // Mix the raw direction blocks by the correlation square root:
    // w_i = sum_p root(p, i) * raw_p, giving <w_i, w_j> = C_ij.
    Blocks mixed;
    mixed.values.assign(n, {});
    for (std::size_t i = 0; i < n; ++i) {
        mixed.values[i].assign(layers.size(), {});
        for (std::size_t l = 0; l < layers.size(); ++l) {
            // full band union: n * band columns, kw rows
            mixed.values[i][l].assign(kw * bands[l] * n, 0.0);
            for (std::size_t p = 0; p < n; ++p) {
                const double coef = static_cast<double>(mix_root.at(p, i));
                if (coef == 0.0) continue;
                const auto& src = raw_w.values[p][l];
                for (std::size_t r = 0; r < kw; ++r) {
                    for (std::size_t c = 0; c < bands[l]; ++c) {
                        mixed.values[i][l][r * (bands[l] * n) + p * bands[l] + c] +=
                            coef * src[r * bands[l] + c];
                    }
                }
            }
        }
    }

    AnchorSet set;
    AttributeOracle oracle{gain, names, std::vector<double>(n, 0.0), {}};
    oracle.directions.resize(n);

    for (std::size_t i = 0; i < n; ++i) {
        Adapter minus(names[i] + "_minus");
        Adapter plus(names[i] + "_plus");
        minus.meta() = {{"attribute", names[i]}, {"extreme", "minus"},
                        {"seed", std::to_string(spec.seed)}, {"synthetic", "true"}};
        plus.meta() = {{"attribute", names[i]}, {"extreme", "plus"},
                       {"seed", std::to_string(spec.seed)}, {"synthetic", "true"}};

        for (std::size_t l = 0; l < layers.size(); ++l) {
            const auto& [layer_name, shape] = layers[l];
            const std::size_t band_cols = bands[l] * n;

            // B selects the permuted home rows: carrier rows first, then
            // direction rows, matching the stacked A factor below.
            Matrix b(shape.d1, k);
            for (std::size_t j = 0; j < kc; ++j) b.at(row_homes[l][kw + j], j) = 1.0f;
            for (std::size_t j = 0; j < kw; ++j) b.at(row_homes[l][j], kc + j) = 1.0f;

            Matrix a_plus(k, shape.d2);
            Matrix a_minus(k, shape.d2);
            if (kc > 0) {
                const auto& car = carrier.values[i][l];
                for (std::size_t r = 0; r < kc; ++r) {
                    for (std::size_t c = 0; c < bands[l]; ++c) {
                        const float v = static_cast<float>(car[r * bands[l] + c]);
                        a_plus.at(r, i * bands[l] + c) = v;
                        a_minus.at(r, i * bands[l] + c) = v;
                    }
                }
            }
            Matrix direction(shape.d1, shape.d2);
            const auto& mix = mixed.values[i][l];
            for (std::size_t r = 0; r < kw; ++r) {
                for (std::size_t c = 0; c < band_cols; ++c) {
                    const float v = static_cast<float>(mix[r * band_cols + c]);
                    a_plus.at(kc + r, c) = v;
                    a_minus.at(kc + r, c) = -v;
                    direction.at(row_homes[l][r], c) = v;
                }
            }

            plus.add_layer(AdapterLayer{layer_name, b, std::move(a_plus), 1.0f});
            minus.add_layer(AdapterLayer{layer_name, std::move(b), std::move(a_minus), 1.0f});
            oracle.directions[i].emplace(layer_name, std::move(direction));
        }
        set.pairs.push_back(AnchorPair{names[i], std::move(minus), std::move(plus)});
    }

    // Calibrate offsets against the measured midpoint so one-hot endpoint
    // scores land at sigmoid(-gain) and sigmoid(gain). With the banded
    // construction the midpoint projection is exactly zero.
    for (std::size_t i = 0; i < n; ++i) {
        const auto plus_deltas = set.pairs[i].plus.dense_deltas();
        const auto minus_deltas = set.pairs[i].minus.dense_deltas();
        double mid = 0.0;
        for (const auto& [layer_name, dir] : oracle.directions[i]) {
            mid += 0.5 * (frobenius_inner(dir, plus_deltas.at(layer_name)) +
                          frobenius_inner(dir, minus_deltas.at(layer_name)));
        }
        oracle.offsets[i] = (mid == 0.0) ? 0.0 : -gain * mid;
    }
    return {std::move(set), std::move(oracle)};
}

std::vector<float> oracle_score_dense(const AttributeOracle& oracle,
                                      const std::map<std::string, Matrix>& deltas) {
    std::vector<float> scores;
    scores.reserve(oracle.attributes.size());
    for (std::size_t i = 0; i < oracle.attributes.size(); ++i) {
        const auto& dirs = oracle.directions[i];
        if (dirs.size() != deltas.size()) {
            throw ValidationError("oracle layer count " + std::to_string(dirs.size()) +
                                  " does not match composite layer count " +
                                  std::to_string(deltas.size()));
        }
        double projection = 0.0;
        auto it = deltas.begin();
        for (const auto& [layer_name, dir] : dirs) {
            if (it->first != layer_name || it->second.rows() != dir.rows() ||
                it->second.cols() != dir.cols()) {
                throw ValidationError("oracle direction layer '" + layer_name +
                                      "' does not match composite layer '" + it->first + "'");
            }
            projection += frobenius_inner(dir, it->second);
            ++it;
        }
        const double logit = oracle.gain * projection + oracle.offsets[i];
        scores.push_back(static_cast<float>(1.0 / (1.0 + std::exp(-logit))));
    }
    return scores;
}

std::vector<float> oracle_score(const AttributeOracle& oracle, const CompositeAdapter& composite) {
    return oracle_score_dense(oracle, to_dense(composite));
}

}  // namespace lorahull
