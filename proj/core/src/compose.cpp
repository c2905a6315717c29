// Copyright (c) 2026 The lorahull authors
// SPDX-License-Identifier: Apache-2.0

#include "lorahull/compose.hpp"

#include <algorithm>
#include <cmath>

#include "lorahull/errors.hpp"

namespace lorahull {

namespace {

void append_pair_terms(CompositeAdapter& composite, const AnchorPair& pair, double lambda,
                       double alpha) {
    // Coefficient products are ordered (lambda * (alpha * scaling)) so the
    // one-hot case multiplies by exactly 1.0 and reduces bit-exactly to the
    // single-attribute composition.
    for (auto& layer : composite.layers) {
        const AdapterLayer& plus = pair.plus.layer(layer.name);
        const AdapterLayer& minus = pair.minus.layer(layer.name);
        layer.terms.push_back(CompositeTerm{
            lambda * (alpha * static_cast<double>(plus.scaling)), plus.b, plus.a, pair.plus.id()});
        layer.terms.push_back(CompositeTerm{
            lambda * ((1.0 - alpha) * static_cast<double>(minus.scaling)), minus.b, minus.a,
            pair.minus.id()});
    }
}

CompositeAdapter composite_skeleton(const LayerSchema& schema) {
    CompositeAdapter composite;
    composite.layers.reserve(schema.size());
    for (const auto& [name, shape] : schema) {
        composite.layers.push_back(CompositeLayer{name, shape.d1, shape.d2, {}});
    }
    return composite;
}

}  // namespace

CompositeAdapter compose_single(const AnchorPair& pair, float alpha) {
    const ValidationReport report = validate_anchor_pair(pair);
    if (!report.ok()) {
        throw ValidationError("anchor pair '" + pair.attribute + "' violates its schema:\n" +
                              report.to_string());
    }
    CompositeAdapter composite = composite_skeleton(schema_of(pair.minus));
    append_pair_terms(composite, pair, 1.0, static_cast<double>(alpha));
    composite.provenance.anchor_ids = {pair.minus.id(), pair.plus.id()};
    composite.provenance.mix = MixSpec{{alpha}, {1.0f}};
    return composite;
}

CompositeAdapter compose_multi(const AnchorSet& set, const MixSpec& spec) {
    const ValidationReport report = validate_anchor_set(set);
    if (!report.ok()) {
        throw ValidationError("anchor set violates its schema:\n" + report.to_string());
    }
    const CheckedMixSpec checked = validate_mixspec(spec, set.size(), /*normalize=*/false);

    CompositeAdapter composite = composite_skeleton(set.schema());
    for (std::size_t i = 0; i < set.size(); ++i) {
        append_pair_terms(composite, set.pairs[i], static_cast<double>(checked.spec.lambda[i]),
                          static_cast<double>(checked.spec.alpha[i]));
        composite.provenance.anchor_ids.push_back(set.pairs[i].minus.id());
        composite.provenance.anchor_ids.push_back(set.pairs[i].plus.id());
    }
    composite.provenance.mix = checked.spec;
    return composite;
}

std::map<std::string, Matrix> to_dense(const CompositeAdapter& composite) {
    std::map<std::string, Matrix> out;
    for (const auto& layer : composite.layers) {
        std::vector<double> acc(layer.d1 * layer.d2, 0.0);
        for (const auto& term : layer.terms) {
            if (term.b.rows() != layer.d1 || term.a.cols() != layer.d2 ||
                term.b.cols() != term.a.rows()) {
                throw ValidationError("composite layer '" + layer.name +
                                      "': term factors B " + term.b.shape_str() + " / A " +
                                      term.a.shape_str() + " do not fit " +
                                      std::to_string(layer.d1) + "x" + std::to_string(layer.d2));
            }
            if (term.coefficient == 0.0) continue; // exact no-op either way
            for (std::size_t i = 0; i < layer.d1; ++i) {
                for (std::size_t j = 0; j < layer.d2; ++j) {
                    double dot = 0.0;
                    for (std::size_t k = 0; k < term.b.cols(); ++k) {
                        dot += static_cast<double>(term.b.at(i, k)) *
                               static_cast<double>(term.a.at(k, j));
                    }
                    acc[i * layer.d2 + j] += term.coefficient * dot;
                }
            }
        }
        Matrix dense(layer.d1, layer.d2);
        for (std::size_t i = 0; i < acc.size(); ++i) {
            dense.storage()[i] = static_cast<float>(acc[i]);
        }
        out.emplace(layer.name, std::move(dense));
    }
    return out;
}

Adapter to_lowrank_concat(const CompositeAdapter& composite, const std::string& id) {
    Adapter out(id);
    for (const auto& layer : composite.layers) {
        std::vector<const CompositeTerm*> kept;
        for (const auto& term : layer.terms) {
            if (term.coefficient != 0.0) kept.push_back(&term);
        }
        if (kept.empty()) {
            // Everything cancelled; emit an explicit rank-1 zero update so the
            // layer schema survives the export.
            AdapterLayer zero{layer.name, Matrix(layer.d1, 1), Matrix(1, layer.d2), 1.0f};
            out.add_layer(std::move(zero));
            continue;
        }
        std::size_t total_rank = 0;
        for (const CompositeTerm* term : kept) total_rank += term->b.cols();

        Matrix b(layer.d1, total_rank);
        Matrix a(total_rank, layer.d2);
        std::size_t col = 0;
        for (const CompositeTerm* term : kept) {
            const std::size_t k = term->b.cols();
            for (std::size_t i = 0; i < layer.d1; ++i) {
                for (std::size_t j = 0; j < k; ++j) {
                    b.at(i, col + j) =
                        static_cast<float>(term->coefficient * static_cast<double>(term->b.at(i, j)));
                }
            }
            for (std::size_t j = 0; j < k; ++j) {
                for (std::size_t c = 0; c < layer.d2; ++c) {
                    a.at(col + j, c) = term->a.at(j, c);
                }
            }
            col += k;
        }
        out.add_layer(AdapterLayer{layer.name, std::move(b), std::move(a), 1.0f});
    }
    return out;
}

Adapter recompress(const Adapter& adapter, std::size_t target_rank) {
    if (target_rank == 0) {
        throw ValidationError("recompress: target rank must be >= 1");
    }
    Adapter out(adapter.id());
    out.meta() = adapter.meta();
    out.meta()["recompressed_rank"] = std::to_string(target_rank);
    for (const auto& [name, layer] : adapter.layers()) {
        const Matrix dense = layer_delta(layer);
        const SvdResult decomposition = svd(dense);
        const std::size_t r = std::min(target_rank, decomposition.singular_values.size());

        Matrix b(dense.rows(), r);
        Matrix a(r, dense.cols());
        for (std::size_t j = 0; j < r; ++j) {
            const float s = decomposition.singular_values[j];
            for (std::size_t i = 0; i < dense.rows(); ++i) {
                b.at(i, j) = decomposition.u.at(i, j) * s;
            }
            for (std::size_t c = 0; c < dense.cols(); ++c) {
                a.at(j, c) = decomposition.v.at(c, j);
            }
        }
        out.add_layer(AdapterLayer{name, std::move(b), std::move(a), 1.0f});
    }
    return out;
}

}  // namespace lorahull
