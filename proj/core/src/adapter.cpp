// Copyright (c) 2026 The lorahull authors
// SPDX-License-Identifier: Apache-2.0

#include "lorahull/adapter.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "lorahull/errors.hpp"

namespace lorahull {

Matrix layer_delta(const AdapterLayer& layer) {
    if (layer.b.cols() != layer.a.rows()) {
        throw ValidationError("layer '" + layer.name + "': inner dimensions disagree, B " +
                              layer.b.shape_str() + " vs A " + layer.a.shape_str());
    }
    Matrix out(layer.b.rows(), layer.a.cols());
    const double s = static_cast<double>(layer.scaling);
    for (std::size_t i = 0; i < out.rows(); ++i) {
        for (std::size_t j = 0; j < out.cols(); ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < layer.b.cols(); ++k) {
                acc += static_cast<double>(layer.b.at(i, k)) * static_cast<double>(layer.a.at(k, j));
            }
            out.at(i, j) = static_cast<float>(s * acc);
        }
    }
    return out;
}

void Adapter::add_layer(AdapterLayer layer) {
    if (layer.name.empty()) {
        throw ValidationError("adapter '" + id_ + "': layer name must be non-empty");
    }
    if (layers_.count(layer.name) != 0) {
        throw ValidationError("adapter '" + id_ + "': duplicate layer '" + layer.name + "'");
    }
    if (layer.b.cols() != layer.a.rows()) {
        throw ValidationError("adapter '" + id_ + "', layer '" + layer.name +
                              "': B " + layer.b.shape_str() + " does not chain with A " +
                              layer.a.shape_str());
    }
    if (!(layer.scaling > 0.0f) || !std::isfinite(layer.scaling)) {
        throw ValidationError("adapter '" + id_ + "', layer '" + layer.name +
                              "': scaling must be positive and finite");
    }
    if (!layer.b.all_finite() || !layer.a.all_finite()) {
        throw ValidationError("adapter '" + id_ + "', layer '" + layer.name +
                              "': non-finite factor entries");
    }
    const std::string name = layer.name;
    layers_.emplace(name, std::move(layer));
}

const AdapterLayer& Adapter::layer(const std::string& name) const {
    auto it = layers_.find(name);
    if (it == layers_.end()) {
        throw ValidationError("adapter '" + id_ + "': no layer '" + name + "'");
    }
    return it->second;
}

std::map<std::string, Matrix> Adapter::dense_deltas() const {
    std::map<std::string, Matrix> out;
    for (const auto& [name, layer] : layers_) out.emplace(name, layer_delta(layer));
    return out;
}

LayerSchema schema_of(const Adapter& adapter) {
    LayerSchema schema;
    for (const auto& [name, layer] : adapter.layers()) {
        schema[name] = LayerShape{layer.d1(), layer.d2()};
    }
    return schema;
}

LayerSchema AnchorSet::schema() const {
    if (pairs.empty()) return {};
    return schema_of(pairs.front().minus);
}

std::vector<std::string> AnchorSet::attribute_names() const {
    std::vector<std::string> names;
    names.reserve(pairs.size());
    for (const auto& p : pairs) names.push_back(p.attribute);
    return names;
}

std::string ValidationReport::to_string() const {
    std::ostringstream os;
    for (const auto& issue : issues) {
        os << "[" << issue.attribute;
        if (!issue.layer.empty()) os << " / " << issue.layer;
        os << "] " << issue.message << "\n";
    }
    return os.str();
}

namespace {

void check_same_schema(const std::string& attribute, const LayerSchema& expect,
                       const Adapter& got, const std::string& which,
                       ValidationReport& report) {
    const LayerSchema actual = schema_of(got);
    for (const auto& [name, shape] : expect) {
        auto it = actual.find(name);
        if (it == actual.end()) {
            report.issues.push_back({attribute, name, which + " adapter '" + got.id() +
                                                           "' is missing this layer"});
        } else if (!(it->second == shape)) {
            report.issues.push_back(
                {attribute, name,
                 which + " adapter '" + got.id() + "' has shape " + std::to_string(it->second.d1) +
                     "x" + std::to_string(it->second.d2) + ", expected " +
                     std::to_string(shape.d1) + "x" + std::to_string(shape.d2)});
        }
    }
    for (const auto& [name, shape] : actual) {
        (void)shape;
        if (expect.find(name) == expect.end()) {
            report.issues.push_back({attribute, name, which + " adapter '" + got.id() +
                                                           "' has this extra layer"});
        }
    }
}

}  // namespace

ValidationReport validate_anchor_pair(const AnchorPair& pair) {
    ValidationReport report;
    check_same_schema(pair.attribute, schema_of(pair.minus), pair.plus, "plus", report);
    return report;
}

ValidationReport validate_anchor_set(const AnchorSet& set) {
    ValidationReport report;
    std::set<std::string> seen;
    for (const auto& pair : set.pairs) {
        if (!seen.insert(pair.attribute).second) {
            report.issues.push_back({pair.attribute, "", "duplicate attribute name"});
        }
    }
    if (set.pairs.empty()) return report;

    const LayerSchema schema = set.schema();
    for (const auto& pair : set.pairs) {
        check_same_schema(pair.attribute, schema, pair.minus, "minus", report);
        check_same_schema(pair.attribute, schema, pair.plus, "plus", report);
    }
    return report;
}

CheckedMixSpec validate_mixspec(const MixSpec& spec, std::size_t n_attributes, bool normalize) {
    if (spec.alpha.size() != n_attributes || spec.lambda.size() != n_attributes) {
        throw ValidationError("mix spec length mismatch: alpha has " +
                              std::to_string(spec.alpha.size()) + ", lambda has " +
                              std::to_string(spec.lambda.size()) + ", expected " +
                              std::to_string(n_attributes));
    }
    CheckedMixSpec out{spec, {}};
    for (std::size_t i = 0; i < n_attributes; ++i) {
        if (!std::isfinite(spec.alpha[i]) || !std::isfinite(spec.lambda[i])) {
            throw ValidationError("mix spec entry " + std::to_string(i) + " is not finite");
        }
        if (spec.lambda[i] < 0.0f) {
            throw ValidationError("lambda_" + std::to_string(i + 1) + " = " +
                                  std::to_string(spec.lambda[i]) + " is negative");
        }
        if (spec.alpha[i] < -1.0f || spec.alpha[i] > 2.0f) {
            out.warnings.push_back("alpha_" + std::to_string(i + 1) + " = " +
                                   std::to_string(spec.alpha[i]) +
                                   " lies outside the advisory stable range [-1, 2]");
        }
    }

    double sum = 0.0;
    for (float l : spec.lambda) sum += static_cast<double>(l);

    if (std::abs(sum - 1.0) <= 1e-6) {
        return out; // already on the simplex; pass through unchanged
    }
    if (!normalize) {
        throw ValidationError("lambda weights sum to " + std::to_string(sum) +
                              ", expected 1 (pass normalize to rescale)");
    }
    if (sum <= 0.0) {
        throw ValidationError("cannot normalize an all-zero lambda vector");
    }
    for (float& l : out.spec.lambda) {
        l = static_cast<float>(static_cast<double>(l) / sum);
    }
    return out;
}

}  // namespace lorahull
