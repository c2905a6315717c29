// Copyright (c) 2026 The lorahull authors
// SPDX-License-Identifier: Apache-2.0

#include <cctype>
#include <fstream>

#include <nlohmann/json.hpp>

#include "lorahull/checkpoint.hpp"
#include "lorahull/errors.hpp"
#include "lorahull/synthetic.hpp"

namespace lorahull {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

bool filename_safe(const std::string& name) {
    if (name.empty()) return false;
    for (char c : name) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '_' && c != '-') {
            return false;
        }
    }
    return true;
}

}  // namespace

SyntheticSpec read_synthetic_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open synthetic spec '" + path.string() + "'");
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw IoError("synthetic spec '" + path.string() + "' is not valid JSON: " + e.what());
    }
    if (!doc.is_object()) {
        throw IoError("synthetic spec '" + path.string() + "' must be a JSON object");
    }

    SyntheticSpec spec;
    if (doc.contains("attribute_names")) {
        for (const auto& name : doc["attribute_names"]) {
            if (!name.is_string()) {
                throw ValidationError("synthetic spec: attribute_names must be strings");
            }
            spec.attribute_names.push_back(name.get<std::string>());
        }
    }
    if (doc.contains("correlation")) {
        const auto& rows = doc["correlation"];
        if (!rows.is_array() || rows.empty()) {
            throw ValidationError("synthetic spec: correlation must be a non-empty 2-D array");
        }
        const std::size_t n = rows.size();
        Matrix c(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            if (!rows[i].is_array() || rows[i].size() != n) {
                throw ValidationError("synthetic spec: correlation must be square");
            }
            for (std::size_t j = 0; j < n; ++j) {
                if (!rows[i][j].is_number()) {
                    throw ValidationError("synthetic spec: correlation entries must be numbers");
                }
                c.at(i, j) = rows[i][j].get<float>();
            }
        }
        spec.correlation = std::move(c);
    }

    if (doc.contains("n_attributes")) {
        spec.n_attributes = doc["n_attributes"].get<std::size_t>();
    } else if (!spec.attribute_names.empty()) {
        spec.n_attributes = spec.attribute_names.size();
    } else if (spec.correlation) {
        spec.n_attributes = spec.correlation->rows();
    }

    if (doc.contains("layers")) {
        for (const auto& layer : doc["layers"]) {
            if (!layer.is_object() || !layer.contains("name") || !layer.contains("d1") ||
                !layer.contains("d2")) {
                throw ValidationError("synthetic spec: every layer needs name/d1/d2");
            }
            spec.layers.emplace_back(
                layer["name"].get<std::string>(),
                LayerShape{layer["d1"].get<std::size_t>(), layer["d2"].get<std::size_t>()});
        }
    }
    if (doc.contains("rank")) spec.rank = doc["rank"].get<std::size_t>();
    if (doc.contains("gain")) spec.gain = doc["gain"].get<double>();
    if (doc.contains("seed")) spec.seed = doc["seed"].get<std::uint64_t>();
    return spec;
}

std::vector<std::filesystem::path> write_synthetic_bundle(const AnchorSet& set,
                                                          const AttributeOracle& oracle,
                                                          const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
    }
    for (const AnchorPair& pair : set.pairs) {
        if (!filename_safe(pair.attribute)) {
            throw ValidationError("attribute name '" + pair.attribute +
                                  "' is not filename-safe (use letters, digits, '.', '_', '-')");
        }
    }

    std::vector<std::filesystem::path> written;
    ordered_json manifest;
    manifest["attributes"] = ordered_json::array();
    for (const AnchorPair& pair : set.pairs) {
        const std::string minus_name = pair.attribute + "_minus.safetensors";
        const std::string plus_name = pair.attribute + "_plus.safetensors";
        write_adapter_checkpoint(pair.minus, dir / minus_name);
        write_adapter_checkpoint(pair.plus, dir / plus_name);
        written.push_back(dir / minus_name);
        written.push_back(dir / plus_name);

        ordered_json entry;
        entry["name"] = pair.attribute;
        entry["minus"] = minus_name;
        entry["plus"] = plus_name;
        manifest["attributes"].push_back(std::move(entry));
    }

    {
        std::ofstream out(dir / "manifest.json", std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot write '" + (dir / "manifest.json").string() + "'");
        }
        out << manifest.dump(2) << "\n";
        written.push_back(dir / "manifest.json");
    }

    std::map<std::string, Matrix> direction_tensors;
    for (std::size_t i = 0; i < oracle.directions.size(); ++i) {
        for (const auto& [layer_name, dir_matrix] : oracle.directions[i]) {
            direction_tensors.emplace("dir." + std::to_string(i) + "." + layer_name, dir_matrix);
        }
    }
    write_checkpoint(direction_tensors, {{"kind", "oracle-directions"}},
                     dir / "oracle_directions.safetensors");
    written.push_back(dir / "oracle_directions.safetensors");

    ordered_json oracle_doc;
    oracle_doc["gain"] = oracle.gain;
    oracle_doc["attributes"] = oracle.attributes;
    oracle_doc["offsets"] = oracle.offsets;
    oracle_doc["directions"] = "oracle_directions.safetensors";
    {
        std::ofstream out(dir / "oracle.json", std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot write '" + (dir / "oracle.json").string() + "'");
        }
        out << oracle_doc.dump(2) << "\n";
        written.push_back(dir / "oracle.json");
    }
    return written;
}

}  // namespace lorahull
