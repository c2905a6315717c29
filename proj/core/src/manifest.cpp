// Copyright (c) 2026 The lorahull authors
// SPDX-License-Identifier: Apache-2.0

#include "lorahull/manifest.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "lorahull/checkpoint.hpp"
#include "lorahull/errors.hpp"

namespace lorahull {

namespace {

using json = nlohmann::json;

json parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open manifest '" + path.string() + "'");
    }
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw IoError("manifest '" + path.string() + "' is not valid JSON: " + e.what());
    }
}

}  // namespace

AnchorManifest read_anchor_manifest(const std::filesystem::path& path) {
    const json doc = parse_file(path);
    if (!doc.is_object() || !doc.contains("attributes") || !doc["attributes"].is_array()) {
        throw IoError("manifest '" + path.string() + "' must contain an \"attributes\" array");
    }
    const std::filesystem::path base = path.parent_path();

    AnchorManifest manifest;
    std::set<std::string> seen;
    for (const auto& item : doc["attributes"]) {
        if (!item.is_object() || !item.contains("name") || !item.contains("minus") ||
            !item.contains("plus") || !item["name"].is_string() || !item["minus"].is_string() ||
            !item["plus"].is_string()) {
            throw IoError("manifest '" + path.string() +
                          "': every attribute entry needs string fields name/minus/plus");
        }
        ManifestEntry entry;
        entry.name = item["name"].get<std::string>();
        if (entry.name.empty()) {
            throw ValidationError("manifest '" + path.string() + "': empty attribute name");
        }
        if (!seen.insert(entry.name).second) {
            throw ValidationError("manifest '" + path.string() + "': duplicate attribute '" +
                                  entry.name + "'");
        }
        auto resolve = [&](const std::string& p) {
            std::filesystem::path fp(p);
            return fp.is_absolute() ? fp : base / fp;
        };
        entry.minus_path = resolve(item["minus"].get<std::string>());
        entry.plus_path = resolve(item["plus"].get<std::string>());
        if (item.contains("scaling")) {
            if (!item["scaling"].is_number()) {
                throw ValidationError("manifest '" + path.string() + "', attribute '" +
                                      entry.name + "': scaling must be a number");
            }
            const float s = item["scaling"].get<float>();
            if (!(s > 0.0f) || !std::isfinite(s)) {
                throw ValidationError("manifest '" + path.string() + "', attribute '" +
                                      entry.name + "': scaling must be positive and finite");
            }
            entry.scaling_override = s;
        }
        manifest.entries.push_back(std::move(entry));
    }
    if (manifest.entries.empty()) {
        throw ValidationError("manifest '" + path.string() + "' lists no attributes");
    }
    return manifest;
}

AnchorSet load_anchor_manifest(const std::filesystem::path& path) {
    const AnchorManifest manifest = read_anchor_manifest(path);

    AnchorSet set;
    for (const ManifestEntry& entry : manifest.entries) {
        auto load = [&](const std::filesystem::path& file, const char* which) {
            if (!std::filesystem::exists(file)) {
                throw IoError("manifest attribute '" + entry.name + "': " + which +
                              " checkpoint '" + file.string() + "' does not exist");
            }
            Adapter adapter = adapter_from_checkpoint(read_checkpoint(file),
                                                      entry.name + "_" + which);
            if (entry.scaling_override) {
                Adapter rescaled(adapter.id());
                rescaled.meta() = adapter.meta();
                for (const auto& [name, layer] : adapter.layers()) {
                    AdapterLayer copy = layer;
                    copy.scaling = *entry.scaling_override;
                    rescaled.add_layer(std::move(copy));
                    (void)name;
                }
                return rescaled;
            }
            return adapter;
        };
        set.pairs.push_back(
            AnchorPair{entry.name, load(entry.minus_path, "minus"), load(entry.plus_path, "plus")});
    }

    const ValidationReport report = validate_anchor_set(set);
    if (!report.ok()) {
        throw ValidationError("manifest '" + path.string() + "' fails schema validation:\n" +
                              report.to_string());
    }
    return set;
}

}  // namespace lorahull
