// Copyright (c) 2026 The lorahull authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lorahull/adapter.hpp"

namespace lorahull {

struct ManifestEntry {
    std::string name;
    std::filesystem::path minus_path;
    std::filesystem::path plus_path;
    std::optional<float> scaling_override; // applied to every layer of both anchors
};

struct AnchorManifest {
    std::vector<ManifestEntry> entries;
};

/// Parses the manifest JSON:
///   {"attributes": [{"name": ..., "minus": ..., "plus": ..., "scaling": ...}, ...]}
/// Relative checkpoint paths resolve against the manifest's directory.
AnchorManifest read_anchor_manifest(const std::filesystem::path& path);

/// Loads all referenced checkpoints, applies scaling precedence (manifest
/// override > checkpoint metadata > 1.0) and validates the assembled set,
/// throwing with attribute and layer names on any schema violation.
AnchorSet load_anchor_manifest(const std::filesystem::path& path);

}  // namespace lorahull
