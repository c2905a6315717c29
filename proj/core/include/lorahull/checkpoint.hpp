// Copyright (c) 2026 The lorahull authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "lorahull/adapter.hpp"
#include "lorahull/matrix.hpp"

namespace lorahull {

/// Parsed checkpoint: named 2-D tensors plus the free-form string metadata
/// table from the header.
struct Checkpoint {
    std::map<std::string, Matrix> tensors;
    std::map<std::string, std::string> metadata;
};

/// Reads the safetensors layout: an unsigned 64-bit little-endian header
/// length, a JSON header mapping tensor names to {dtype, shape, data_offsets},
/// then the raw tensor buffer. F32 is taken as-is, F16 upcast; anything else
/// is an error. Offsets must tile the data section exactly and every value
/// must be finite.
Checkpoint read_checkpoint(const std::filesystem::path& path);

/// Writes the same layout with tensors ordered lexicographically by name and
/// the optional metadata table first. Output bytes are a pure function of the
/// input, so write -> read -> write round-trips byte-identically.
void write_checkpoint(const std::map<std::string, Matrix>& tensors,
                      const std::map<std::string, std::string>& metadata,
                      const std::filesystem::path& path);

/// Groups "<layer>.lora_A.weight" / "<layer>.lora_B.weight" tensor pairs into
/// adapter layers. The scaling of every layer follows the metadata rules:
/// a per-layer "scaling.<layer>" key wins over a global "scaling" key, which
/// wins over lora_alpha / r, which defaults to 1.
Adapter adapter_from_checkpoint(const Checkpoint& checkpoint, const std::string& id);

/// Inverse of adapter_from_checkpoint: tensor names gain the lora_A / lora_B
/// suffixes and per-layer scalings are recorded in the metadata.
void write_adapter_checkpoint(const Adapter& adapter, const std::filesystem::path& path);

}  // namespace lorahull
