// Copyright (c) 2026 The lorahull authors
// SPDX-License-Identifier: Apache-2.0

#include "lorahull/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "lorahull/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint IO assumes a little-endian host");

namespace lorahull {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr std::uint64_t kMaxHeaderBytes = 100ull * 1024 * 1024;

float f16_to_f32(std::uint16_t h) {
    const std::uint32_t sign = static_cast<std::uint32_t>(h & 0x8000u) << 16;
    const std::uint32_t exponent = (h >> 10) & 0x1Fu;
    const std::uint32_t mantissa = h & 0x3FFu;
    std::uint32_t bits;
    if (exponent == 0) {
        if (mantissa == 0) {
            bits = sign; // signed zero
        } else {
            // subnormal: renormalize
            std::uint32_t m = mantissa;
            int shift = 0;
            while (!(m & 0x400u)) {
                m <<= 1;
                ++shift;
            }
            bits = sign | ((112u - static_cast<std::uint32_t>(shift)) << 23) |
                   ((m & 0x3FFu) << 13);
        }
    } else if (exponent == 31) {
        bits = sign | 0x7F800000u | (mantissa << 13); // inf / nan
    } else {
        bits = sign | ((exponent + 112u) << 23) | (mantissa << 13);
    }
    return std::bit_cast<float>(bits);
}

struct TensorEntry {
    std::string name;
    std::string dtype;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::uint64_t begin = 0;
    std::uint64_t end = 0;
};

std::size_t dtype_size(const std::string& dtype) { return dtype == "F16" ? 2 : 4; }

IoError malformed(const std::filesystem::path& path, const std::string& what) {
    return IoError("checkpoint '" + path.string() + "': " + what);
}

}  // namespace

Checkpoint read_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open checkpoint '" + path.string() + "'");
    }
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw malformed(path, "read failure");
    }
    if (bytes.size() < 8) {
        throw malformed(path, "file shorter than the 8-byte header length field");
    }
    std::uint64_t header_len = 0;
    std::memcpy(&header_len, bytes.data(), 8);
    if (header_len > bytes.size() - 8) {
        throw malformed(path, "header length " + std::to_string(header_len) +
                                  " exceeds file size " + std::to_string(bytes.size()));
    }
    if (header_len > kMaxHeaderBytes) {
        throw malformed(path, "header length " + std::to_string(header_len) +
                                  " exceeds the sanity limit");
    }

    std::string header(bytes.data() + 8, header_len);
    // The format pads headers with trailing spaces for alignment.
    while (!header.empty() && (header.back() == ' ' || header.back() == '\0')) {
        header.pop_back();
    }
    json parsed;
    try {
        parsed = json::parse(header);
    } catch (const json::exception& e) {
        throw malformed(path, std::string("header is not valid JSON: ") + e.what());
    }
    if (!parsed.is_object()) {
        throw malformed(path, "header must be a JSON object");
    }

    const std::size_t data_size = bytes.size() - 8 - header_len;
    const char* data = bytes.data() + 8 + header_len;

    Checkpoint out;
    std::vector<TensorEntry> entries;
    for (const auto& [name, value] : parsed.items()) {
        if (name == "__metadata__") {
            if (!value.is_object()) {
                throw malformed(path, "__metadata__ must be an object of strings");
            }
            for (const auto& [k, v] : value.items()) {
                if (!v.is_string()) {
                    throw malformed(path, "__metadata__ entry '" + k + "' is not a string");
                }
                out.metadata[k] = v.get<std::string>();
            }
            continue;
        }
        if (!value.is_object() || !value.contains("dtype") || !value.contains("shape") ||
            !value.contains("data_offsets")) {
            throw malformed(path, "tensor '" + name + "' is missing dtype/shape/data_offsets");
        }
        TensorEntry entry;
        entry.name = name;
        if (!value["dtype"].is_string()) {
            throw malformed(path, "tensor '" + name + "' has a non-string dtype");
        }
        entry.dtype = value["dtype"].get<std::string>();
        if (entry.dtype != "F32" && entry.dtype != "F16") {
            throw malformed(path, "tensor '" + name + "' has unsupported dtype '" +
                                      entry.dtype + "' (only F32 and F16 are handled)");
        }
        const auto& shape = value["shape"];
        if (!shape.is_array() || shape.size() != 2 || !shape[0].is_number_unsigned() ||
            !shape[1].is_number_unsigned()) {
            throw malformed(path, "tensor '" + name + "' must have a 2-D unsigned shape");
        }
        entry.rows = shape[0].get<std::size_t>();
        entry.cols = shape[1].get<std::size_t>();
        if (entry.rows == 0 || entry.cols == 0) {
            throw malformed(path, "tensor '" + name + "' has a zero dimension");
        }
        if (entry.rows > (1u << 20) || entry.cols > (1u << 20) ||
            entry.rows * entry.cols > (1ull << 32)) {
            throw malformed(path, "tensor '" + name + "' shape is implausibly large");
        }
        const auto& offsets = value["data_offsets"];
        if (!offsets.is_array() || offsets.size() != 2 || !offsets[0].is_number_unsigned() ||
            !offsets[1].is_number_unsigned()) {
            throw malformed(path, "tensor '" + name + "' has malformed data_offsets");
        }
        entry.begin = offsets[0].get<std::uint64_t>();
        entry.end = offsets[1].get<std::uint64_t>();
        if (entry.begin > entry.end || entry.end > data_size) {
            throw malformed(path, "tensor '" + name + "' offsets [" +
                                      std::to_string(entry.begin) + ", " +
                                      std::to_string(entry.end) + ") fall outside the " +
                                      std::to_string(data_size) + "-byte data section");
        }
        const std::uint64_t expected = static_cast<std::uint64_t>(entry.rows) * entry.cols *
                                       dtype_size(entry.dtype);
        if (entry.end - entry.begin != expected) {
            throw malformed(path, "tensor '" + name + "' byte range does not match shape (" +
                                      std::to_string(entry.end - entry.begin) + " vs " +
                                      std::to_string(expected) + " bytes)");
        }
        entries.push_back(std::move(entry));
    }

    // Ranges must tile the data section: non-overlapping, contiguous, in-bounds.
    std::sort(entries.begin(), entries.end(),
              [](const TensorEntry& a, const TensorEntry& b) { return a.begin < b.begin; });
    std::uint64_t cursor = 0;
    for (const TensorEntry& entry : entries) {
        if (entry.begin != cursor) {
            throw malformed(path, "tensor '" + entry.name + "' leaves a gap or overlap at byte " +
                                      std::to_string(cursor));
        }
        cursor = entry.end;
    }
    if (cursor != data_size) {
        throw malformed(path, "data section has " + std::to_string(data_size - cursor) +
                                  " trailing bytes not covered by any tensor");
    }

    for (const TensorEntry& entry : entries) {
        Matrix m(entry.rows, entry.cols);
        const char* src = data + entry.begin;
        if (entry.dtype == "F32") {
            std::memcpy(m.storage().data(), src, entry.end - entry.begin);
        } else {
            for (std::size_t i = 0; i < m.size(); ++i) {
                std::uint16_t h;
                std::memcpy(&h, src + 2 * i, 2);
                m.storage()[i] = f16_to_f32(h);
            }
        }
        if (!m.all_finite()) {
            throw malformed(path, "tensor '" + entry.name + "' contains non-finite values");
        }
        out.tensors.emplace(entry.name, std::move(m));
    }
    return out;
}

void write_checkpoint(const std::map<std::string, Matrix>& tensors,
                      const std::map<std::string, std::string>& metadata,
                      const std::filesystem::path& path) {
    for (const auto& [name, tensor] : tensors) {
        if (!tensor.all_finite()) {
            throw ValidationError("tensor '" + name + "' contains non-finite values");
        }
    }

    ordered_json header = ordered_json::object();
    if (!metadata.empty()) {
        ordered_json meta = ordered_json::object();
        for (const auto& [k, v] : metadata) meta[k] = v;
        header["__metadata__"] = std::move(meta);
    }
    std::uint64_t cursor = 0;
    for (const auto& [name, tensor] : tensors) { // std::map: lexicographic order
        const std::uint64_t nbytes = static_cast<std::uint64_t>(tensor.size()) * 4;
        ordered_json entry;
        entry["dtype"] = "F32";
        entry["shape"] = {tensor.rows(), tensor.cols()};
        entry["data_offsets"] = {cursor, cursor + nbytes};
        header[name] = std::move(entry);
        cursor += nbytes;
    }
    const std::string header_str = header.dump();
    const std::uint64_t header_len = header_str.size();

    std::ofstream outf(path, std::ios::binary | std::ios::trunc);
    if (!outf) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    outf.write(reinterpret_cast<const char*>(&header_len), 8);
    outf.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
    for (const auto& [name, tensor] : tensors) {
        (void)name;
        outf.write(reinterpret_cast<const char*>(tensor.data().data()),
                   static_cast<std::streamsize>(tensor.size() * 4));
    }
    outf.flush();
    if (!outf) {
        throw IoError("write failure on '" + path.string() + "'");
    }
}

namespace {

constexpr const char* kLoraASuffix = ".lora_A.weight";
constexpr const char* kLoraBSuffix = ".lora_B.weight";

// "...lora_A..." -> layer key with the marker removed; suffix form preferred.
std::string layer_key(const std::string& tensor_name, const std::string& marker) {
    const std::string suffix = "." + marker + ".weight";
    if (tensor_name.size() > suffix.size() &&
        tensor_name.compare(tensor_name.size() - suffix.size(), suffix.size(), suffix) == 0) {
        return tensor_name.substr(0, tensor_name.size() - suffix.size());
    }
    const std::size_t pos = tensor_name.find(marker);
    std::string key = tensor_name.substr(0, pos) + tensor_name.substr(pos + marker.size());
    // tidy doubled separators left by the removal
    std::string tidy;
    for (char c : key) {
        if (c == '.' && !tidy.empty() && tidy.back() == '.') continue;
        tidy.push_back(c);
    }
    while (!tidy.empty() && tidy.front() == '.') tidy.erase(tidy.begin());
    while (!tidy.empty() && tidy.back() == '.') tidy.pop_back();
    return tidy;
}

float parse_scaling(const std::string& text, const std::string& what) {
    try {
        const float value = std::stof(text);
        if (!(value > 0.0f) || !std::isfinite(value)) {
            throw std::invalid_argument("non-positive");
        }
        return value;
    } catch (const std::exception&) {
        throw ValidationError("invalid scaling value '" + text + "' in " + what);
    }
}

}  // namespace

Adapter adapter_from_checkpoint(const Checkpoint& checkpoint, const std::string& id) {
    std::map<std::string, const Matrix*> a_parts;
    std::map<std::string, const Matrix*> b_parts;
    for (const auto& [name, tensor] : checkpoint.tensors) {
        if (name.find("lora_A") != std::string::npos) {
            a_parts[layer_key(name, "lora_A")] = &tensor;
        } else if (name.find("lora_B") != std::string::npos) {
            b_parts[layer_key(name, "lora_B")] = &tensor;
        } else {
            throw IoError("tensor '" + name + "' is neither a lora_A nor a lora_B factor");
        }
    }
    for (const auto& [key, tensor] : a_parts) {
        (void)tensor;
        if (b_parts.count(key) == 0) {
            throw IoError("unpaired tensor: layer '" + key + "' has lora_A but no lora_B");
        }
    }
    for (const auto& [key, tensor] : b_parts) {
        (void)tensor;
        if (a_parts.count(key) == 0) {
            throw IoError("unpaired tensor: layer '" + key + "' has lora_B but no lora_A");
        }
    }

    // Scaling precedence: per-layer key > global key > lora_alpha / r > 1.0.
    float global_scaling = 1.0f;
    const auto& meta = checkpoint.metadata;
    if (auto it = meta.find("scaling"); it != meta.end()) {
        global_scaling = parse_scaling(it->second, "metadata key 'scaling'");
    } else {
        auto alpha_it = meta.find("lora_alpha");
        auto r_it = meta.find("r");
        if (r_it == meta.end()) r_it = meta.find("lora_rank");
        if (alpha_it != meta.end() && r_it != meta.end()) {
            const float alpha = parse_scaling(alpha_it->second, "metadata key 'lora_alpha'");
            const float r = parse_scaling(r_it->second, "metadata key 'r'");
            global_scaling = alpha / r;
        }
    }

    Adapter adapter(id);
    adapter.meta() = meta;
    for (const auto& [key, a_tensor] : a_parts) {
        float scaling = global_scaling;
        if (auto it = meta.find("scaling." + key); it != meta.end()) {
            scaling = parse_scaling(it->second, "metadata key 'scaling." + key + "'");
        }
        adapter.add_layer(AdapterLayer{key, *b_parts.at(key), *a_tensor, scaling});
    }
    return adapter;
}

void write_adapter_checkpoint(const Adapter& adapter, const std::filesystem::path& path) {
    std::map<std::string, Matrix> tensors;
    std::map<std::string, std::string> metadata = adapter.meta();
    // Scalings are re-derived from the layers below; drop any stale keys.
    for (auto it = metadata.begin(); it != metadata.end();) {
        if (it->first == "scaling" || it->first.rfind("scaling.", 0) == 0) {
            it = metadata.erase(it);
        } else {
            ++it;
        }
    }

    bool uniform = true;
    float first_scaling = 1.0f;
    bool first = true;
    for (const auto& [name, layer] : adapter.layers()) {
        (void)name;
        if (first) {
            first_scaling = layer.scaling;
            first = false;
        } else if (layer.scaling != first_scaling) {
            uniform = false;
        }
    }
    char buf[40];
    if (uniform && !adapter.layers().empty()) {
        std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(first_scaling));
        metadata["scaling"] = buf;
    } else {
        for (const auto& [name, layer] : adapter.layers()) {
            std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(layer.scaling));
            metadata["scaling." + name] = buf;
        }
    }
    for (const auto& [name, layer] : adapter.layers()) {
        tensors.emplace(name + kLoraASuffix, layer.a);
        tensors.emplace(name + kLoraBSuffix, layer.b);
    }
    write_checkpoint(tensors, metadata, path);
}

}  // namespace lorahull
