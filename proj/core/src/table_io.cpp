// Copyright (c) 2026 The lorahull authors
// SPDX-License-Identifier: Apache-2.0

#include "lorahull/table_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lorahull/errors.hpp"

namespace lorahull {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) {
        throw IoError("write failure on '" + path.string() + "'");
    }
}

// Minimal CSV quoting; labels are usually plain identifiers.
std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    return quoted + "\"";
}

void dump_json(const ordered_json& j, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << j.dump(2) << "\n";
    finish(out, path);
}

}  // namespace

TableFormat table_format_from_string(const std::string& name) {
    if (name == "csv") return TableFormat::csv;
    if (name == "json") return TableFormat::json;
    throw ValidationError("unknown table format '" + name + "' (expected csv or json)");
}

std::string format_real(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", value);
    return buf;
}

void export_sweep(const SweepResult& result, const std::filesystem::path& path,
                  TableFormat format) {
    const std::size_t n = result.n_attributes;
    if (format == TableFormat::csv) {
        auto out = open_out(path);
        out << "row_id";
        for (std::size_t i = 1; i <= n; ++i) out << ",alpha_" << i;
        for (std::size_t i = 1; i <= n; ++i) out << ",lambda_" << i;
        for (std::size_t i = 1; i <= n; ++i) out << ",score_" << i;
        out << ",delta_norm\n";
        for (const SweepRowResult& row : result.rows) {
            out << csv_field(row.id);
            for (float a : row.alpha) out << "," << format_real(a);
            for (float l : row.lambda) out << "," << format_real(l);
            if (row.scores) {
                for (float s : *row.scores) out << "," << format_real(s);
            } else {
                for (std::size_t i = 0; i < n; ++i) out << ",";
            }
            out << "," << format_real(row.delta_norm) << "\n";
        }
        finish(out, path);
        return;
    }

    ordered_json j;
    j["plan_id"] = result.plan_id;
    j["n_attributes"] = n;
    if (!result.warnings.empty()) j["warnings"] = result.warnings;
    auto rows = ordered_json::array();
    for (const SweepRowResult& row : result.rows) {
        ordered_json r;
        r["row_id"] = row.id;
        r["alpha"] = row.alpha;
        r["lambda"] = row.lambda;
        if (row.scores) {
            r["scores"] = *row.scores;
        } else {
            r["scores"] = nullptr;
        }
        if (!row.score_error.empty()) r["score_error"] = row.score_error;
        r["delta_norm"] = row.delta_norm;
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    dump_json(j, path);
}

void export_similarity(const SimilarityMatrix& matrix, const std::filesystem::path& path,
                       TableFormat format) {
    if (format == TableFormat::csv) {
        auto out = open_out(path);
        out << "id";
        for (const std::string& label : matrix.labels) out << "," << csv_field(label);
        out << "\n";
        for (std::size_t i = 0; i < matrix.labels.size(); ++i) {
            out << csv_field(matrix.labels[i]);
            for (std::size_t j = 0; j < matrix.labels.size(); ++j) {
                out << "," << format_real(matrix.values.at(i, j));
            }
            out << "\n";
        }
        finish(out, path);
        return;
    }

    ordered_json j;
    j["labels"] = matrix.labels;
    auto values = ordered_json::array();
    for (std::size_t i = 0; i < matrix.values.rows(); ++i) {
        auto row = ordered_json::array();
        for (std::size_t c = 0; c < matrix.values.cols(); ++c) {
            row.push_back(matrix.values.at(i, c));
        }
        values.push_back(std::move(row));
    }
    j["values"] = std::move(values);
    if (!matrix.warnings.empty()) j["warnings"] = matrix.warnings;
    dump_json(j, path);
}

void export_mds(const MdsEmbedding& embedding, const std::filesystem::path& path,
                TableFormat format) {
    const std::size_t dim = embedding.coordinates.cols();
    if (format == TableFormat::csv) {
        auto out = open_out(path);
        out << "id";
        for (std::size_t j = 1; j <= dim; ++j) out << ",x_" << j;
        out << "\n";
        for (std::size_t i = 0; i < embedding.labels.size(); ++i) {
            out << csv_field(embedding.labels[i]);
            for (std::size_t j = 0; j < dim; ++j) {
                out << "," << format_real(embedding.coordinates.at(i, j));
            }
            out << "\n";
        }
        finish(out, path);
        return;
    }

    ordered_json j;
    j["labels"] = embedding.labels;
    auto coords = ordered_json::array();
    for (std::size_t i = 0; i < embedding.labels.size(); ++i) {
        auto row = ordered_json::array();
        for (std::size_t c = 0; c < dim; ++c) row.push_back(embedding.coordinates.at(i, c));
        coords.push_back(std::move(row));
    }
    j["coordinates"] = std::move(coords);
    j["axis_eigenvalues"] = embedding.axis_eigenvalues;
    j["clipped_magnitudes"] = embedding.clipped_magnitudes;
    if (!embedding.warnings.empty()) j["warnings"] = embedding.warnings;
    dump_json(j, path);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field += c;
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

std::map<std::string, std::vector<float>> load_scores_csv(const std::filesystem::path& path,
                                                          std::size_t n) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open scores file '" + path.string() + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw IoError("scores file '" + path.string() + "' is empty");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split_csv_line(line);

    std::size_t id_col = header.size();
    std::vector<std::size_t> score_cols(n, header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == "row_id") id_col = c;
        for (std::size_t i = 0; i < n; ++i) {
            if (header[c] == "score_" + std::to_string(i + 1)) score_cols[i] = c;
        }
    }
    if (id_col == header.size()) {
        throw IoError("scores file '" + path.string() + "' has no row_id column");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (score_cols[i] == header.size()) {
            throw IoError("scores file '" + path.string() + "' is missing column score_" +
                          std::to_string(i + 1));
        }
    }

    std::map<std::string, std::vector<float>> scores;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw IoError("scores file '" + path.string() + "' line " + std::to_string(line_no) +
                          ": expected " + std::to_string(header.size()) + " fields, got " +
                          std::to_string(fields.size()));
        }
        std::vector<float> row(n);
        bool complete = true;
        for (std::size_t i = 0; i < n; ++i) {
            const std::string& cell = fields[score_cols[i]];
            if (cell.empty()) {
                complete = false;
                break;
            }
            try {
                row[i] = std::stof(cell);
            } catch (const std::exception&) {
                throw IoError("scores file '" + path.string() + "' line " +
                              std::to_string(line_no) + ": bad number '" + cell + "'");
            }
        }
        if (complete) scores[fields[id_col]] = std::move(row);
    }
    return scores;
}

std::map<std::string, std::vector<float>> load_scores_json(const std::filesystem::path& path,
                                                           std::size_t n) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open scores file '" + path.string() + "'");
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw IoError("scores file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    std::map<std::string, std::vector<float>> scores;
    auto take = [&](const std::string& id, const json& arr) {
        if (!arr.is_array() || arr.size() != n) return;
        std::vector<float> row;
        for (const auto& v : arr) {
            if (!v.is_number()) return;
            row.push_back(v.get<float>());
        }
        scores[id] = std::move(row);
    };
    if (doc.is_object() && doc.contains("rows") && doc["rows"].is_array()) {
        for (const auto& row : doc["rows"]) {
            if (row.is_object() && row.contains("row_id") && row["row_id"].is_string() &&
                row.contains("scores")) {
                take(row["row_id"].get<std::string>(), row["scores"]);
            }
        }
    } else if (doc.is_object()) {
        for (const auto& [key, value] : doc.items()) take(key, value);
    } else {
        throw IoError("scores file '" + path.string() + "' has an unrecognized JSON shape");
    }
    return scores;
}

}  // namespace

std::map<std::string, std::vector<float>> load_scores(const std::filesystem::path& path,
                                                      std::size_t n_attributes) {
    if (path.extension() == ".json") return load_scores_json(path, n_attributes);
    return load_scores_csv(path, n_attributes);
}

}  // namespace lorahull
