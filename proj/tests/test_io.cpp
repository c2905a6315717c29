// Copyright (c) 2026 The lorahull authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "lorahull/checkpoint.hpp"
#include "lorahull/compose.hpp"
#include "lorahull/errors.hpp"
#include "lorahull/manifest.hpp"
#include "lorahull/sweep.hpp"
#include "lorahull/synthetic.hpp"
#include "lorahull/table_io.hpp"
#include "oracles.hpp"

using namespace lorahull;
using oracles::Rng;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("lorahull_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

std::vector<char> slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    return std::vector<char>((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
}

void spit(const fs::path& p, const std::vector<char>& bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    REQUIRE(out);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::vector<char> raw_checkpoint(const std::string& header, const std::string& payload) {
    std::string blob(8, '\0');
    const std::uint64_t len = header.size();
    std::memcpy(blob.data(), &len, 8);
    blob += header;
    blob += payload;
    return std::vector<char>(blob.begin(), blob.end());
}

}  // namespace

TEST_CASE("checkpoint write -> read round trip is bit exact") {
    TempDir tmp;
    Rng rng(601);
    std::map<std::string, Matrix> tensors{
        {"w.lora_A.weight", rng.matrix(3, 5)},
        {"w.lora_B.weight", rng.matrix(4, 3)},
    };
    const std::map<std::string, std::string> meta{{"scaling", "0.5"}, {"note", "x"}};
    const fs::path file = tmp.path / "t.safetensors";
    write_checkpoint(tensors, meta, file);

    const Checkpoint back = read_checkpoint(file);
    CHECK(back.metadata == meta);
    REQUIRE(back.tensors.size() == 2);
    CHECK(back.tensors.at("w.lora_A.weight") == tensors.at("w.lora_A.weight"));
    CHECK(back.tensors.at("w.lora_B.weight") == tensors.at("w.lora_B.weight"));
}

TEST_CASE("write -> read -> write produces byte-identical files") {
    TempDir tmp;
    Rng rng(602);
    std::map<std::string, Matrix> tensors;
    for (int t = 0; t < 5; ++t) {
        tensors.emplace("tensor_" + std::to_string(t) + ".lora_A.weight", rng.matrix(6, 2));
        tensors.emplace("tensor_" + std::to_string(t) + ".lora_B.weight", rng.matrix(7, 6));
    }
    const fs::path first = tmp.path / "a.safetensors";
    const fs::path second = tmp.path / "b.safetensors";
    write_checkpoint(tensors, {{"k", "v"}}, first);
    const Checkpoint back = read_checkpoint(first);
    write_checkpoint(back.tensors, back.metadata, second);
    CHECK(slurp(first) == slurp(second));
}

TEST_CASE("empty tensor set still yields a valid file") {
    TempDir tmp;
    const fs::path file = tmp.path / "empty.safetensors";
    write_checkpoint({}, {}, file);
    const Checkpoint back = read_checkpoint(file);
    CHECK(back.tensors.empty());
    CHECK(back.metadata.empty());
}

TEST_CASE("f16 tensors upcast exactly for representable values") {
    TempDir tmp;
    // one 1x2 F16 tensor: 1.0 (0x3C00) and -2.0 (0xC000)
    const std::string header =
        R"({"x":{"dtype":"F16","shape":[1,2],"data_offsets":[0,4]}})";
    std::string payload;
    payload.push_back(static_cast<char>(0x00));
    payload.push_back(static_cast<char>(0x3C));
    payload.push_back(static_cast<char>(0x00));
    payload.push_back(static_cast<char>(0xC0));
    const fs::path file = tmp.path / "f16.safetensors";
    spit(file, raw_checkpoint(header, payload));

    const Checkpoint back = read_checkpoint(file);
    CHECK(back.tensors.at("x").at(0, 0) == 1.0f);
    CHECK(back.tensors.at("x").at(0, 1) == -2.0f);
}

TEST_CASE("padded headers parse") {
    TempDir tmp;
    const std::string header =
        R"({"x":{"dtype":"F32","shape":[1,1],"data_offsets":[0,4]}})" + std::string("   ");
    const fs::path file = tmp.path / "padded.safetensors";
    spit(file, raw_checkpoint(header, std::string(4, '\0')));
    CHECK(read_checkpoint(file).tensors.at("x").at(0, 0) == 0.0f);
}

TEST_CASE("malformed checkpoints produce structured errors") {
    TempDir tmp;
    const fs::path file = tmp.path / "bad.safetensors";

    SUBCASE("missing file") {
        CHECK_THROWS_AS(read_checkpoint(tmp.path / "nope.safetensors"), IoError);
    }
    SUBCASE("header length beyond the file") {
        std::vector<char> bytes(8, 0);
        bytes[0] = 100;
        spit(file, bytes);
        CHECK_THROWS_AS(read_checkpoint(file), IoError);
    }
    SUBCASE("header is not JSON") {
        spit(file, raw_checkpoint("not json at all", ""));
        CHECK_THROWS_AS(read_checkpoint(file), IoError);
    }
    SUBCASE("offsets out of bounds") {
        spit(file,
             raw_checkpoint(R"({"x":{"dtype":"F32","shape":[2,2],"data_offsets":[0,16]}})", ""));
        CHECK_THROWS_AS(read_checkpoint(file), IoError);
    }
    SUBCASE("offsets disagree with the shape") {
        spit(file, raw_checkpoint(R"({"x":{"dtype":"F32","shape":[2,2],"data_offsets":[0,8]}})",
                                  std::string(8, '\0')));
        CHECK_THROWS_AS(read_checkpoint(file), IoError);
    }
    SUBCASE("unsupported dtype") {
        spit(file, raw_checkpoint(R"({"x":{"dtype":"BF16","shape":[1,1],"data_offsets":[0,2]}})",
                                  std::string(2, '\0')));
        CHECK_THROWS_AS(read_checkpoint(file), IoError);
    }
    SUBCASE("overlapping ranges") {
        spit(file, raw_checkpoint(
                       R"({"x":{"dtype":"F32","shape":[1,1],"data_offsets":[0,4]},)"
                       R"("y":{"dtype":"F32","shape":[1,1],"data_offsets":[0,4]}})",
                       std::string(4, '\0')));
        CHECK_THROWS_AS(read_checkpoint(file), IoError);
    }
    SUBCASE("non-finite payload") {
        std::string payload(4, '\0');
        const std::uint32_t inf = 0x7F800000u;
        std::memcpy(payload.data(), &inf, 4);
        spit(file, raw_checkpoint(R"({"x":{"dtype":"F32","shape":[1,1],"data_offsets":[0,4]}})",
                                  payload));
        CHECK_THROWS_AS(read_checkpoint(file), IoError);
    }
}

TEST_CASE("adapter round trip through the checkpoint format") {
    TempDir tmp;
    Rng rng(603);
    Adapter adapter = rng.adapter("demo", 3, 8, 2, 0.5f);
    adapter.meta()["attribute"] = "style";
    const fs::path file = tmp.path / "adapter.safetensors";
    write_adapter_checkpoint(adapter, file);

    const Adapter back = adapter_from_checkpoint(read_checkpoint(file), "demo");
    REQUIRE(back.layer_count() == 3);
    for (const auto& [name, layer] : adapter.layers()) {
        CHECK(back.layer(name).b == layer.b);
        CHECK(back.layer(name).a == layer.a);
        CHECK(back.layer(name).scaling == layer.scaling);
    }
    CHECK(back.meta().at("attribute") == "style");
}

TEST_CASE("scaling precedence: explicit key, then lora_alpha/r, then 1") {
    Checkpoint ck;
    ck.tensors.emplace("l.lora_A.weight", Matrix(2, 4));
    ck.tensors.emplace("l.lora_B.weight", Matrix(4, 2));

    SUBCASE("default") {
        CHECK(adapter_from_checkpoint(ck, "x").layer("l").scaling == 1.0f);
    }
    SUBCASE("lora_alpha over r") {
        ck.metadata = {{"lora_alpha", "16"}, {"r", "32"}};
        CHECK(adapter_from_checkpoint(ck, "x").layer("l").scaling == 0.5f);
    }
    SUBCASE("explicit scaling wins") {
        ck.metadata = {{"lora_alpha", "16"}, {"r", "32"}, {"scaling", "2"}};
        CHECK(adapter_from_checkpoint(ck, "x").layer("l").scaling == 2.0f);
    }
    SUBCASE("per-layer scaling wins over global") {
        ck.metadata = {{"scaling", "2"}, {"scaling.l", "4"}};
        CHECK(adapter_from_checkpoint(ck, "x").layer("l").scaling == 4.0f);
    }
}

TEST_CASE("unpaired lora tensors are rejected") {
    Checkpoint ck;
    ck.tensors.emplace("l.lora_A.weight", Matrix(2, 4));
    CHECK_THROWS_AS(adapter_from_checkpoint(ck, "x"), IoError);
    ck.tensors.emplace("other", Matrix(2, 2));
    CHECK_THROWS_AS(adapter_from_checkpoint(ck, "x"), IoError);
}

TEST_CASE("infix lora markers group into the same layer") {
    Checkpoint ck;
    ck.tensors.emplace("w.lora_A.bin", Matrix(2, 4));
    ck.tensors.emplace("w.lora_B.bin", Matrix(4, 2));
    const Adapter adapter = adapter_from_checkpoint(ck, "x");
    CHECK(adapter.has_layer("w.bin"));
    CHECK(adapter.layer("w.bin").rank() == 2);
}

TEST_CASE("merged adapters load back and densify to the same delta") {
    TempDir tmp;
    Rng rng(604);
    const AnchorSet set = rng.set(2, 2, 10, 3);
    const CompositeAdapter composite =
        compose_multi(set, MixSpec{{0.4f, 0.8f}, {0.5f, 0.5f}});
    const Adapter merged = to_lowrank_concat(composite);
    const fs::path file = tmp.path / "merged.safetensors";
    write_adapter_checkpoint(merged, file);

    const Adapter back = adapter_from_checkpoint(read_checkpoint(file), "merged");
    const auto want = to_dense(composite);
    for (const auto& [name, dense] : want) {
        const Matrix got = layer_delta(back.layer(name));
        for (std::size_t i = 0; i < dense.rows(); ++i) {
            for (std::size_t j = 0; j < dense.cols(); ++j) {
                CHECK(oracles::approx_rel(got.at(i, j), dense.at(i, j), 1e-6, 1e-7));
            }
        }
    }
}

TEST_CASE("manifest loading mirrors the five-attribute setup") {
    TempDir tmp;
    SyntheticSpec spec;
    spec.n_attributes = 5;
    spec.attribute_names = {"simplicity", "formality", "politeness", "sentiment", "humor"};
    spec.layers = {{"l0", {32, 32}}, {"l1", {32, 32}}};
    spec.rank = 2;
    spec.seed = 31;
    auto [set, oracle] = gen_anchor_set(spec);
    write_synthetic_bundle(set, oracle, tmp.path);

    const AnchorSet loaded = load_anchor_manifest(tmp.path / "manifest.json");
    REQUIRE(loaded.size() == 5);
    CHECK(loaded.pairs[0].attribute == "simplicity");
    CHECK(loaded.pairs[4].attribute == "humor");
    CHECK(validate_anchor_set(loaded).ok());

    // Loaded anchors densify to the generated ones.
    for (std::size_t i = 0; i < 5; ++i) {
        const auto want = set.pairs[i].plus.dense_deltas();
        const auto got = loaded.pairs[i].plus.dense_deltas();
        for (const auto& [name, dense] : want) {
            CHECK(got.at(name) == dense);
        }
    }
}

TEST_CASE("single-entry manifests load") {
    TempDir tmp;
    SyntheticSpec spec;
    spec.n_attributes = 1;
    spec.layers = {{"l0", {16, 16}}};
    spec.rank = 2;
    spec.seed = 32;
    auto [set, oracle] = gen_anchor_set(spec);
    write_synthetic_bundle(set, oracle, tmp.path);
    CHECK(load_anchor_manifest(tmp.path / "manifest.json").size() == 1);
}

TEST_CASE("manifests with missing files name the path") {
    TempDir tmp;
    std::ofstream out(tmp.path / "manifest.json");
    out << R"({"attributes":[{"name":"a","minus":"gone.safetensors","plus":"gone.safetensors"}]})";
    out.close();
    try {
        load_anchor_manifest(tmp.path / "manifest.json");
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("gone.safetensors") != std::string::npos);
    }
}

TEST_CASE("manifest scaling override beats checkpoint metadata") {
    TempDir tmp;
    Rng rng(605);
    Adapter adapter = rng.adapter("x", 1, 8, 2, 0.5f);
    write_adapter_checkpoint(adapter, tmp.path / "m.safetensors");
    write_adapter_checkpoint(adapter, tmp.path / "p.safetensors");
    std::ofstream out(tmp.path / "manifest.json");
    out << R"({"attributes":[{"name":"a","minus":"m.safetensors","plus":"p.safetensors","scaling":2.0}]})";
    out.close();
    const AnchorSet set = load_anchor_manifest(tmp.path / "manifest.json");
    for (const auto& [name, layer] : set.pairs[0].plus.layers()) {
        (void)name;
        CHECK(layer.scaling == 2.0f);
    }
}

TEST_CASE("sweep CSV export has one line per row plus a header") {
    TempDir tmp;
    Rng rng(606);
    const AnchorSet set = rng.set(2, 1, 6, 2);
    const SweepResult result = run_sweep(plan_alpha_line(2, 0, 0.0f, 1.0f, 3), set);
    const fs::path file = tmp.path / "sweep.csv";
    export_sweep(result, file, TableFormat::csv);

    std::ifstream in(file);
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) lines.push_back(line);
    REQUIRE(lines.size() == 4);
    CHECK(lines[0] ==
          "row_id,alpha_1,alpha_2,lambda_1,lambda_2,score_1,score_2,delta_norm");
    CHECK(lines[1].rfind("r0000,", 0) == 0);
    // unscored rows leave the score cells empty
    CHECK(lines[1].find(",,") != std::string::npos);
}

TEST_CASE("sweep JSON export round-trips values") {
    TempDir tmp;
    SyntheticSpec spec;
    spec.n_attributes = 2;
    spec.layers = {{"l0", {16, 16}}};
    spec.rank = 2;
    spec.seed = 33;
    auto [set, oracle] = gen_anchor_set(spec);
    const Scorer scorer = [&](const std::string&, const CompositeAdapter& c) {
        return oracle_score(oracle, c);
    };
    const SweepResult result = run_sweep(plan_alpha_line(2, 1, 0.0f, 1.0f, 5), set, scorer);
    const fs::path file = tmp.path / "sweep.json";
    export_sweep(result, file, TableFormat::json);

    std::ifstream in(file);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    REQUIRE(!text.empty());

    // parse back via the scores loader (reuses the emitted shape)
    const auto joined = load_scores(file, 2);
    REQUIRE(joined.size() == 5);
    for (std::size_t r = 0; r < 5; ++r) {
        const auto& got = joined.at(result.rows[r].id);
        for (std::size_t i = 0; i < 2; ++i) {
            CHECK(oracles::approx_rel(got[i], (*result.rows[r].scores)[i], 1e-9));
        }
    }
}

TEST_CASE("simplex sweep export carries 66 data rows at m = 10") {
    TempDir tmp;
    Rng rng(607);
    const AnchorSet set = rng.set(3, 1, 6, 2);
    const SweepResult result = run_sweep(plan_simplex(3, {0, 1, 2}, 10, 1.0f), set);
    const fs::path file = tmp.path / "simplex.csv";
    export_sweep(result, file, TableFormat::csv);
    std::ifstream in(file);
    std::string line;
    std::size_t count = 0;
    while (std::getline(in, line)) ++count;
    CHECK(count == 67);
}

TEST_CASE("external score tables join by row id") {
    TempDir tmp;
    const fs::path file = tmp.path / "scores.csv";
    {
        std::ofstream out(file);
        out << "row_id,score_1,score_2\n";
        out << "r0000,0.25,0.5\n";
        out << "r0002,0.75,0.125\n";
    }
    const auto scores = load_scores(file, 2);
    REQUIRE(scores.size() == 2);
    CHECK(scores.at("r0000")[1] == 0.5f);
    CHECK(scores.at("r0002")[0] == 0.75f);
    CHECK(scores.count("r0001") == 0);
}

TEST_CASE("score tables missing a column are rejected") {
    TempDir tmp;
    const fs::path file = tmp.path / "scores.csv";
    {
        std::ofstream out(file);
        out << "row_id,score_1\n";
        out << "r0000,0.25\n";
    }
    CHECK_THROWS_AS(load_scores(file, 2), IoError);
    {
        std::ofstream out(file);
        out << "id,score_1\nx,0.5\n";
    }
    CHECK_THROWS_AS(load_scores(file, 1), IoError);
}

TEST_CASE("similarity and mds exports are readable tables") {
    TempDir tmp;
    Rng rng(608);
    const std::vector<Adapter> adapters{rng.adapter("a", 2, 8, 2), rng.adapter("b", 2, 8, 2)};
    export_similarity(pairwise_sq_l2(adapters), tmp.path / "l2.csv", TableFormat::csv);
    export_similarity(pairwise_cosine(adapters), tmp.path / "cos.json", TableFormat::json);

    std::ifstream in(tmp.path / "l2.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "id,a,b");

    SimilarityMatrix dist{{"p", "q"}, Matrix{{0.0f, 2.0f}, {2.0f, 0.0f}}, {}};
    export_mds(mds_embed(dist, 1), tmp.path / "mds.csv", TableFormat::csv);
    std::ifstream mds_in(tmp.path / "mds.csv");
    std::getline(mds_in, header);
    CHECK(header == "id,x_1");
}
