// Copyright (c) 2026 The lorahull authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <random>

#include "lorahull/compose.hpp"
#include "lorahull/diagnostics.hpp"
#include "lorahull/matrix.hpp"
#include "lorahull/sweep.hpp"
#include "lorahull/synthetic.hpp"

namespace {

using namespace lorahull;

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
    Matrix m(rows, cols);
    for (float& v : m.storage()) v = dist(rng);
    return m;
}

AnchorSet random_set(std::size_t n_attributes, std::size_t d, std::size_t rank) {
    AnchorSet set;
    std::uint32_t seed = 1;
    for (std::size_t i = 0; i < n_attributes; ++i) {
        AnchorPair pair;
        pair.attribute = "attr" + std::to_string(i);
        pair.minus = Adapter(pair.attribute + "_minus");
        pair.plus = Adapter(pair.attribute + "_plus");
        for (std::size_t l = 0; l < 4; ++l) {
            const std::string name = "layers." + std::to_string(l);
            pair.minus.add_layer(
                AdapterLayer{name, random_matrix(d, rank, seed++), random_matrix(rank, d, seed++), 1.0f});
            pair.plus.add_layer(
                AdapterLayer{name, random_matrix(d, rank, seed++), random_matrix(rank, d, seed++), 1.0f});
        }
        set.pairs.push_back(std::move(pair));
    }
    return set;
}

void BM_matmul(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const Matrix a = random_matrix(n, n, 11);
    const Matrix b = random_matrix(n, n, 12);
    for (auto _ : state) {
        benchmark::DoNotOptimize(matmul(a, b));
    }
}
BENCHMARK(BM_matmul)->Arg(32)->Arg(64)->Arg(128);

void BM_compose_to_dense(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const AnchorSet set = random_set(n, 64, 4);
    MixSpec spec{std::vector<float>(n, 0.5f), std::vector<float>(n, 0.0f)};
    for (std::size_t i = 0; i + 1 < n; ++i) spec.lambda[i] = 1.0f / static_cast<float>(n);
    float partial = 0.0f;
    for (std::size_t i = 0; i + 1 < n; ++i) partial += spec.lambda[i];
    spec.lambda[n - 1] = 1.0f - partial;
    for (auto _ : state) {
        benchmark::DoNotOptimize(to_dense(compose_multi(set, spec)));
    }
}
BENCHMARK(BM_compose_to_dense)->Arg(1)->Arg(5);

void BM_svd(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const Matrix m = random_matrix(n, n, 21);
    for (auto _ : state) {
        benchmark::DoNotOptimize(svd(m));
    }
}
BENCHMARK(BM_svd)->Arg(16)->Arg(64);

void BM_mds_embed(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    std::mt19937 rng(31);
    std::uniform_real_distribution<float> dist(-3.0f, 3.0f);
    std::vector<std::pair<float, float>> points(n);
    for (auto& p : points) p = {dist(rng), dist(rng)};
    SimilarityMatrix distances{{}, Matrix(n, n), {}};
    for (std::size_t i = 0; i < n; ++i) distances.labels.push_back("p" + std::to_string(i));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const float dx = points[i].first - points[j].first;
            const float dy = points[i].second - points[j].second;
            distances.values.at(i, j) = std::sqrt(dx * dx + dy * dy);
        }
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(mds_embed(distances, 2));
    }
}
BENCHMARK(BM_mds_embed)->Arg(16)->Arg(48);

void BM_simplex_plan(benchmark::State& state) {
    const std::size_t m = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(plan_simplex(3, {0, 1, 2}, m, 1.0f));
    }
}
BENCHMARK(BM_simplex_plan)->Arg(10)->Arg(30);

void BM_synthetic_gen(benchmark::State& state) {
    SyntheticSpec spec;
    for (auto _ : state) {
        benchmark::DoNotOptimize(gen_anchor_set(spec));
    }
}
BENCHMARK(BM_synthetic_gen);

}  // namespace

BENCHMARK_MAIN();
