// Copyright (c) 2026 The lorahull authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lorahull/compose.hpp"
#include "lorahull/errors.hpp"
#include "oracles.hpp"

using namespace lorahull;
using oracles::Rng;

TEST_CASE("compose_single recovers the anchors exactly at the endpoints") {
    Rng rng(301);
    for (int trial = 0; trial < 5; ++trial) {
        const AnchorPair pair = rng.pair("attr", 3, 8, 3);
        const auto at0 = to_dense(compose_single(pair, 0.0f));
        const auto at1 = to_dense(compose_single(pair, 1.0f));
        for (const auto& [name, layer] : pair.minus.layers()) {
            CHECK(at0.at(name) == layer_delta(layer));
        }
        for (const auto& [name, layer] : pair.plus.layers()) {
            CHECK(at1.at(name) == layer_delta(layer));
        }
    }
}

TEST_CASE("compose_single midpoint example") {
    AnchorPair pair{"attr", Adapter("m"), Adapter("p")};
    pair.plus.add_layer(AdapterLayer{"l", Matrix{{1.0f}, {0.0f}}, Matrix{{1.0f, 0.0f}}, 1.0f});
    pair.minus.add_layer(AdapterLayer{"l", Matrix{{0.0f}, {1.0f}}, Matrix{{0.0f, 1.0f}}, 1.0f});

    const auto dense = to_dense(compose_single(pair, 0.5f));
    const Matrix expect{{0.5f, 0.0f}, {0.0f, 0.5f}};
    CHECK(dense.at("l") == expect);
}

TEST_CASE("compose_single respects stored scalings in its coefficients") {
    Rng rng(302);
    AnchorPair pair{"attr", rng.adapter("m", 2, 6, 2, 0.5f), rng.adapter("p", 2, 6, 2, 2.0f)};
    const CompositeAdapter c = compose_single(pair, 0.25f);
    for (const auto& layer : c.layers) {
        REQUIRE(layer.terms.size() == 2);
        CHECK(layer.terms[0].coefficient == doctest::Approx(0.25 * 2.0));
        CHECK(layer.terms[1].coefficient == doctest::Approx(0.75 * 0.5));
    }
}

TEST_CASE("compose_multi reduces to compose_single under a one-hot lambda") {
    Rng rng(303);
    for (int trial = 0; trial < 10; ++trial) {
        const AnchorSet set = rng.set(3);
        const std::size_t hot = rng.index(3);
        const float alpha = rng.uniform(-1.0f, 2.0f);

        MixSpec spec{{0.0f, 0.0f, 0.0f}, {0.0f, 0.0f, 0.0f}};
        spec.alpha[hot] = alpha;
        spec.lambda[hot] = 1.0f;

        const auto multi = to_dense(compose_multi(set, spec));
        const auto single = to_dense(compose_single(set.pairs[hot], alpha));
        for (const auto& [name, dense] : multi) {
            CHECK(dense == single.at(name));
        }
    }
}

TEST_CASE("compose_multi equals the densify-then-average oracle") {
    Rng rng(304);

    SUBCASE("two attributes at alpha 1") {
        const AnchorSet set = rng.set(2, 2, 8, 2);
        const auto dense =
            to_dense(compose_multi(set, MixSpec{{1.0f, 1.0f}, {0.5f, 0.5f}}));
        for (const auto& [name, got] : dense) {
            const auto d1 = oracles::layer_delta_ref(set.pairs[0].plus.layer(name));
            const auto d2 = oracles::layer_delta_ref(set.pairs[1].plus.layer(name));
            for (std::size_t i = 0; i < got.rows(); ++i) {
                for (std::size_t j = 0; j < got.cols(); ++j) {
                    CHECK(std::abs(got.at(i, j) - (0.5 * d1[i][j] + 0.5 * d2[i][j])) <= 1e-6);
                }
            }
        }
    }

    SUBCASE("five attributes at alpha 0 give the mean of the minus deltas") {
        const AnchorSet set = rng.set(5, 2, 8, 2);
        const MixSpec spec{std::vector<float>(5, 0.0f), std::vector<float>(5, 0.2f)};
        const auto dense = to_dense(compose_multi(set, spec));
        for (const auto& [name, got] : dense) {
            for (std::size_t i = 0; i < got.rows(); ++i) {
                for (std::size_t j = 0; j < got.cols(); ++j) {
                    double mean = 0.0;
                    for (const AnchorPair& pair : set.pairs) {
                        mean += 0.2 * oracles::layer_delta_ref(pair.minus.layer(name))[i][j];
                    }
                    CHECK(std::abs(got.at(i, j) - mean) <= 1e-6);
                }
            }
        }
    }
}

TEST_CASE("compose_multi validates lengths") {
    Rng rng(305);
    const AnchorSet set = rng.set(2);
    CHECK_THROWS_AS(compose_multi(set, MixSpec{{0.0f}, {1.0f}}), ValidationError);
}

TEST_CASE("to_dense on hand-built composites") {
    Rng rng(306);
    const Matrix b = rng.matrix(4, 2);
    const Matrix a = rng.matrix(2, 3);

    CompositeAdapter one{{CompositeLayer{"l", 4, 3, {CompositeTerm{1.0, b, a, "x"}}}}, {}};
    CHECK(to_dense(one).at("l") == matmul(b, a));

    CompositeAdapter avg{{CompositeLayer{"l", 4, 3,
                                         {CompositeTerm{0.5, b, a, "x"},
                                          CompositeTerm{0.5, b, a, "x"}}}},
                         {}};
    const auto got = to_dense(avg).at("l");
    CHECK(oracles::max_abs_diff(got, oracles::matmul_ref(b, a)) <= 1e-6);
}

TEST_CASE("to_dense matches the naive per-entry summation oracle") {
    Rng rng(307);
    CompositeAdapter c{{CompositeLayer{"l", 5, 4, {}}}, {}};
    for (int t = 0; t < 3; ++t) {
        c.layers[0].terms.push_back(CompositeTerm{
            static_cast<double>(rng.uniform(-2.0f, 2.0f)), rng.matrix(5, 2), rng.matrix(2, 4), ""});
    }
    const auto got = to_dense(c).at("l");
    const auto want = oracles::dense_ref(c).at("l");
    CHECK(oracles::max_abs_diff(got, want) <= 1e-6);
}

TEST_CASE("to_lowrank_concat round-trips a single unit term") {
    Rng rng(308);
    const Matrix b = rng.matrix(6, 2);
    const Matrix a = rng.matrix(2, 5);
    CompositeAdapter c{{CompositeLayer{"l", 6, 5, {CompositeTerm{1.0, b, a, "x"}}}}, {}};
    const Adapter exported = to_lowrank_concat(c);
    CHECK(exported.layer("l").b == b);
    CHECK(exported.layer("l").a == a);
    CHECK(exported.layer("l").scaling == 1.0f);
}

TEST_CASE("to_lowrank_concat drops zero-coefficient terms") {
    Rng rng(309);
    const AnchorPair pair = rng.pair("attr", 2, 8, 3);
    const Adapter exported = to_lowrank_concat(compose_single(pair, 0.0f));
    for (const auto& [name, layer] : exported.layers()) {
        (void)name;
        CHECK(layer.rank() == 3); // plus term dropped, minus rank survives
    }
}

TEST_CASE("to_lowrank_concat concatenates ranks and stays dense-equivalent") {
    Rng rng(310);
    const AnchorSet set = rng.set(2, 2, 12, 4);
    const CompositeAdapter c =
        compose_multi(set, MixSpec{{0.3f, 0.7f}, {0.25f, 0.75f}});
    const Adapter exported = to_lowrank_concat(c);
    const auto want = to_dense(c);
    for (const auto& [name, layer] : exported.layers()) {
        CHECK(layer.rank() == 16); // 4 terms x rank 4
        const Matrix got = layer_delta(layer);
        const Matrix& expect = want.at(name);
        for (std::size_t i = 0; i < got.rows(); ++i) {
            for (std::size_t j = 0; j < got.cols(); ++j) {
                CHECK(oracles::approx_rel(got.at(i, j), expect.at(i, j), 1e-5, 1e-6));
            }
        }
    }
}

TEST_CASE("recompress is lossless at or above the true rank") {
    Rng rng(311);
    const Adapter adapter = rng.adapter("a", 2, 8, 3);
    const Adapter squeezed = recompress(adapter, 8);
    for (const auto& [name, layer] : adapter.layers()) {
        CHECK(oracles::max_abs_diff(layer_delta(squeezed.layer(name)), layer_delta(layer)) <= 1e-4);
    }
}

TEST_CASE("recompress rank-1 truncation of a diagonal delta") {
    Adapter adapter("diag");
    adapter.add_layer(
        AdapterLayer{"l", Matrix{{3.0f, 0.0f}, {0.0f, 1.0f}}, Matrix::identity(2), 1.0f});
    const Adapter squeezed = recompress(adapter, 1);
    const Matrix got = layer_delta(squeezed.layer("l"));
    const Matrix expect{{3.0f, 0.0f}, {0.0f, 0.0f}};
    CHECK(oracles::max_abs_diff(got, expect) <= 1e-5);

    double err2 = 0.0;
    const Matrix original = layer_delta(adapter.layer("l"));
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            const double d = static_cast<double>(original.at(i, j)) - got.at(i, j);
            err2 += d * d;
        }
    }
    CHECK(std::sqrt(err2) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("recompress truncation error matches the SVD tail") {
    Rng rng(312);
    for (int trial = 0; trial < 5; ++trial) {
        const Adapter adapter = rng.adapter("a", 1, 12, 8);
        const std::size_t target = 4;
        const Adapter squeezed = recompress(adapter, target);
        for (const auto& [name, layer] : adapter.layers()) {
            const Matrix original = layer_delta(layer);
            const SvdResult r = svd(original);
            double tail = 0.0;
            for (std::size_t k = target; k < r.singular_values.size(); ++k) {
                tail += static_cast<double>(r.singular_values[k]) * r.singular_values[k];
            }
            const Matrix truncated = layer_delta(squeezed.layer(name));
            double err2 = 0.0;
            for (std::size_t i = 0; i < original.rows(); ++i) {
                for (std::size_t j = 0; j < original.cols(); ++j) {
                    const double d = static_cast<double>(original.at(i, j)) - truncated.at(i, j);
                    err2 += d * d;
                }
            }
            CHECK(std::abs(std::sqrt(err2) - std::sqrt(tail)) <= 1e-4);
        }
    }
}

// ---- algebraic properties ---------------------------------------------------

TEST_CASE("compose_single is affine in alpha (midpoint law)") {
    Rng rng(313);
    for (int trial = 0; trial < 20; ++trial) {
        const AnchorPair pair = rng.pair("attr", 2, 8, 2);
        const float a = rng.uniform(-2.0f, 3.0f);
        const float b = rng.uniform(-2.0f, 3.0f);
        const float mid = 0.5f * (a + b);

        const auto at_mid = to_dense(compose_single(pair, mid));
        const auto at_a = to_dense(compose_single(pair, a));
        const auto at_b = to_dense(compose_single(pair, b));
        for (const auto& [name, dense] : at_mid) {
            for (std::size_t i = 0; i < dense.rows(); ++i) {
                for (std::size_t j = 0; j < dense.cols(); ++j) {
                    const double mean =
                        0.5 * (static_cast<double>(at_a.at(name).at(i, j)) + at_b.at(name).at(i, j));
                    CHECK(oracles::approx_rel(dense.at(i, j), mean, 1e-6, 1e-7));
                }
            }
        }
    }
}

TEST_CASE("compose_multi entries stay inside the per-attribute envelope") {
    Rng rng(314);
    for (int trial = 0; trial < 10; ++trial) {
        const AnchorSet set = rng.set(3, 2, 6, 2);
        MixSpec spec;
        for (std::size_t i = 0; i < 3; ++i) spec.alpha.push_back(rng.uniform(0.0f, 1.0f));
        spec.lambda = rng.simplex(3);

        const auto combined = to_dense(compose_multi(set, spec));
        std::vector<std::map<std::string, Matrix>> singles;
        for (std::size_t i = 0; i < 3; ++i) {
            singles.push_back(to_dense(compose_single(set.pairs[i], spec.alpha[i])));
        }
        for (const auto& [name, dense] : combined) {
            for (std::size_t i = 0; i < dense.rows(); ++i) {
                for (std::size_t j = 0; j < dense.cols(); ++j) {
                    double lo = 1e300, hi = -1e300;
                    for (const auto& single : singles) {
                        const double v = single.at(name).at(i, j);
                        lo = std::min(lo, v);
                        hi = std::max(hi, v);
                    }
                    CHECK(dense.at(i, j) >= lo - 1e-6);
                    CHECK(dense.at(i, j) <= hi + 1e-6);
                }
            }
        }
    }
}

TEST_CASE("export equivalence holds for extrapolated composites") {
    Rng rng(315);
    for (int trial = 0; trial < 10; ++trial) {
        const AnchorSet set = rng.set(2, 2, 8, 3);
        const MixSpec spec{{rng.uniform(-2.0f, 3.0f), rng.uniform(-2.0f, 3.0f)}, rng.simplex(2)};
        const CompositeAdapter c = compose_multi(set, spec);
        const auto direct = to_dense(c);
        const Adapter exported = to_lowrank_concat(c);
        for (const auto& [name, want] : direct) {
            const Matrix got = layer_delta(exported.layer(name));
            for (std::size_t i = 0; i < want.rows(); ++i) {
                for (std::size_t j = 0; j < want.cols(); ++j) {
                    CHECK(oracles::approx_rel(got.at(i, j), want.at(i, j), 1e-5, 1e-6));
                }
            }
        }
    }
}

TEST_CASE("norm of the dense delta is convex along alpha") {
    Rng rng(316);
    for (int trial = 0; trial < 10; ++trial) {
        const AnchorPair pair = rng.pair("attr", 2, 8, 2);
        const float a = rng.uniform(-3.0f, 4.0f);
        const float b = rng.uniform(-3.0f, 4.0f);
        auto norm_at = [&](float alpha) {
            double acc = 0.0;
            for (const auto& [name, dense] : to_dense(compose_single(pair, alpha))) {
                (void)name;
                acc += frobenius_norm(dense);
            }
            return acc;
        };
        CHECK(norm_at(0.5f * (a + b)) <= 0.5 * (norm_at(a) + norm_at(b)) + 1e-6);
    }
}
