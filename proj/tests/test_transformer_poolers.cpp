#include "genpool/errors.hpp"
#include "genpool/rng.hpp"
#include "genpool/transformer_poolers.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace genpool;
using testutil::max_abs_diff;

namespace {

// Identity projections and an MLP that passes nonnegative inputs through.
VitWeights identity_weights(std::size_t d, const Mat& u0) {
    Mlp mlp = Mlp::zeros(d, d, d);
    mlp.w1 = Mat::identity(d);
    mlp.w2 = Mat::identity(d);
    const Mat i = Mat::identity(d);
    return {{VitStageWeights{i, i, i, i, mlp}}, u0, 1e-5};
}

} // namespace

TEST_SUITE("transformer_poolers") {

TEST_CASE("split and merge") {
    Rng rng(1);
    const Mat a = rng.normal_mat(8, 5);
    CHECK(split_heads(a, 1)[0] == a);
    const auto rows = split_heads(a, 8);
    CHECK(rows.size() == 8);
    CHECK(rows[3].rows() == 1);
    CHECK(rows[3](0, 2) == a(3, 2));
    CHECK(merge_heads(split_heads(a, 4)) == a);
    CHECK_THROWS_AS(split_heads(a, 3), ConfigError);
}

TEST_CASE("identical columns pool to that column") {
    const Mat c{{1.5}, {0.5}, {2}, {3}};
    Mat x(4, 5);
    for (std::size_t j = 0; j < 5; ++j) x.set_col(j, c);
    Rng rng(2);
    const PooledSet out = vit_cls_pool(FeatureMap(x), identity_weights(4, rng.normal_mat(4, 1)), 1, 1);
    CHECK(max_abs_diff(out.u, c) <= 1e-12);
}

TEST_CASE("per-head and block-diagonal routes agree") {
    Rng rng(3);
    for (std::size_t m : {1u, 2u, 4u}) {
        for (int t = 0; t < 50; ++t) {
            const Mat q = rng.normal_mat(8, 1), k = rng.normal_mat(8, 7), v = rng.normal_mat(8, 7);
            const ClassAttention a = class_attention_per_head(q, k, v, m);
            const ClassAttention b = class_attention_block_diagonal(q, k, v, m);
            CHECK(max_abs_diff(a.z, b.z) <= 1e-12);
            CHECK(max_abs_diff(a.per_head, b.per_head) <= 1e-12);
        }
    }
}

TEST_CASE("two iterations compose the one-step map") {
    Rng rng(4);
    const FeatureMap fm(rng.normal_mat(4, 6));
    VitWeights w = VitWeights::seeded(4, 1, 5);
    const PooledSet once = vit_cls_pool(fm, w, 2, 1);
    VitWeights again = w;
    again.u0 = once.u;
    const PooledSet composed = vit_cls_pool(fm, again, 2, 1);
    CHECK(max_abs_diff(vit_cls_pool(fm, w, 2, 2).u, composed.u) <= 1e-15);
}

TEST_CASE("cait") {
    Rng rng(5);
    const FeatureMap fm(rng.normal_mat(4, 6));
    const VitWeights w = VitWeights::seeded(4, 3, 6);
    CHECK(cait_class_attention(fm, w, 2, 1).u == vit_cls_pool(fm, w, 2, 1).u);
    const PooledSet out = cait_class_attention(fm, w, 2, 3);
    CHECK(out.attention->max_col_sum_error() <= 1e-9);

    const Mat c{{1}, {-2}, {0.5}, {3}};
    Mat x(4, 3);
    for (std::size_t j = 0; j < 3; ++j) x.set_col(j, c);
    const VitWeights s = VitWeights::seeded(4, 1, 7);
    const Mat expected = s.stages[0].mlp.apply(matmul(s.stages[0].w_u, matmul(s.stages[0].w_v, c)));
    CHECK(max_abs_diff(cait_class_attention(FeatureMap(x), s, 2, 1).u, expected) <= 1e-12);
}

TEST_CASE("engine instance equals the direct path") {
    Rng rng(6);
    for (int t = 0; t < 20; ++t) {
        const FeatureMap fm(rng.uniform_mat(8, 5, 0, 1));
        const VitWeights w = VitWeights::seeded(8, 2, static_cast<std::uint64_t>(t));
        for (std::size_t m : {1u, 2u, 4u}) {
            const PooledSet direct = vit_cls_pool(fm, w, m, 2);
            const PooledSet engine = run_pooling(vit_spec(w, m, 2), fm);
            CHECK(max_abs_diff(direct.u, engine.u) <= 1e-12);
            CHECK(max_abs_diff(direct.attention->a, engine.attention->a) <= 1e-12);
        }
    }
}

TEST_CASE("full mode runs and differs from the simplified one") {
    Rng rng(7);
    const FeatureMap fm(rng.normal_mat(4, 6));
    const VitWeights w = VitWeights::seeded(4, 2, 8);
    const PooledSet full = vit_cls_pool(fm, w, 2, 2, false);
    CHECK(full.u.rows() == 4);
    CHECK(max_abs_diff(full.u, vit_cls_pool(fm, w, 2, 2, true).u) > 1e-6);
}

TEST_CASE("errors") {
    const VitWeights w = VitWeights::seeded(4, 2, 1);
    CHECK_THROWS_AS(vit_cls_pool(FeatureMap(Mat(4, 3, 1.0)), w, 3, 1), ConfigError);
    CHECK_THROWS_AS(vit_cls_pool(FeatureMap(Mat(4, 3, 1.0)), w, 2, 3), ContractError);
    CHECK_THROWS_AS(vit_cls_pool(FeatureMap(Mat(6, 3, 1.0)), w, 2, 1), ShapeError);
}

} // TEST_SUITE
