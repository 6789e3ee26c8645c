#include "genpool/errors.hpp"
#include "genpool/meanfam.hpp"
#include "genpool/rng.hpp"
#include "genpool/simple_poolers.hpp"
#include "genpool/spatial.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace genpool;
using testutil::col;
using testutil::max_abs_diff;

TEST_SUITE("simple_poolers") {

TEST_CASE("gap") {
    CHECK(gap(FeatureMap(Mat{{1, 3}, {5, 7}})) == col({2, 6}));
    CHECK(gap(FeatureMap(col({4, -1}))) == col({4, -1}));
    CHECK(gap(FeatureMap(Mat{{3, 1}, {7, 5}})) == col({2, 6}));
}

TEST_CASE("max_pool") {
    CHECK(max_pool(FeatureMap(Mat{{1, 4}})) == col({4}));
    CHECK(max_pool(FeatureMap(Mat{{2, 2}, {5, 5}})) == col({2, 5}));
    const Mat x{{0.3, 2.0, 1.1}};
    CHECK(std::abs(approx_extreme(x, 200, 1)[0] - max_pool(FeatureMap(x))[0]) <= 0.01 * 2.0);
}

TEST_CASE("gem") {
    Rng rng(1);
    const FeatureMap fm(rng.uniform_mat(3, 5, 0, 2));
    CHECK(gem(fm, 1.0) == gap(fm));
    CHECK(gem(FeatureMap(Mat{{1, 4}}), 2.0)[0] == doctest::Approx(2.915476).epsilon(1e-6));
    const Mat mx = max_pool(fm);
    const Mat g200 = gem(fm, 200);
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(g200[i] - mx[i]) <= 0.01 * mx[i]);
    Mat prev = gem(fm, 0.5);
    for (double g : {1.0, 2.0, 5.0, 20.0}) {
        const Mat cur = gem(fm, g);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(cur[i] >= prev[i] - 1e-12);
            CHECK(cur[i] <= mx[i] + 1e-12);
        }
        prev = cur;
    }
    CHECK_THROWS_AS(gem(fm, 0.0), ConfigError);
    CHECK_THROWS_AS(gem(FeatureMap(Mat{{-1, 1}}), 2.0), ContractError);
}

TEST_CASE("lse") {
    CHECK(lse(FeatureMap(Mat{{0, std::log(3.0)}}), 1.0)[0] == doctest::Approx(std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("avg3 averages in-bounds neighbours") {
    CHECK(avg3(Mat{{1, 2}}, 2, 1) == Mat{{1.5, 1.5}});
    CHECK(avg3(Mat{{5}}, 1, 1) == Mat{{5}});
    // 3×3 grid: the centre averages all nine cells, a corner its four.
    Mat x(1, 9);
    for (std::size_t j = 0; j < 9; ++j) x[j] = static_cast<double>(j);
    const Mat y = avg3(x, 3, 3);
    CHECK(y[4] == doctest::Approx(4.0));
    CHECK(y[0] == doctest::Approx((0 + 1 + 3 + 4) / 4.0));
}

TEST_CASE("how") {
    const Mat x = col({3, 4});
    CHECK(max_abs_diff(how(FeatureMap(x, 1, 1), HowConfig::identity(2)), col({0.6, 0.8})) <= 1e-15);
    CHECK(how(FeatureMap(Mat{{1, 2}}, 2, 1), HowConfig::identity(1))[0] == doctest::Approx(1.0));
    Rng rng(2);
    for (int t = 0; t < 20; ++t) {
        const FeatureMap fm(rng.normal_mat(4, 6), 3, 2);
        CHECK(std::abs(frobenius(how(fm, HowConfig::identity(4))) - 1) <= 1e-12);
    }
    HowConfig cfg = HowConfig::identity(1);
    cfg.centering = col({1});
    CHECK_THROWS_AS(how(FeatureMap(Mat{{1, 1}}, 2, 1), cfg), DegenerateError);
}

TEST_CASE("engine instantiations equal the direct implementations") {
    Rng rng(3);
    for (int t = 0; t < 100; ++t) {
        const std::size_t d = 1 + rng.index(5);
        const std::size_t w = 1 + rng.index(4), h = 1 + rng.index(3);
        const FeatureMap fm(rng.uniform_mat(d, w * h, 0, 3), w, h);
        CHECK(max_abs_diff(run_pooling(gap_spec(fm.p()), fm).u, gap(fm)) <= 1e-12);
        CHECK(max_abs_diff(run_pooling(max_spec(fm.p()), fm).u, max_pool(fm)) <= 1e-12);
        CHECK(max_abs_diff(run_pooling(gem_spec(fm.p(), 3.0), fm).u, gem(fm, 3.0)) <= 1e-12);
        CHECK(max_abs_diff(run_pooling(lse_spec(fm.p(), 2.0), fm).u, lse(fm, 2.0)) <= 1e-12);
        const HowConfig cfg = HowConfig::identity(d);
        CHECK(max_abs_diff(run_pooling(how_spec(cfg), fm).u, how(fm, cfg)) <= 1e-12);
    }
}

} // TEST_SUITE
