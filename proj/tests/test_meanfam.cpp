#include "genpool/errors.hpp"
#include "genpool/meanfam.hpp"
#include "genpool/rng.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace genpool;

namespace {
const Mat kHalf{{0.5}, {0.5}};
double wgm(std::initializer_list<double> v, const AlphaParam& a) {
    Mat row(1, v.size());
    std::size_t i = 0;
    for (double x : v) row[i++] = x;
    return weighted_generalized_mean(row, Mat(v.size(), 1, 1.0 / static_cast<double>(v.size())), a)[0];
}
} // namespace

TEST_SUITE("meanfam") {

TEST_CASE("alpha and gamma correspondence") {
    CHECK(AlphaParam::from_alpha(-3).gamma() == 2);
    CHECK(AlphaParam::from_alpha(3).gamma() == -1);
    CHECK(AlphaParam::from_alpha(1).is_log());
    CHECK(AlphaParam::from_gamma(1.25).alpha() == doctest::Approx(-1.5));
    CHECK(AlphaParam::maximum().is_max());
    CHECK(AlphaParam::minimum().is_min());
    CHECK_THROWS_AS(AlphaParam::from_alpha(1 + 1e-12), ContractError);
}

TEST_CASE("named means") {
    CHECK(wgm({1, 3}, AlphaParam::from_alpha(-1)) == 2);
    CHECK(wgm({1, 4}, AlphaParam::from_alpha(-3)) == doctest::Approx(std::sqrt(8.5)).epsilon(1e-14));
    CHECK(wgm({1, 4}, AlphaParam::from_alpha(1)) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(wgm({1, 4}, AlphaParam::from_alpha(3)) == doctest::Approx(1.6).epsilon(1e-14));
    CHECK(wgm({1, 4, 2}, AlphaParam::maximum()) == 4);
    CHECK(wgm({1, 4, 2}, AlphaParam::minimum()) == 1);
}

TEST_CASE("negative values are rejected except for the arithmetic mean") {
    CHECK(wgm({-1, 3}, AlphaParam::arithmetic()) == 1);
    CHECK_THROWS_AS(wgm({-1, 3}, AlphaParam::from_gamma(2)), ContractError);
}

TEST_CASE("zeros are clamped for log and negative powers") {
    const double g = wgm({0, 4}, AlphaParam::from_alpha(1));
    CHECK(std::isfinite(g));
    CHECK(g == doctest::Approx(2e-6).epsilon(1e-9));
    CHECK(std::isfinite(wgm({0, 4}, AlphaParam::from_alpha(3))));
}

TEST_CASE("constant input gives the constant for every alpha") {
    for (double alpha : {-7.0, -3.0, -1.0, 0.0, 1.0, 3.0, 5.0}) {
        CHECK(wgm({2.5, 2.5, 2.5}, AlphaParam::from_alpha(alpha)) == doctest::Approx(2.5).epsilon(1e-10));
    }
}

TEST_CASE("power means are monotone in gamma") {
    Rng rng(8);
    for (int t = 0; t < 100; ++t) {
        const Mat v = rng.uniform_mat(1, 6, 0, 5);
        const Mat a = eta_norm(rng.uniform_mat(6, 1, 0.1, 1), Axis::Cols);
        double prev = -1;
        for (double g : {0.5, 1.0, 2.0, 5.0, 20.0}) {
            const double m = weighted_generalized_mean(v, a, AlphaParam::from_gamma(g))[0];
            CHECK(m >= prev - 1e-12);
            prev = m;
        }
    }
}

TEST_CASE("f_alpha round trip") {
    for (double alpha : {-3.0, -1.0, 0.0, 3.0, 1.0}) {
        const AlphaParam a = AlphaParam::from_alpha(alpha);
        for (double x : {1e-6, 1e-3, 0.5, 1.0, 7.0, 1e3, 1e6}) {
            CHECK(std::abs(f_alpha_inv(f_alpha(x, a), a) - x) <= 1e-12 * std::max(1.0, x));
        }
    }
}

TEST_CASE("approx_extreme") {
    const Mat v{{0.5, 2.0}};
    const double at50 = approx_extreme(v, 50, 1)[0];
    // The uniform power mean of [0.5, 2] is bounded by 2 * 0.5^(1/50), about 1.4% below the max.
    CHECK(at50 == doctest::Approx(2.0 * std::pow(0.5 * (1 + std::pow(0.25, 50)), 1.0 / 50)).epsilon(1e-14));
    CHECK(std::abs(approx_extreme(v, 200, 1)[0] - 2.0) <= 0.01 * 2.0);
    CHECK(approx_extreme(v, 20, 1)[0] <= at50);
    CHECK(at50 <= 2.0);
    CHECK(approx_extreme(Mat{{3, 3, 3}}, 80, 1)[0] == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(approx_extreme(Mat{{1, 1e308}}, 300, 1)[0] <= 1e308);
    CHECK_THROWS_AS(approx_extreme(v, 5, 1), ContractError);
}

TEST_CASE("lse_pool") {
    CHECK(lse_pool(Mat{{0, 0}}, kHalf, 1)[0] == 0);
    CHECK(lse_pool(Mat{{0, std::log(3.0)}}, kHalf, 1)[0] == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(std::abs(lse_pool(Mat{{1, 5}}, kHalf, 100)[0] - 5) <= 0.05);
    CHECK(std::isfinite(lse_pool(Mat{{1000, 0}}, kHalf, 10)[0]));
    CHECK_THROWS_AS(lse_pool(Mat{{1, 5}}, kHalf, 1e-10), ContractError);
}

} // TEST_SUITE
