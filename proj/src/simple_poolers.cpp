#include "genpool/simple_poolers.hpp"

#include "genpool/errors.hpp"
#include "genpool/meanfam.hpp"
#include "genpool/spatial.hpp"

#include <algorithm>
#include <cmath>

namespace genpool {

Mat gap(const FeatureMap& fm) {
    const Mat& x = fm.x();
    Mat u(x.rows(), 1);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double s = 0;
        for (double v : x.row(i)) s += v;
        u[i] = s / static_cast<double>(x.cols());
    }
    return u;
}

Mat max_pool(const FeatureMap& fm) {
    const Mat& x = fm.x();
    Mat u(x.rows(), 1);
    for (std::size_t i = 0; i < x.rows(); ++i) u[i] = *std::max_element(x.row(i).begin(), x.row(i).end());
    return u;
}

Mat gem(const FeatureMap& fm, double gamma) {
    if (!std::isfinite(gamma) || gamma <= 0) throw ConfigError("gem: gamma must be positive and finite");
    if (gamma == 1.0) return gap(fm);
    const Mat& x = fm.x();
    const auto p = static_cast<double>(x.cols());
    Mat u(x.rows(), 1);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto row = x.row(i);
        if (*std::min_element(row.begin(), row.end()) < 0) {
            throw ContractError("gem: negative feature in row " + std::to_string(i));
        }
        const double m = *std::max_element(row.begin(), row.end());
        if (m == 0) {
            u[i] = 0;
            continue;
        }
        double s = 0;
        for (double v : row) s += std::pow(v / m, gamma);
        u[i] = m * std::pow(s / p, 1.0 / gamma);
    }
    return u;
}

Mat lse(const FeatureMap& fm, double r) {
    const Mat uniform(fm.p(), 1, 1.0 / static_cast<double>(fm.p()));
    return lse_pool(fm.x(), uniform, r);
}

HowConfig HowConfig::identity(std::size_t d) {
    return {Mat(d, 1), Mat::identity(d)};
}

Mat how(const FeatureMap& fm, const HowConfig& cfg) {
    const Mat& x = fm.x();
    if (cfg.projection.cols() != x.rows()) {
        throw ShapeError("how: projection " + cfg.projection.shape_str() + " does not take d=" +
                         std::to_string(x.rows()));
    }
    if (cfg.centering.rows() != x.rows() || cfg.centering.cols() != 1) {
        throw ShapeError("how: centering " + cfg.centering.shape_str() + " does not match d=" +
                         std::to_string(x.rows()));
    }
    Mat centered = x;
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) centered(i, j) -= cfg.centering[i];
    const Mat v = matmul(cfg.projection, avg3(centered, fm.width(), fm.height()));

    Mat z(v.rows(), 1);
    for (std::size_t j = 0; j < x.cols(); ++j) {
        double a = 0;
        for (std::size_t i = 0; i < x.rows(); ++i) a += x(i, j) * x(i, j);
        for (std::size_t i = 0; i < v.rows(); ++i) z[i] += v(i, j) * a;
    }
    const double n = frobenius(z);
    if (n == 0) throw DegenerateError("how: pooled vector has zero norm");
    return scale(z, 1.0 / n);
}

PoolingSpec gap_spec(std::size_t p) {
    PoolingSpec s;
    s.attention = AttnConstant{Mat(p, 1, 1.0 / static_cast<double>(p))};
    s.pool = AlphaParam::arithmetic();
    return s;
}

PoolingSpec max_spec(std::size_t p) {
    PoolingSpec s;
    s.attention = AttnConstant{Mat(p, 1, 1.0)};
    s.pool = AlphaParam::maximum();
    return s;
}

PoolingSpec gem_spec(std::size_t p, double gamma) {
    PoolingSpec s = gap_spec(p);
    s.pool = AlphaParam::from_gamma(gamma);
    return s;
}

PoolingSpec lse_spec(std::size_t p, double r) {
    PoolingSpec s = gap_spec(p);
    s.pool = PoolLse{r};
    return s;
}

PoolingSpec how_spec(const HowConfig& cfg) {
    PoolingSpec s;
    s.attention = AttnKeySqNorm{};
    s.pool = AlphaParam::arithmetic();
    Stage stage;
    stage.value = Avg3Project{cfg.centering, cfg.projection};
    stage.pool_update = UpdateL2Normalize{};
    s.stages = {stage};
    return s;
}

} // namespace genpool
