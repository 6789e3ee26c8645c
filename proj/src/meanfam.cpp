#include "genpool/meanfam.hpp"

#include "genpool/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace genpool {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_nonnegative(const Mat& v, const char* what) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] < 0) {
            throw ContractError(std::string(what) + ": negative value at (" +
                                std::to_string(i / v.cols()) + "," +
                                std::to_string(i % v.cols()) + ")");
        }
    }
}

} // namespace

AlphaParam AlphaParam::from_alpha(double alpha) {
    if (std::isnan(alpha)) throw ContractError("alpha is NaN");
    if (alpha == 1.0) return {1.0, 0.0, true};
    const double gamma = (1.0 - alpha) / 2.0;
    if (std::abs(gamma) < 1e-9) {
        throw ContractError("alpha too close to 1 outside the log branch (|gamma| < 1e-9)");
    }
    return {alpha, gamma, false};
}

AlphaParam AlphaParam::from_gamma(double gamma) {
    if (std::isnan(gamma)) throw ContractError("gamma is NaN");
    if (gamma == 0.0) return {1.0, 0.0, true};
    return from_alpha(1.0 - 2.0 * gamma);
}

AlphaParam AlphaParam::maximum() { return {-kInf, kInf, false}; }
AlphaParam AlphaParam::minimum() { return {kInf, -kInf, false}; }

bool AlphaParam::is_max() const noexcept { return gamma_ == kInf; }
bool AlphaParam::is_min() const noexcept { return gamma_ == -kInf; }

double f_alpha(double x, const AlphaParam& alpha) {
    if (alpha.is_max() || alpha.is_min()) throw ContractError("f_alpha: infinite alpha has no pointwise form");
    if (alpha.is_log()) return std::log(std::max(x, kPowerFloor));
    if (alpha.gamma() < 0) return std::pow(std::max(x, kPowerFloor), alpha.gamma());
    return std::pow(x, alpha.gamma());
}

double f_alpha_inv(double y, const AlphaParam& alpha) {
    if (alpha.is_max() || alpha.is_min()) throw ContractError("f_alpha_inv: infinite alpha has no pointwise form");
    if (alpha.is_log()) return std::exp(y);
    return std::pow(y, 1.0 / alpha.gamma());
}

Mat weighted_generalized_mean(const Mat& v, const Mat& a, const AlphaParam& alpha) {
    if (v.cols() != a.rows()) {
        throw ShapeError("weighted_generalized_mean: value " + v.shape_str() +
                         " incompatible with attention " + a.shape_str());
    }
    const double gamma = alpha.gamma();
    // γ = 1 is the plain linear combination; it accepts any sign.
    if (!alpha.is_log() && gamma == 1.0) return matmul(v, a);

    require_nonnegative(v, "weighted_generalized_mean");
    const std::size_t d = v.rows();
    const std::size_t p = v.cols();
    const std::size_t k = a.cols();
    Mat z(d, k);

    if (alpha.is_max() || alpha.is_min()) {
        for (std::size_t c = 0; c < k; ++c) {
            for (std::size_t i = 0; i < d; ++i) {
                bool any = false;
                double best = 0;
                for (std::size_t j = 0; j < p; ++j) {
                    if (!(a(j, c) > 0)) continue;
                    const double x = v(i, j);
                    if (!any || (alpha.is_max() ? x > best : x < best)) best = x;
                    any = true;
                }
                if (!any) throw DegenerateError("weighted_generalized_mean: attention column " +
                                                std::to_string(c) + " has empty support");
                z(i, c) = best;
            }
        }
        return z;
    }

    if (alpha.is_log()) {
        for (std::size_t c = 0; c < k; ++c)
            for (std::size_t i = 0; i < d; ++i) {
                double s = 0;
                for (std::size_t j = 0; j < p; ++j) s += std::log(std::max(v(i, j), kPowerFloor)) * a(j, c);
                z(i, c) = std::exp(s);
            }
        require_finite(z, "weighted_generalized_mean");
        return z;
    }

    for (std::size_t i = 0; i < d; ++i) {
        // Factor out the row extreme: max for γ > 0, (clamped) min for γ < 0,
        // so every ratio raised to γ lies in [0, 1].
        double ref;
        if (gamma > 0) {
            ref = *std::max_element(v.row(i).begin(), v.row(i).end());
        } else {
            ref = std::max(*std::min_element(v.row(i).begin(), v.row(i).end()), kPowerFloor);
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (ref == 0.0) {
                z(i, c) = 0.0;
                continue;
            }
            double s = 0;
            for (std::size_t j = 0; j < p; ++j) {
                const double x = gamma > 0 ? v(i, j) : std::max(v(i, j), kPowerFloor);
                s += std::pow(x / ref, gamma) * a(j, c);
            }
            z(i, c) = ref * std::pow(s, 1.0 / gamma);
        }
    }
    require_finite(z, "weighted_generalized_mean");
    return z;
}

Mat approx_extreme(const Mat& v, double gamma_large, int sign) {
    if (!(gamma_large >= 10)) throw ContractError("approx_extreme: gamma_large must be >= 10");
    if (sign == 0) throw ContractError("approx_extreme: sign must be nonzero");
    const Mat uniform(v.cols(), 1, 1.0 / static_cast<double>(v.cols()));
    return weighted_generalized_mean(v, uniform,
                                     AlphaParam::from_gamma(sign > 0 ? gamma_large : -gamma_large));
}

Mat lse_pool(const Mat& v, const Mat& a, double r) {
    if (!(std::abs(r) >= 1e-9)) throw ContractError("lse_pool: |r| must be at least 1e-9");
    if (v.cols() != a.rows()) {
        throw ShapeError("lse_pool: value " + v.shape_str() + " incompatible with attention " +
                         a.shape_str());
    }
    Mat z(v.rows(), a.cols());
    for (std::size_t c = 0; c < a.cols(); ++c) {
        for (std::size_t i = 0; i < v.rows(); ++i) {
            double m = r * v(i, 0);
            for (std::size_t j = 1; j < v.cols(); ++j) m = std::max(m, r * v(i, j));
            double s = 0;
            for (std::size_t j = 0; j < v.cols(); ++j) s += std::exp(r * v(i, j) - m) * a(j, c);
            if (!(s > 0)) throw DegenerateError("lse_pool: attention column has zero mass");
            z(i, c) = (m + std::log(s)) / r;
        }
    }
    require_finite(z, "lse_pool");
    return z;
}

} // namespace genpool
