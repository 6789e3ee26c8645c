#pragma once

#include "genpool/mat.hpp"

namespace genpool {

/// Exponent of the pooling function f_α(x) = x^γ with γ = (1−α)/2, or ln x
/// when α = 1. α = −∞ / +∞ select the max / min limits.
///
///   α = −∞  max        γ = +∞
///   α = −3  RMS        γ = 2
///   α = −1  arithmetic γ = 1
///   α =  1  geometric  (log branch)
///   α =  3  harmonic   γ = −1
///   α = +∞  min        γ = −∞
class AlphaParam {
public:
    static AlphaParam from_alpha(double alpha);
    static AlphaParam from_gamma(double gamma);
    static AlphaParam arithmetic() { return from_alpha(-1.0); }
    static AlphaParam maximum();
    static AlphaParam minimum();

    double alpha() const noexcept { return alpha_; }
    double gamma() const noexcept { return gamma_; }
    bool is_log() const noexcept { return log_; }
    bool is_max() const noexcept;
    bool is_min() const noexcept;

private:
    AlphaParam(double alpha, double gamma, bool log)
        : alpha_(alpha), gamma_(gamma), log_(log) {}

    double alpha_;
    double gamma_;
    bool log_;
};

/// Values below this are clamped before a negative or logarithmic power.
inline constexpr double kPowerFloor = 1e-12;

double f_alpha(double x, const AlphaParam& alpha);
double f_alpha_inv(double y, const AlphaParam& alpha);

/// Z = f_α⁻¹(f_α(V)·A) for V (d×p) ≥ 0 and A (p×k). Rows are rescaled by
/// their extreme value before powering so large |γ| cannot overflow. The
/// max/min limits take the extreme over the support {j : A_jc > 0}.
Mat weighted_generalized_mean(const Mat& v, const Mat& a, const AlphaParam& alpha);

/// Power mean with uniform weights and a large exponent: approaches the row
/// max (sign > 0) or min (sign < 0) monotonically as gamma_large grows.
Mat approx_extreme(const Mat& v, double gamma_large, int sign);

/// (1/r)·ln(exp(r·V)·a), stabilized by the row maximum of r·V.
Mat lse_pool(const Mat& v, const Mat& a, double r);

} // namespace genpool
