#pragma once

#include "genpool/framework.hpp"
#include "genpool/pooling.hpp"

namespace genpool {

// Attention-free poolers with k = 1, written directly (without the generic
// engine). Each returns a d×1 (or d′×1) column.

Mat gap(const FeatureMap& fm);
Mat max_pool(const FeatureMap& fm);
/// Power mean (X^γ·1/p)^(1/γ) per row; requires X ≥ 0 unless γ = 1.
Mat gem(const FeatureMap& fm, double gamma);
Mat lse(const FeatureMap& fm, double r);

struct HowConfig {
    Mat centering;  ///< d×1, zeros by default
    Mat projection; ///< d′×d, identity by default

    static HowConfig identity(std::size_t d);
};

/// HOW: attention a_j = ‖x_j‖² from raw X, value projection·avg3(X − c),
/// output ℓ2-normalized V·a.
Mat how(const FeatureMap& fm, const HowConfig& cfg);

// The same poolers as instances of the generic engine.
PoolingSpec gap_spec(std::size_t p);
PoolingSpec max_spec(std::size_t p);
PoolingSpec gem_spec(std::size_t p, double gamma);
PoolingSpec lse_spec(std::size_t p, double r);
PoolingSpec how_spec(const HowConfig& cfg);

} // namespace genpool
