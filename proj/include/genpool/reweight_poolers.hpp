#pragma once

#include "genpool/framework.hpp"
#include "genpool/layers.hpp"
#include "genpool/pooling.hpp"
#include "genpool/spatial.hpp"

#include <cstdint>

namespace genpool {

/// Channel gate MLP d → d/r → d (two affine layers, ReLU in between).
struct SeWeights {
    Mlp mlp;
    std::size_t reduction = 4;

    static SeWeights seeded(std::size_t d, std::size_t reduction, std::uint64_t seed);
};

struct CbamWeights {
    SeWeights channel;
    Conv7 spatial; ///< 2 input channels: channel-mean map, channel-max map

    static CbamWeights seeded(std::size_t d, std::size_t reduction, std::uint64_t seed);
};

/// Squeeze-excitation followed by GAP: q = σ(MLP(gap(X))), z = q ⊙ gap(X).
/// Attention is the uniform 1/p column.
PooledSet se_pool(const FeatureMap& fm, const SeWeights& w);

/// CBAM followed by GAP, z = V·a/p with V = diag(q)·X. Full mode gates on
/// [mean, max] pooled statistics; simplified mode keeps the mean branch
/// only, where the spatial input is X⊤q/d. The returned attention is a/p.
PooledSet cbam_pool(const FeatureMap& fm, const CbamWeights& w, bool simplified);

PoolingSpec se_spec(std::size_t p, const SeWeights& w);
/// Simplified CBAM as an engine instance (the grid comes from the feature map).
PoolingSpec cbam_simplified_spec(std::size_t d, std::size_t p, const CbamWeights& w);

} // namespace genpool
