#pragma once

#include "genpool/framework.hpp"
#include "genpool/layers.hpp"
#include "genpool/pooling.hpp"

#include <cstdint>
#include <vector>

namespace genpool {

/// g_m: split the rows of a (d×n) into m contiguous blocks of d/m rows.
std::vector<Mat> split_heads(const Mat& a, std::size_t m);
/// g_m⁻¹: stack the blocks back.
Mat merge_heads(const std::vector<Mat>& heads);

struct VitStageWeights {
    Mat w_q, w_k, w_v, w_u; ///< d×d
    Mlp mlp;                ///< d → d → d
};

struct VitWeights {
    /// One entry per iteration, or a single entry shared by all iterations.
    std::vector<VitStageWeights> stages;
    Mat u0; ///< initial cls vector, d×1
    double ln_eps = 1e-5;

    const VitStageWeights& at(std::size_t iter) const;

    static VitWeights seeded(std::size_t d, std::size_t iters, std::uint64_t seed);
};

struct ClassAttention {
    Mat z;       ///< merged pooled vector, d×1
    Mat per_head; ///< p×m, column i is head i's attention
};

/// Cross-attention of one query vector against patch keys/values, head by
/// head: a_i = σ₂(K_i⊤q_i/√d′), z_i = V_i·a_i.
ClassAttention class_attention_per_head(const Mat& q, const Mat& keys, const Mat& values, std::size_t m);
/// The same computed at once with the block-diagonal d×m query.
ClassAttention class_attention_block_diagonal(const Mat& q, const Mat& keys, const Mat& values,
                                              std::size_t m);

/// cls-token pooling stream with the patch stream held fixed. Simplified:
/// u ← MLP(W_u·z). Full: g = u + W_u·z, u ← g + MLP(LN(g)) with LayerNorm on
/// the query and key/value inputs. Attention is the mean over heads.
PooledSet vit_cls_pool(const FeatureMap& fm, const VitWeights& weights, std::size_t m,
                       std::size_t iters, bool simplified = true);

/// Class-attention stage: a few cross-attention iterations against fixed
/// patch features (simplified form).
PooledSet cait_class_attention(const FeatureMap& fm, const VitWeights& weights, std::size_t m,
                               std::size_t iters);

/// Simplified cls pooling as an engine instance.
PoolingSpec vit_spec(const VitWeights& weights, std::size_t m, std::size_t iters);

} // namespace genpool
