#pragma once

#include "genpool/framework.hpp"
#include "genpool/layers.hpp"
#include "genpool/pooling.hpp"
#include "genpool/sinkhorn.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace genpool {

// ----------------------------------------------------------------- OTK ----

/// Gaussian-kernel Nyström map ψ(x) = M^{−1/2}·κ(anchors, x) with
/// κ(a, b) = exp(−‖a − b‖² / (2σ²)) and M = κ(anchors, anchors). Eigenvalues
/// of M are floored at 1e-10. Output is k×p.
Mat nystrom_embedding(const Mat& x, const Mat& anchors, double sigma);

/// Optimal-transport pooling against k anchors: cost ‖x_i − u_j‖², plan by
/// Sinkhorn, output ψ(X)·P·k so each column is the mean of its transported
/// mass. ψ is the identity unless nystrom_sigma is set.
PooledSet otk_pool(const FeatureMap& fm, const Mat& anchors, const SinkhornParams& params,
                   std::optional<double> nystrom_sigma = std::nullopt);

PoolingSpec otk_spec(const Mat& anchors, const SinkhornParams& params);

// ------------------------------------------------------------- k-means ----

/// Σ_i min_j ‖x_i − u_j‖².
double kmeans_distortion(const Mat& x, const Mat& u);

/// Hard assignment η₂(argmax₁(−D)) of the columns of x to the nearest
/// column of u (ties to the lowest index). Columns of empty clusters are 0.
Mat kmeans_assignment(const Mat& x, const Mat& u);

/// One Lloyd step in matrix form U ← X·η₂(argmax₁(−D)); empty clusters keep
/// their previous centroid.
Mat lloyd_step(const Mat& x, const Mat& u);

/// `iters` Lloyd steps from k distinct columns sampled with `seed`.
PooledSet kmeans_pool(const FeatureMap& fm, std::size_t k, std::size_t iters, std::uint64_t seed);
/// Same, from explicitly chosen initial columns.
PooledSet kmeans_pool(const FeatureMap& fm, const std::vector<std::size_t>& init_columns,
                      std::size_t iters);

PoolingSpec kmeans_spec(std::size_t k, std::size_t iters, std::uint64_t seed);

// ---------------------------------------------------------------- Slot ----

struct SlotWeights {
    Mat w_q; ///< n×d′
    Mat w_k; ///< n×d
    Mat w_v; ///< n×d
    GruCell gru; ///< input n, state d′
    Mlp mlp;     ///< d′ → d′ → d′
    Mat mu;      ///< d′×1
    Mat sigma;   ///< d′×1
    double ln_eps = 1e-5;

    std::size_t slot_dim() const { return mu.rows(); }
    std::size_t common_dim() const { return w_q.rows(); }

    /// n = d′ = d, scaled-normal matrices, mu = 0, sigma = 1.
    static SlotWeights seeded(std::size_t d, std::uint64_t seed);
};

/// Slot attention. Full mode: Q = W_q·LN(U), K = W_k·LN(X), V = W_v·LN(X),
/// A = η₁(σ₂(K⊤Q/√n)), Z = V·A, U ← G + MLP(LN(G)) with G = GRU(Z, U).
/// Simplified mode drops LayerNorm and η₁ and sets U ← Z.
PooledSet slot_pool(const FeatureMap& fm, std::size_t k, std::size_t iters,
                    const SlotWeights& weights, std::uint64_t seed, bool simplified);

PoolingSpec slot_spec(std::size_t k, std::size_t iters, const SlotWeights& weights,
                      std::uint64_t seed, bool simplified);

} // namespace genpool
