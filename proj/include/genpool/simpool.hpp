#pragma once

#include "genpool/framework.hpp"
#include "genpool/pooling.hpp"

#include <cstdint>

namespace genpool {

struct SimPoolParams {
    Mat w_q;              ///< d×d
    Mat w_k;              ///< d×d
    double gamma = 2.0;   ///< power-mean exponent, in (0, 100]
    double ln_eps = 1e-5;
    bool layernorm = true; ///< LayerNorm on keys and values

    /// Scaled-normal W_q and W_k (stddev 1/√d).
    static SimPoolParams seeded(std::size_t d, double gamma, std::uint64_t seed);
};

/// Everything the backward pass needs.
struct SimPoolCache {
    SimPoolParams params;
    Mat x;       ///< raw input, d×p
    Mat u0;      ///< GAP of the raw input
    Mat xn;      ///< X′: LayerNorm(X) or X
    Mat q;       ///< W_q·u0
    Mat keys;    ///< W_k·X′
    Mat logits;  ///< K⊤q, p×1
    Mat a;       ///< softmax(logits/√d), p×1
    Mat v;       ///< X′ − min X′
    std::size_t argmin = 0; ///< flat row-major index of min X′, first occurrence
    Mat u;       ///< output, d×1
};

struct SimPoolResult {
    Mat u;
    Mat a;
    SimPoolCache cache;
};

struct SimPoolGrads {
    Mat dw_q;
    Mat dw_k;
    Mat dx;
};

/// u0 = X·1/p, X′ = LN(X), q = W_q·u0, K = W_k·X′, a = σ₂(K⊤q/√d),
/// V = X′ − min X′, u = (Σ_j a_j V_j^γ)^{1/γ}.
SimPoolResult simpool_forward(const FeatureMap& fm, const SimPoolParams& params);

/// Reverse-mode gradients of ⟨du, u⟩ with respect to W_q, W_k and X. The
/// global-minimum shift sends its gradient to the single argmin entry.
SimPoolGrads simpool_backward(const SimPoolCache& cache, const Mat& du);

/// The same forward pass expressed as an engine instance.
PoolingSpec simpool_spec(const SimPoolParams& params);

} // namespace genpool
