#pragma once

#include "genpool/layers.hpp"
#include "genpool/mat.hpp"
#include "genpool/meanfam.hpp"
#include "genpool/pooling.hpp"
#include "genpool/sinkhorn.hpp"
#include "genpool/spatial.hpp"

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

namespace genpool {

enum class Similarity { Dot, NegSqEuclid, Cosine };

/// S(K, Q) (p×k) between the columns of K (n×p) and Q (n×k).
/// Cosine maps a zero column to similarity 0.
Mat pairwise_similarity(const Mat& k, const Mat& q, Similarity kind);

// ---------------------------------------------------------------------------
// Initialization of U⁰.

struct InitGap {};
struct InitFixed {
    Mat u;
};
/// k distinct columns of X drawn with the seeded generator.
struct InitSampleColumns {
    std::size_t k;
    std::uint64_t seed;
};
struct InitColumnsAt {
    std::vector<std::size_t> indices;
};
/// k columns drawn from N(mu, sigma²) per coordinate.
struct InitNormal {
    Mat mu;
    Mat sigma;
    std::size_t k;
    std::uint64_t seed;
};
using InitRule = std::variant<InitGap, InitFixed, InitSampleColumns, InitColumnsAt, InitNormal>;

Mat initialize(const InitRule& rule, const Mat& x);

// ---------------------------------------------------------------------------
// Column-wise mappings φ_Q, φ_K, φ_V, φ_X.

/// Optional LayerNorm, then optional linear map, then optional shift by the
/// global minimum. The default is the identity.
struct ColumnMap {
    bool layernorm = false;
    std::optional<Mat> weight;
    bool shift_min = false;
    double ln_eps = 1e-5;

    Mat apply(const Mat& x) const;
};

/// q = σ(MLP(u)).
struct SigmoidMlpQuery {
    Mlp mlp;
};

/// HOW value: projection · avg3(X − centering·1⊤).
struct Avg3Project {
    Mat centering;  ///< d×1
    Mat projection; ///< d′×d
};

/// V = diag(q)·X with q the current query (SE/CBAM channel re-weighting).
struct QueryGate {};

using QueryMap = std::variant<ColumnMap, SigmoidMlpQuery>;
using ValueMap = std::variant<ColumnMap, Avg3Project, QueryGate>;

// ---------------------------------------------------------------------------
// Attention functions h.

struct AttnSoftmax {
    double scale; ///< σ₂(S / scale)
};
/// Plan of exp(S/ε) with uniform marginals, rescaled by k so each column is
/// a distribution.
struct AttnSinkhorn {
    SinkhornParams params;
};
/// η₂(argmax₁(S)), ties to the lowest index. A cluster with no member keeps
/// its previous vector.
struct AttnHardArgmax {};
/// η₁(σ₂(S / scale)).
struct AttnRowThenCol {
    double scale;
};
/// σ(conv₇(S·in_scale))·out_scale on the spatial grid (k = 1).
struct AttnSigmoidConv {
    Conv7 conv;
    double in_scale = 1.0;
    double out_scale = 1.0;
};
struct AttnConstant {
    Mat a;
};
/// a_j = ‖k_j‖² (HOW).
struct AttnKeySqNorm {};

using AttentionRule = std::variant<AttnSoftmax, AttnSinkhorn, AttnHardArgmax, AttnRowThenCol,
                                   AttnSigmoidConv, AttnConstant, AttnKeySqNorm>;

// ---------------------------------------------------------------------------
// Pooling function f and output mapping φ_U.

struct PoolLse {
    double r;
};
using PoolFn = std::variant<AlphaParam, PoolLse>;

struct UpdateIdentity {};
struct UpdateL2Normalize {};
/// U ← MLP(W_u·Z).
struct UpdateProjectMlp {
    Mat w_u;
    Mlp mlp;
};
/// G = GRU(Z, U); U ← G + MLP(LN(G)).
struct UpdateGruMlp {
    GruCell gru;
    Mlp mlp;
    double ln_eps = 1e-5;
};
using PoolUpdate = std::variant<UpdateIdentity, UpdateL2Normalize, UpdateProjectMlp, UpdateGruMlp>;

struct Stage {
    QueryMap query = ColumnMap{};
    ColumnMap key;
    ValueMap value = ColumnMap{};
    ColumnMap feat_update;
    PoolUpdate pool_update = UpdateIdentity{};
};

/// One configurable pooling process: T iterations of
/// Q = φ_Q(U), K = φ_K(X), S = s(K, Q), A = h(S), V = φ_V(X),
/// Z = f⁻¹(f(V)·A), X ← φ_X(X), U ← φ_U(Z).
struct PoolingSpec {
    std::size_t k = 1;
    std::size_t iters = 1;
    /// Heads m > 1 (requires k = 1): the query is split into m row blocks
    /// laid out as a block-diagonal n×m matrix, the m pooled columns are
    /// merged back and the returned attention is the head mean.
    std::size_t heads = 1;
    InitRule init = InitGap{};
    Similarity similarity = Similarity::Dot;
    AttentionRule attention = AttnSoftmax{1.0};
    PoolFn pool = AlphaParam::arithmetic();
    /// Either one stage shared by all iterations or exactly `iters` stages.
    std::vector<Stage> stages{Stage{}};
};

PooledSet run_pooling(const PoolingSpec& spec, const FeatureMap& fm);

} // namespace genpool
