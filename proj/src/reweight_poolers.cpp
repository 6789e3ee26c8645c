#include "genpool/reweight_poolers.hpp"

#include "genpool/errors.hpp"
#include "genpool/rng.hpp"
#include "genpool/simple_poolers.hpp"

#include <algorithm>
#include <cmath>

namespace genpool {

namespace {

void check_gate(const SeWeights& w, std::size_t d) {
    if (w.reduction < 1 || d % w.reduction != 0) {
        throw ConfigError("channel gate: d=" + std::to_string(d) + " is not divisible by r=" +
                          std::to_string(w.reduction));
    }
    if (w.mlp.in_dim() != d || w.mlp.out_dim() != d) {
        throw ShapeError("channel gate: MLP maps " + std::to_string(w.mlp.in_dim()) + " -> " +
                         std::to_string(w.mlp.out_dim()) + ", expected d=" + std::to_string(d));
    }
}

} // namespace

SeWeights SeWeights::seeded(std::size_t d, std::size_t reduction, std::uint64_t seed) {
    if (reduction < 1 || d % reduction != 0) {
        throw ConfigError("SE: d=" + std::to_string(d) + " is not divisible by r=" + std::to_string(reduction));
    }
    Rng rng = Rng::for_role(seed, "gate_mlp");
    return {Mlp::seeded(d, d / reduction, d, rng), reduction};
}

CbamWeights CbamWeights::seeded(std::size_t d, std::size_t reduction, std::uint64_t seed) {
    Rng rng = Rng::for_role(seed, "conv7");
    Conv7 conv = Conv7::zeros(2);
    for (Mat& k : conv.kernel) k = rng.normal_mat(7, 7, 1.0 / std::sqrt(98.0));
    return {SeWeights::seeded(d, reduction, seed), std::move(conv)};
}

PooledSet se_pool(const FeatureMap& fm, const SeWeights& w) {
    check_gate(w, fm.d());
    const Mat u0 = gap(fm);
    const Mat q = sigmoid(w.mlp.apply(u0));
    return {hadamard(q, u0), AttentionMatrix{Mat(fm.p(), 1, 1.0 / static_cast<double>(fm.p())), true}};
}

PooledSet cbam_pool(const FeatureMap& fm, const CbamWeights& w, bool simplified) {
    check_gate(w.channel, fm.d());
    const Mat& x = fm.x();
    const std::size_t d = fm.d();
    const std::size_t p = fm.p();

    Mat q(d, 1);
    Mat s(p, simplified ? 1 : 2);
    if (simplified) {
        q = sigmoid(w.channel.mlp.apply(gap(fm)));
        s = scale(matmul(transpose(x), q), 1.0 / static_cast<double>(d));
    } else {
        Mat u0(d, 2);
        u0.set_col(0, gap(fm));
        u0.set_col(1, max_pool(fm));
        q = sigmoid(row_mean(w.channel.mlp.apply(u0)));
        const Mat v = diag_left(q, x);
        for (std::size_t j = 0; j < p; ++j) {
            double mean = 0;
            double mx = v(0, j);
            for (std::size_t i = 0; i < d; ++i) {
                mean += v(i, j);
                mx = std::max(mx, v(i, j));
            }
            s(j, 0) = mean / static_cast<double>(d);
            s(j, 1) = mx;
        }
    }
    const Mat v = diag_left(q, x);
    const Mat a = scale(sigmoid(w.spatial.apply(s, fm.width(), fm.height())), 1.0 / static_cast<double>(p));
    return {matmul(v, a), AttentionMatrix{a, false}};
}

PoolingSpec se_spec(std::size_t p, const SeWeights& w) {
    PoolingSpec s;
    s.attention = AttnConstant{Mat(p, 1, 1.0 / static_cast<double>(p))};
    Stage stage;
    stage.query = SigmoidMlpQuery{w.mlp};
    stage.value = QueryGate{};
    s.stages = {stage};
    return s;
}

PoolingSpec cbam_simplified_spec(std::size_t d, std::size_t p, const CbamWeights& w) {
    PoolingSpec s;
    s.attention = AttnSigmoidConv{w.spatial, 1.0 / static_cast<double>(d), 1.0 / static_cast<double>(p)};
    Stage stage;
    stage.query = SigmoidMlpQuery{w.channel.mlp};
    stage.value = QueryGate{};
    s.stages = {stage};
    return s;
}

} // namespace genpool
