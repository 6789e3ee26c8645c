#include "genpool/transformer_poolers.hpp"

#include "genpool/errors.hpp"
#include "genpool/rng.hpp"

#include <cmath>

namespace genpool {

namespace {

void check_heads(std::size_t d, std::size_t m) {
    if (m < 1 || d % m != 0) {
        throw ConfigError("heads: d=" + std::to_string(d) + " is not divisible by m=" + std::to_string(m));
    }
}

} // namespace

std::vector<Mat> split_heads(const Mat& a, std::size_t m) {
    check_heads(a.rows(), m);
    const std::size_t dh = a.rows() / m;
    std::vector<Mat> out;
    out.reserve(m);
    for (std::size_t h = 0; h < m; ++h) {
        Mat block(dh, a.cols());
        for (std::size_t r = 0; r < dh; ++r)
            for (std::size_t c = 0; c < a.cols(); ++c) block(r, c) = a(h * dh + r, c);
        out.push_back(std::move(block));
    }
    return out;
}

Mat merge_heads(const std::vector<Mat>& heads) {
    if (heads.empty()) throw ContractError("merge_heads: no heads");
    const std::size_t dh = heads.front().rows();
    const std::size_t n = heads.front().cols();
    Mat out(dh * heads.size(), n);
    for (std::size_t h = 0; h < heads.size(); ++h) {
        if (heads[h].rows() != dh || heads[h].cols() != n) {
            throw ShapeError("merge_heads: head " + std::to_string(h) + " is " + heads[h].shape_str() +
                             ", expected " + heads.front().shape_str());
        }
        for (std::size_t r = 0; r < dh; ++r)
            for (std::size_t c = 0; c < n; ++c) out(h * dh + r, c) = heads[h](r, c);
    }
    return out;
}

const VitStageWeights& VitWeights::at(std::size_t iter) const {
    if (stages.empty()) throw ContractError("vit: no stage weights");
    return stages[stages.size() == 1 ? 0 : iter];
}

VitWeights VitWeights::seeded(std::size_t d, std::size_t iters, std::uint64_t seed) {
    const double sd = 1.0 / std::sqrt(static_cast<double>(d));
    VitWeights w;
    for (std::size_t t = 0; t < iters; ++t) {
        const std::string tag = "vit_stage_" + std::to_string(t);
        Rng rq = Rng::for_role(seed, tag + "_w_q");
        Rng rk = Rng::for_role(seed, tag + "_w_k");
        Rng rv = Rng::for_role(seed, tag + "_w_v");
        Rng ru = Rng::for_role(seed, tag + "_w_u");
        Rng rm = Rng::for_role(seed, tag + "_mlp");
        w.stages.push_back({rq.normal_mat(d, d, sd), rk.normal_mat(d, d, sd), rv.normal_mat(d, d, sd),
                            ru.normal_mat(d, d, sd), Mlp::seeded(d, d, d, rm)});
    }
    Rng r0 = Rng::for_role(seed, "vit_u0");
    w.u0 = r0.normal_mat(d, 1, 1.0);
    return w;
}

ClassAttention class_attention_per_head(const Mat& q, const Mat& keys, const Mat& values, std::size_t m) {
    if (q.cols() != 1 || q.rows() != keys.rows() || keys.rows() != values.rows() || keys.cols() != values.cols()) {
        throw ShapeError("class attention: query " + q.shape_str() + ", keys " + keys.shape_str() + ", values " +
                         values.shape_str());
    }
    const auto qs = split_heads(q, m);
    const auto ks = split_heads(keys, m);
    const auto vs = split_heads(values, m);
    const double temp = std::sqrt(static_cast<double>(q.rows() / m));
    std::vector<Mat> zs;
    Mat per_head(keys.cols(), m);
    for (std::size_t h = 0; h < m; ++h) {
        const Mat a = col_softmax(matmul(transpose(ks[h]), qs[h]), temp);
        per_head.set_col(h, a);
        zs.push_back(matmul(vs[h], a));
    }
    return {merge_heads(zs), per_head};
}

ClassAttention class_attention_block_diagonal(const Mat& q, const Mat& keys, const Mat& values,
                                              std::size_t m) {
    check_heads(q.rows(), m);
    const std::size_t d = q.rows();
    const std::size_t dh = d / m;
    Mat qb(d, m);
    for (std::size_t r = 0; r < d; ++r) qb(r, r / dh) = q[r];
    const Mat a = col_softmax(matmul(transpose(keys), qb), std::sqrt(static_cast<double>(dh)));
    const Mat zfull = matmul(values, a);
    Mat z(d, 1);
    for (std::size_t r = 0; r < d; ++r) z[r] = zfull(r, r / dh);
    return {z, a};
}

PooledSet vit_cls_pool(const FeatureMap& fm, const VitWeights& w, std::size_t m, std::size_t iters,
                       bool simplified) {
    if (iters < 1) throw ContractError("vit: iters must be at least 1");
    if (w.stages.size() != 1 && w.stages.size() < iters) {
        throw ContractError("vit: " + std::to_string(w.stages.size()) + " stage weights for " +
                            std::to_string(iters) + " iterations");
    }
    const std::size_t d = fm.d();
    check_heads(d, m);
    if (w.u0.rows() != d || w.u0.cols() != 1) {
        throw ShapeError("vit: u0 " + w.u0.shape_str() + " does not match d=" + std::to_string(d));
    }
    const Mat xin = simplified ? fm.x() : layernorm_cols(fm.x(), w.ln_eps);
    Mat u = w.u0;
    Mat per_head(fm.p(), m);
    for (std::size_t t = 0; t < iters; ++t) {
        const VitStageWeights& sw = w.at(t);
        const Mat q = matmul(sw.w_q, simplified ? u : layernorm_cols(u, w.ln_eps));
        ClassAttention ca = class_attention_per_head(q, matmul(sw.w_k, xin), matmul(sw.w_v, xin), m);
        per_head = std::move(ca.per_head);
        if (simplified) {
            u = sw.mlp.apply(matmul(sw.w_u, ca.z));
        } else {
            const Mat g = add(u, matmul(sw.w_u, ca.z));
            u = add(g, sw.mlp.apply(layernorm_cols(g, w.ln_eps)));
        }
    }
    require_finite(u, "vit output");
    return {u, AttentionMatrix{row_mean(per_head), true}};
}

PooledSet cait_class_attention(const FeatureMap& fm, const VitWeights& weights, std::size_t m,
                               std::size_t iters) {
    return vit_cls_pool(fm, weights, m, iters, true);
}

PoolingSpec vit_spec(const VitWeights& w, std::size_t m, std::size_t iters) {
    PoolingSpec s;
    s.iters = iters;
    s.heads = m;
    s.init = InitFixed{w.u0};
    s.attention = AttnSoftmax{std::sqrt(static_cast<double>(w.u0.rows() / m))};
    s.stages.clear();
    for (std::size_t t = 0; t < (w.stages.size() == 1 ? 1 : iters); ++t) {
        const VitStageWeights& sw = w.at(t);
        Stage stage;
        stage.query = ColumnMap{false, sw.w_q};
        stage.key = ColumnMap{false, sw.w_k};
        stage.value = ColumnMap{false, sw.w_v};
        stage.pool_update = UpdateProjectMlp{sw.w_u, sw.mlp};
        s.stages.push_back(stage);
    }
    return s;
}

} // namespace genpool
