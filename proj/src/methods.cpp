#include "genpool/methods.hpp"

#include "genpool/cluster_poolers.hpp"
#include "genpool/errors.hpp"
#include "genpool/reweight_poolers.hpp"
#include "genpool/simple_poolers.hpp"
#include "genpool/simpool.hpp"
#include "genpool/transformer_poolers.hpp"

namespace genpool {

namespace {

const Mat* find_weight(const MethodOptions& o, const std::string& role) {
    const auto it = o.weights.find(role);
    return it == o.weights.end() ? nullptr : &it->second;
}

void override_with(const MethodOptions& o, const std::string& role, Mat& target) {
    if (const Mat* w = find_weight(o, role)) {
        if (w->rows() != target.rows() || w->cols() != target.cols()) {
            throw ShapeError("weight '" + role + "' is " + w->shape_str() + ", expected " + target.shape_str());
        }
        target = *w;
    }
}

PooledSet uniform_attention(Mat u, std::size_t p) {
    return {std::move(u), AttentionMatrix{Mat(p, 1, 1.0 / static_cast<double>(p)), true}};
}

} // namespace

MethodOptions options_from_config(const RunConfig& cfg) {
    validate(cfg);
    MethodOptions o;
    o.gamma = cfg.gamma;
    o.k = cfg.k;
    o.iters = cfg.iters;
    o.heads = cfg.heads;
    o.epsilon = cfg.epsilon;
    o.r = cfg.r;
    o.seed = cfg.seed;
    o.simplified = cfg.simplified;
    o.layernorm = cfg.layernorm;
    for (const auto& [role, path] : cfg.weights) o.weights.emplace(role, read_npy(path).data);
    return o;
}

PooledSet run_method(const std::string& name, const FeatureMap& fm, const MethodOptions& o) {
    const std::size_t d = fm.d();
    const std::size_t p = fm.p();

    if (name == "gap") return uniform_attention(gap(fm), p);
    if (name == "max") return {max_pool(fm), std::nullopt};
    if (name == "gem") return uniform_attention(gem(fm, o.gamma), p);
    if (name == "lse") return uniform_attention(lse(fm, o.r), p);
    if (name == "how") {
        HowConfig cfg = HowConfig::identity(d);
        override_with(o, "centering", cfg.centering);
        if (const Mat* w = find_weight(o, "projection")) cfg.projection = *w;
        Mat a(p, 1);
        for (std::size_t j = 0; j < p; ++j)
            for (std::size_t i = 0; i < d; ++i) a[j] += fm.x()(i, j) * fm.x()(i, j);
        return {how(fm, cfg), AttentionMatrix{a, false}};
    }
    if (name == "sinkhorn-otk") {
        SinkhornParams sp;
        sp.epsilon = o.epsilon;
        if (!(o.epsilon > 0)) throw ConfigError("sinkhorn-otk: epsilon must be positive");
        Mat anchors = find_weight(o, "anchors") ? *find_weight(o, "anchors")
                                                 : initialize(InitSampleColumns{std::min(o.k, p), o.seed}, fm.x());
        return otk_pool(fm, anchors, sp);
    }
    if (name == "kmeans") return kmeans_pool(fm, o.k, o.iters, o.seed);
    if (name == "slot") {
        SlotWeights w = SlotWeights::seeded(d, o.seed);
        override_with(o, "w_q", w.w_q);
        override_with(o, "w_k", w.w_k);
        override_with(o, "w_v", w.w_v);
        return slot_pool(fm, o.k, o.iters, w, o.seed, o.simplified);
    }
    if (name == "se" || name == "cbam") {
        // The bottleneck ratio falls back to 1 when 4 does not divide d.
        const std::size_t reduction = d % 4 == 0 ? 4 : 1;
        if (name == "se") return se_pool(fm, SeWeights::seeded(d, reduction, o.seed));
        return cbam_pool(fm, CbamWeights::seeded(d, reduction, o.seed), o.simplified);
    }
    if (name == "vit" || name == "cait") {
        VitWeights w = VitWeights::seeded(d, o.iters, o.seed);
        for (VitStageWeights& s : w.stages) {
            override_with(o, "w_q", s.w_q);
            override_with(o, "w_k", s.w_k);
            override_with(o, "w_v", s.w_v);
            override_with(o, "w_u", s.w_u);
        }
        override_with(o, "u0", w.u0);
        if (name == "cait") return cait_class_attention(fm, w, o.heads, o.iters);
        return vit_cls_pool(fm, w, o.heads, o.iters, o.simplified);
    }
    if (name == "simpool") {
        SimPoolParams params = SimPoolParams::seeded(d, o.gamma, o.seed);
        override_with(o, "w_q", params.w_q);
        override_with(o, "w_k", params.w_k);
        params.layernorm = o.layernorm;
        const SimPoolResult res = simpool_forward(fm, params);
        return {res.u, AttentionMatrix{res.a, true}};
    }
    throw ConfigError("unknown method '" + name + "'");
}

} // namespace genpool
