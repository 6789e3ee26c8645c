#include "genpool/cluster_poolers.hpp"

#include "genpool/errors.hpp"
#include "genpool/rng.hpp"

#include <algorithm>
#include <cmath>

namespace genpool {

namespace {

double sq_dist(const Mat& a, std::size_t ca, const Mat& b, std::size_t cb) {
    double s = 0;
    for (std::size_t r = 0; r < a.rows(); ++r) {
        const double diff = a(r, ca) - b(r, cb);
        s += diff * diff;
    }
    return s;
}

Mat sq_dist_matrix(const Mat& x, const Mat& u) {
    if (x.rows() != u.rows()) {
        throw ShapeError("squared distances: features " + x.shape_str() + " vs centers " + u.shape_str());
    }
    Mat d(x.cols(), u.cols());
    for (std::size_t i = 0; i < x.cols(); ++i)
        for (std::size_t j = 0; j < u.cols(); ++j) d(i, j) = sq_dist(x, i, u, j);
    return d;
}

PooledSet run_lloyd(const Mat& x, Mat u, std::size_t iters) {
    if (iters < 1) throw ContractError("kmeans: iters must be at least 1");
    Mat a(x.cols(), u.cols());
    for (std::size_t t = 0; t < iters; ++t) {
        a = kmeans_assignment(x, u);
        Mat next = matmul(x, a);
        for (std::size_t j = 0; j < a.cols(); ++j) {
            double mass = 0;
            for (std::size_t i = 0; i < a.rows(); ++i) mass += a(i, j);
            if (mass == 0) next.set_col(j, u.col(j));
        }
        u = std::move(next);
    }
    const AttentionMatrix att{a, false};
    return {u, AttentionMatrix{a, att.max_col_sum_error() <= 1e-9}};
}

} // namespace

Mat nystrom_embedding(const Mat& x, const Mat& anchors, double sigma) {
    if (!(sigma > 0)) throw ConfigError("nystrom: sigma must be positive");
    const double denom = 2.0 * sigma * sigma;
    const std::size_t k = anchors.cols();
    Mat m(k, k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) m(i, j) = std::exp(-sq_dist(anchors, i, anchors, j) / denom);
    Mat kx(k, x.cols());
    const Mat d = sq_dist_matrix(x, anchors);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) kx(i, j) = std::exp(-d(j, i) / denom);

    const Eigh eig = jacobi_eigh(m);
    Mat inv_sqrt(k, k);
    for (std::size_t c = 0; c < k; ++c) {
        const double lambda = eig.values[c];
        if (lambda < -1e-8) throw NumericError("nystrom: kernel matrix is not positive semidefinite");
        const double w = 1.0 / std::sqrt(std::max(lambda, 1e-10));
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j) inv_sqrt(i, j) += w * eig.vectors(i, c) * eig.vectors(j, c);
    }
    return matmul(inv_sqrt, kx);
}

PooledSet otk_pool(const FeatureMap& fm, const Mat& anchors, const SinkhornParams& params,
                   std::optional<double> nystrom_sigma) {
    const Mat& x = fm.x();
    if (anchors.rows() != x.rows()) {
        throw ShapeError("otk: anchors " + anchors.shape_str() + " do not match d=" + std::to_string(x.rows()));
    }
    const Mat plan = sinkhorn(sq_dist_matrix(x, anchors), params);
    const Mat attention = scale(plan, static_cast<double>(anchors.cols()));
    const Mat psi = nystrom_sigma ? nystrom_embedding(x, anchors, *nystrom_sigma) : x;
    return {matmul(psi, attention), AttentionMatrix{attention, true}};
}

PoolingSpec otk_spec(const Mat& anchors, const SinkhornParams& params) {
    PoolingSpec s;
    s.k = anchors.cols();
    s.init = InitFixed{anchors};
    s.similarity = Similarity::NegSqEuclid;
    s.attention = AttnSinkhorn{params};
    return s;
}

double kmeans_distortion(const Mat& x, const Mat& u) {
    const Mat d = sq_dist_matrix(x, u);
    double j = 0;
    for (std::size_t i = 0; i < d.rows(); ++i) j += *std::min_element(d.row(i).begin(), d.row(i).end());
    return j;
}

Mat kmeans_assignment(const Mat& x, const Mat& u) {
    const Mat d = sq_dist_matrix(x, u);
    Mat m(d.rows(), d.cols());
    for (std::size_t i = 0; i < d.rows(); ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < d.cols(); ++j)
            if (d(i, j) < d(i, best)) best = j;
        m(i, best) = 1.0;
    }
    for (std::size_t j = 0; j < m.cols(); ++j) {
        double count = 0;
        for (std::size_t i = 0; i < m.rows(); ++i) count += m(i, j);
        if (count == 0) continue;
        for (std::size_t i = 0; i < m.rows(); ++i) m(i, j) /= count;
    }
    return m;
}

Mat lloyd_step(const Mat& x, const Mat& u) {
    return run_lloyd(x, u, 1).u;
}

PooledSet kmeans_pool(const FeatureMap& fm, std::size_t k, std::size_t iters, std::uint64_t seed) {
    if (k < 1 || k > fm.p()) {
        throw ContractError("kmeans: k=" + std::to_string(k) + " must be in [1, p=" + std::to_string(fm.p()) + "]");
    }
    return run_lloyd(fm.x(), initialize(InitSampleColumns{k, seed}, fm.x()), iters);
}

PooledSet kmeans_pool(const FeatureMap& fm, const std::vector<std::size_t>& init_columns,
                      std::size_t iters) {
    if (init_columns.size() > fm.p()) throw ContractError("kmeans: more initial columns than p");
    return run_lloyd(fm.x(), initialize(InitColumnsAt{init_columns}, fm.x()), iters);
}

PoolingSpec kmeans_spec(std::size_t k, std::size_t iters, std::uint64_t seed) {
    PoolingSpec s;
    s.k = k;
    s.iters = iters;
    s.init = InitSampleColumns{k, seed};
    s.similarity = Similarity::NegSqEuclid;
    s.attention = AttnHardArgmax{};
    return s;
}

SlotWeights SlotWeights::seeded(std::size_t d, std::uint64_t seed) {
    const double sd = 1.0 / std::sqrt(static_cast<double>(d));
    Rng rq = Rng::for_role(seed, "slot_w_q");
    Rng rk = Rng::for_role(seed, "slot_w_k");
    Rng rv = Rng::for_role(seed, "slot_w_v");
    Rng rg = Rng::for_role(seed, "slot_gru");
    Rng rm = Rng::for_role(seed, "slot_mlp");
    return {rq.normal_mat(d, d, sd), rk.normal_mat(d, d, sd), rv.normal_mat(d, d, sd),
            GruCell::seeded(d, d, rg), Mlp::seeded(d, d, d, rm), Mat(d, 1), Mat(d, 1, 1.0)};
}

PooledSet slot_pool(const FeatureMap& fm, std::size_t k, std::size_t iters, const SlotWeights& w,
                    std::uint64_t seed, bool simplified) {
    if (k < 1) throw ContractError("slot: k must be at least 1");
    if (iters < 1) throw ContractError("slot: iters must be at least 1");
    const Mat& x = fm.x();
    const std::size_t n = w.common_dim();
    if (w.w_k.cols() != x.rows() || w.w_v.cols() != x.rows() || w.w_k.rows() != n || w.w_v.rows() != n ||
        w.w_q.cols() != w.slot_dim()) {
        throw ShapeError("slot: weights W_q " + w.w_q.shape_str() + ", W_k " + w.w_k.shape_str() + ", W_v " +
                         w.w_v.shape_str() + " inconsistent with d=" + std::to_string(x.rows()) +
                         ", slot dim " + std::to_string(w.slot_dim()));
    }
    if (simplified && n != w.slot_dim()) throw ShapeError("slot: simplified mode needs n equal to the slot dimension");

    Mat u = initialize(InitNormal{w.mu, w.sigma, k, seed}, x);
    const Mat xin = simplified ? x : layernorm_cols(x, w.ln_eps);
    const Mat keys = matmul(w.w_k, xin);
    const Mat values = matmul(w.w_v, xin);
    const double temp = std::sqrt(static_cast<double>(n));

    Mat a(x.cols(), k);
    for (std::size_t t = 0; t < iters; ++t) {
        const Mat q = matmul(w.w_q, simplified ? u : layernorm_cols(u, w.ln_eps));
        const Mat logits = matmul(transpose(keys), q);
        a = simplified ? col_softmax(logits, temp) : eta_norm(col_softmax(logits, temp), Axis::Rows);
        const Mat z = matmul(values, a);
        if (simplified) {
            u = z;
        } else {
            const Mat g = w.gru.apply(z, u);
            u = add(g, w.mlp.apply(layernorm_cols(g, w.ln_eps)));
        }
    }
    require_finite(u, "slot output");
    return {u, AttentionMatrix{a, simplified}};
}

PoolingSpec slot_spec(std::size_t k, std::size_t iters, const SlotWeights& w, std::uint64_t seed,
                      bool simplified) {
    PoolingSpec s;
    s.k = k;
    s.iters = iters;
    s.init = InitNormal{w.mu, w.sigma, k, seed};
    const double temp = std::sqrt(static_cast<double>(w.common_dim()));
    Stage stage;
    stage.query = ColumnMap{!simplified, w.w_q, false, w.ln_eps};
    stage.key = ColumnMap{!simplified, w.w_k, false, w.ln_eps};
    stage.value = ColumnMap{!simplified, w.w_v, false, w.ln_eps};
    if (simplified) {
        s.attention = AttnSoftmax{temp};
    } else {
        s.attention = AttnRowThenCol{temp};
        stage.pool_update = UpdateGruMlp{w.gru, w.mlp, w.ln_eps};
    }
    s.stages = {stage};
    return s;
}

} // namespace genpool
