#include "genpool/simpool.hpp"

#include "genpool/errors.hpp"
#include "genpool/meanfam.hpp"
#include "genpool/rng.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>

namespace genpool {

namespace {

void validate(const SimPoolParams& p, std::size_t d) {
    if (!(p.gamma > 0 && p.gamma <= 100)) {
        throw ConfigError("simpool: gamma " + std::to_string(p.gamma) + " outside (0, 100]");
    }
    if (p.w_q.rows() != d || p.w_q.cols() != d || p.w_k.rows() != d || p.w_k.cols() != d) {
        throw ShapeError("simpool: W_q " + p.w_q.shape_str() + " and W_k " + p.w_k.shape_str() +
                         " must be " + std::to_string(d) + "x" + std::to_string(d));
    }
    require_finite(p.w_q, "simpool W_q");
    require_finite(p.w_k, "simpool W_k");
    if (p.layernorm && !(p.ln_eps > 0)) throw ConfigError("simpool: ln_eps must be positive");
}

// Backward of the per-column LayerNorm without affine parameters.
Mat layernorm_cols_backward(const Mat& x, const Mat& dy, double eps) {
    const std::size_t d = x.rows();
    Mat dx(d, x.cols());
    for (std::size_t c = 0; c < x.cols(); ++c) {
        double mean = 0;
        for (std::size_t r = 0; r < d; ++r) mean += x(r, c);
        mean /= static_cast<double>(d);
        double var = 0;
        for (std::size_t r = 0; r < d; ++r) var += (x(r, c) - mean) * (x(r, c) - mean);
        var /= static_cast<double>(d);
        const double inv_sigma = 1.0 / std::sqrt(var + eps);
        double mean_dy = 0;
        double mean_dy_y = 0;
        for (std::size_t r = 0; r < d; ++r) {
            const double y = (x(r, c) - mean) * inv_sigma;
            mean_dy += dy(r, c);
            mean_dy_y += dy(r, c) * y;
        }
        mean_dy /= static_cast<double>(d);
        mean_dy_y /= static_cast<double>(d);
        for (std::size_t r = 0; r < d; ++r) {
            const double y = (x(r, c) - mean) * inv_sigma;
            dx(r, c) = inv_sigma * (dy(r, c) - mean_dy - y * mean_dy_y);
        }
    }
    return dx;
}

} // namespace

SimPoolParams SimPoolParams::seeded(std::size_t d, double gamma, std::uint64_t seed) {
    const double sd = 1.0 / std::sqrt(static_cast<double>(d));
    Rng rq = Rng::for_role(seed, "simpool_w_q");
    Rng rk = Rng::for_role(seed, "simpool_w_k");
    SimPoolParams p;
    p.w_q = rq.normal_mat(d, d, sd);
    p.w_k = rk.normal_mat(d, d, sd);
    p.gamma = gamma;
    return p;
}

SimPoolResult simpool_forward(const FeatureMap& fm, const SimPoolParams& params) {
    const Mat& x = fm.x();
    const std::size_t d = x.rows();
    if (d < 2) throw ContractError("simpool: d must be at least 2 (LayerNorm over one channel is degenerate)");
    validate(params, d);
    require_finite(x, "simpool input");

    SimPoolCache c;
    c.params = params;
    c.x = x;
    c.u0 = row_mean(x);
    c.xn = params.layernorm ? layernorm_cols(x, params.ln_eps) : x;
    c.q = matmul(params.w_q, c.u0);
    c.keys = matmul(params.w_k, c.xn);
    c.logits = matmul(transpose(c.keys), c.q);
    c.a = col_softmax(c.logits, std::sqrt(static_cast<double>(d)));

    const std::span<const double> flat = std::as_const(c.xn).data();
    const auto it = std::min_element(flat.begin(), flat.end());
    c.argmin = static_cast<std::size_t>(it - flat.begin());
    c.v = add_scalar(c.xn, -*it);
    c.u = weighted_generalized_mean(c.v, c.a, AlphaParam::from_gamma(params.gamma));
    require_finite(c.u, "simpool output");
    return {c.u, c.a, std::move(c)};
}

SimPoolGrads simpool_backward(const SimPoolCache& c, const Mat& du) {
    const std::size_t d = c.x.rows();
    const std::size_t p = c.x.cols();
    if (du.rows() != d || du.cols() != 1) {
        throw ContractError("simpool_backward: du " + du.shape_str() + " does not match the cached d=" +
                            std::to_string(d));
    }
    if (c.u.rows() != d || c.a.rows() != p || c.v.rows() != d || c.v.cols() != p) {
        throw ContractError("simpool_backward: inconsistent cache");
    }
    const double gamma = c.params.gamma;

    // u_i = s_i^{1/γ}, s_i = Σ_j a_j V_ij^γ.
    Mat da(p, 1);
    Mat dv(d, p);
    for (std::size_t i = 0; i < d; ++i) {
        double s = 0;
        for (std::size_t j = 0; j < p; ++j) s += c.a[j] * std::pow(c.v(i, j), gamma);
        if (!(s > 0)) continue;
        const double ds = du[i] * c.u[i] / (gamma * s);
        for (std::size_t j = 0; j < p; ++j) {
            const double vij = c.v(i, j);
            da[j] += ds * std::pow(vij, gamma);
            // V^{γ−1} is unbounded at 0 for γ < 1; the floor matches the forward clamp.
            const double slope = gamma == 1.0 ? 1.0 : std::pow(std::max(vij, kPowerFloor), gamma - 1.0);
            dv(i, j) = ds * c.a[j] * gamma * slope;
        }
    }

    // Softmax over logits/√d.
    const double inv_temp = 1.0 / std::sqrt(static_cast<double>(d));
    double dot = 0;
    for (std::size_t j = 0; j < p; ++j) dot += c.a[j] * da[j];
    Mat dl(p, 1);
    for (std::size_t j = 0; j < p; ++j) dl[j] = c.a[j] * (da[j] - dot) * inv_temp;

    const Mat dk = matmul(c.q, transpose(dl));
    const Mat dq = matmul(c.keys, dl);

    SimPoolGrads g;
    g.dw_k = matmul(dk, transpose(c.xn));
    g.dw_q = matmul(dq, transpose(c.u0));

    Mat dxn = add(matmul(transpose(c.params.w_k), dk), dv);
    double total = 0;
    for (std::size_t i = 0; i < dv.size(); ++i) total += dv[i];
    dxn[c.argmin] -= total;

    Mat dx = c.params.layernorm ? layernorm_cols_backward(c.x, dxn, c.params.ln_eps) : dxn;
    const Mat du0 = matmul(transpose(c.params.w_q), dq);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < p; ++j) dx(i, j) += du0[i] / static_cast<double>(p);
    g.dx = std::move(dx);
    return g;
}

PoolingSpec simpool_spec(const SimPoolParams& params) {
    PoolingSpec s;
    s.init = InitGap{};
    s.similarity = Similarity::Dot;
    s.attention = AttnSoftmax{std::sqrt(static_cast<double>(params.w_q.rows()))};
    s.pool = AlphaParam::from_gamma(params.gamma);
    Stage stage;
    stage.query = ColumnMap{false, params.w_q};
    stage.key = ColumnMap{params.layernorm, params.w_k, false, params.ln_eps};
    stage.value = ColumnMap{params.layernorm, std::nullopt, true, params.ln_eps};
    s.stages = {stage};
    return s;
}

} // namespace genpool
