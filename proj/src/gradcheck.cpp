#include "genpool/gradcheck.hpp"

#include "genpool/errors.hpp"
#include "genpool/rng.hpp"
#include "genpool/simpool.hpp"

#include <algorithm>
#include <cmath>

namespace genpool {

Mat central_diff(const ScalarFn& f, const Mat& theta, double h) {
    if (!(h >= 1e-8 && h <= 1e-2)) throw ContractError("central_diff: h must lie in [1e-8, 1e-2]");
    Mat g(theta.rows(), theta.cols());
    Mat probe = theta;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        probe[i] = theta[i] + h;
        const double fp = f(probe);
        probe[i] = theta[i] - h;
        const double fm = f(probe);
        probe[i] = theta[i];
        if (!std::isfinite(fp) || !std::isfinite(fm)) {
            throw NumericError("central_diff: non-finite objective at coordinate (" +
                               std::to_string(i / theta.cols()) + "," + std::to_string(i % theta.cols()) + ")");
        }
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

namespace {

double max_abs(const Mat& m) {
    double best = 0;
    for (std::size_t i = 0; i < m.size(); ++i) best = std::max(best, std::abs(m[i]));
    return best;
}

} // namespace

double rel_error(const Mat& g1, const Mat& g2) {
    if (g1.rows() != g2.rows() || g1.cols() != g2.cols()) {
        throw ShapeError("rel_error: " + g1.shape_str() + " vs " + g2.shape_str());
    }
    return max_abs(sub(g1, g2)) / std::max(1e-12, max_abs(g1) + max_abs(g2));
}

GradReport compare_gradients(const std::string& name, const Mat& analytic, const Mat& numeric) {
    const Mat diff = sub(analytic, numeric);
    const double denom = std::max(1e-12, max_abs(analytic) + max_abs(numeric));
    GradReport r;
    r.name = name;
    double total = 0;
    for (std::size_t i = 0; i < diff.size(); ++i) {
        const double e = std::abs(diff[i]) / denom;
        total += e;
        if (e > r.max_rel_error) {
            r.max_rel_error = e;
            r.worst_index = i;
        }
    }
    r.mean_rel_error = total / static_cast<double>(diff.size());
    return r;
}

std::vector<GradReport> check_simpool(std::size_t d, std::size_t p, double gamma, double h,
                                      std::uint64_t seed) {
    Rng rx = Rng::for_role(seed, "gradcheck_x");
    Rng rd = Rng::for_role(seed, "gradcheck_du");
    const Mat x = rx.normal_mat(d, p, 1.0);
    const Mat du = rd.normal_mat(d, 1, 1.0);
    const SimPoolParams base = SimPoolParams::seeded(d, gamma, seed);

    const SimPoolResult fwd = simpool_forward(FeatureMap(x), base);
    const SimPoolGrads g = simpool_backward(fwd.cache, du);

    auto objective = [&](const Mat& xx, const SimPoolParams& pp) {
        const Mat u = simpool_forward(FeatureMap(xx), pp).u;
        double s = 0;
        for (std::size_t i = 0; i < d; ++i) s += du[i] * u[i];
        return s;
    };

    const Mat nq = central_diff(
        [&](const Mat& w) {
            SimPoolParams pp = base;
            pp.w_q = w;
            return objective(x, pp);
        },
        base.w_q, h);
    const Mat nk = central_diff(
        [&](const Mat& w) {
            SimPoolParams pp = base;
            pp.w_k = w;
            return objective(x, pp);
        },
        base.w_k, h);
    const Mat nx = central_diff([&](const Mat& xx) { return objective(xx, base); }, x, h);

    return {compare_gradients("W_q", g.dw_q, nq), compare_gradients("W_k", g.dw_k, nk),
            compare_gradients("X", g.dx, nx)};
}

} // namespace genpool
