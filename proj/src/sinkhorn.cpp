#include "genpool/sinkhorn.hpp"

#include "genpool/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace genpool {

double sinkhorn_residual(const Mat& plan) {
    const std::size_t p = plan.rows();
    const std::size_t k = plan.cols();
    double worst = 0;
    for (std::size_t i = 0; i < p; ++i) {
        double s = 0;
        for (std::size_t j = 0; j < k; ++j) s += plan(i, j);
        worst = std::max(worst, std::abs(s - 1.0 / static_cast<double>(p)));
    }
    for (std::size_t j = 0; j < k; ++j) {
        double s = 0;
        for (std::size_t i = 0; i < p; ++i) s += plan(i, j);
        worst = std::max(worst, std::abs(s - 1.0 / static_cast<double>(k)));
    }
    return worst;
}

Mat sinkhorn(const Mat& cost, const SinkhornParams& params) {
    if (!(params.epsilon > 0) || !std::isfinite(params.epsilon)) {
        throw ConfigError("sinkhorn: epsilon must be positive and finite");
    }
    if (!(params.tol > 0)) throw ConfigError("sinkhorn: tol must be positive");
    if (params.max_iter < 1) throw ConfigError("sinkhorn: max_iter must be at least 1");
    require_finite(cost, "sinkhorn cost");

    const std::size_t p = cost.rows();
    const std::size_t k = cost.cols();
    const double row_mass = 1.0 / static_cast<double>(p);
    const double col_mass = 1.0 / static_cast<double>(k);

    Mat kernel(p, k);
    for (std::size_t i = 0; i < kernel.size(); ++i) kernel[i] = std::exp(-cost[i] / params.epsilon);
    for (std::size_t i = 0; i < p; ++i) {
        if (*std::max_element(kernel.row(i).begin(), kernel.row(i).end()) < 1e-300) {
            throw NumericError("sinkhorn: epsilon too small, kernel row " + std::to_string(i) +
                               " underflows");
        }
    }
    for (std::size_t j = 0; j < k; ++j) {
        double m = 0;
        for (std::size_t i = 0; i < p; ++i) m = std::max(m, kernel(i, j));
        if (m < 1e-300) {
            throw NumericError("sinkhorn: epsilon too small, kernel column " + std::to_string(j) +
                               " underflows");
        }
    }

    std::vector<double> r(p, 1.0), c(k, 1.0);
    auto plan = [&] {
        Mat out(p, k);
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = 0; j < k; ++j) out(i, j) = r[i] * kernel(i, j) * c[j];
        return out;
    };

    int it = 0;
    double residual = 0;
    const int sweeps = std::min(params.max_iter, params.newton_after);
    while (it < sweeps) {
        ++it;
        for (std::size_t i = 0; i < p; ++i) {
            double s = 0;
            for (std::size_t j = 0; j < k; ++j) s += kernel(i, j) * c[j];
            r[i] = row_mass / s;
        }
        for (std::size_t j = 0; j < k; ++j) {
            double s = 0;
            for (std::size_t i = 0; i < p; ++i) s += kernel(i, j) * r[i];
            c[j] = col_mass / s;
        }
        // Columns are exact after the column update; rows carry the residual.
        residual = 0;
        for (std::size_t i = 0; i < p; ++i) {
            double s = 0;
            for (std::size_t j = 0; j < k; ++j) s += r[i] * kernel(i, j) * c[j];
            residual = std::max(residual, std::abs(s - row_mass));
        }
        if (residual <= params.tol) {
            Mat out = plan();
            require_finite(out, "sinkhorn plan");
            return out;
        }
    }

    // Near-degenerate costs make the sweeps converge slowly. Continue with
    // damped Newton steps on the same convex dual, whose minimizer is the
    // same plan, working with log-potentials to avoid overflow.
    std::vector<double> f(p), g(k);
    for (std::size_t i = 0; i < p; ++i) f[i] = std::log(r[i]);
    for (std::size_t j = 0; j < k; ++j) g[j] = std::log(c[j]);
    Mat log_kernel(p, k);
    for (std::size_t i = 0; i < cost.size(); ++i) log_kernel[i] = -cost[i] / params.epsilon;

    auto log_plan = [&](const std::vector<double>& ff, const std::vector<double>& gg) {
        Mat out(p, k);
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = 0; j < k; ++j) out(i, j) = std::exp(ff[i] + log_kernel(i, j) + gg[j]);
        return out;
    };
    auto dual = [&](const std::vector<double>& ff, const std::vector<double>& gg) {
        const Mat pl = log_plan(ff, gg);
        double v = 0;
        for (std::size_t i = 0; i < pl.size(); ++i) v += pl[i];
        for (std::size_t i = 0; i < p; ++i) v -= row_mass * ff[i];
        for (std::size_t j = 0; j < k; ++j) v -= col_mass * gg[j];
        return v;
    };

    const std::size_t n = p + k - 1; // the last column potential is pinned
    while (it < params.max_iter) {
        ++it;
        const Mat pl = log_plan(f, g);
        std::vector<double> grad(p + k, 0.0);
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = 0; j < k; ++j) {
                grad[i] += pl(i, j);
                grad[p + j] += pl(i, j);
            }
        residual = 0;
        for (std::size_t i = 0; i < p; ++i) grad[i] -= row_mass;
        for (std::size_t j = 0; j < k; ++j) grad[p + j] -= col_mass;
        for (double v : grad) residual = std::max(residual, std::abs(v));
        if (residual <= params.tol) {
            require_finite(pl, "sinkhorn plan");
            return pl;
        }

        Mat h(n, n);
        double diag_max = 0;
        for (std::size_t i = 0; i < p; ++i) {
            h(i, i) = grad[i] + row_mass;
            diag_max = std::max(diag_max, h(i, i));
            for (std::size_t j = 0; j + 1 < k; ++j) {
                h(i, p + j) = pl(i, j);
                h(p + j, i) = pl(i, j);
            }
        }
        for (std::size_t j = 0; j + 1 < k; ++j) {
            h(p + j, p + j) = grad[p + j] + col_mass;
            diag_max = std::max(diag_max, h(p + j, p + j));
        }
        for (std::size_t i = 0; i < n; ++i) h(i, i) += 1e-12 * std::max(diag_max, 1e-300);
        Mat rhs(n, 1);
        for (std::size_t i = 0; i < n; ++i) rhs[i] = -grad[i];
        const Mat step = solve_spd(h, rhs);

        double slope = 0;
        for (std::size_t i = 0; i < n; ++i) slope += grad[i] * step[i];
        const double current = dual(f, g);
        double t = 1.0;
        std::vector<double> nf(p), ng(k);
        for (;;) {
            for (std::size_t i = 0; i < p; ++i) nf[i] = f[i] + t * step[i];
            for (std::size_t j = 0; j < k; ++j) ng[j] = g[j] + (j + 1 < k ? t * step[p + j] : 0.0);
            const double trial = dual(nf, ng);
            if (trial <= current + 1e-4 * t * slope || t < 1e-10) break;
            t *= 0.5;
        }
        f.swap(nf);
        g.swap(ng);
    }
    std::ostringstream msg;
    msg << "sinkhorn: no convergence after " << params.max_iter << " iterations, residual "
        << residual;
    throw ConvergenceError(msg.str());
}

} // namespace genpool
