#include "genpool/tournament.hpp"

#include "genpool/cluster_poolers.hpp"
#include "genpool/errors.hpp"
#include "genpool/methods.hpp"
#include "genpool/rng.hpp"
#include "genpool/tensor_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

namespace genpool {

FeatureMap synthetic_clusters(std::size_t d, std::size_t p, std::size_t clusters, std::uint64_t seed) {
    if (clusters < 1) throw ContractError("tournament: need at least one cluster");
    Rng rc = Rng::for_role(seed, "tournament_centers");
    Rng rx = Rng::for_role(seed, "tournament_points");
    const Mat centers = rc.normal_mat(d, clusters, 3.0);
    Mat x(d, p);
    for (std::size_t j = 0; j < p; ++j) {
        const std::size_t c = rx.index(clusters);
        for (std::size_t i = 0; i < d; ++i) x(i, j) = std::max(0.0, centers(i, c) + rx.normal());
    }
    const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(p))));
    if (side * side == p) return FeatureMap(x, side, side);
    return FeatureMap(x);
}

namespace {

double column_entropy(const Mat& a) {
    double total = 0;
    for (std::size_t c = 0; c < a.cols(); ++c) {
        double mass = 0;
        for (std::size_t r = 0; r < a.rows(); ++r) mass += a(r, c);
        if (!(mass > 0)) continue;
        double h = 0;
        for (std::size_t r = 0; r < a.rows(); ++r) {
            const double q = a(r, c) / mass;
            if (q > 0) h -= q * std::log(q);
        }
        total += h;
    }
    return total / static_cast<double>(a.cols());
}

} // namespace

std::vector<TournamentRow> run_tournament(const TournamentOptions& opts) {
    if (opts.trials < 1) throw ContractError("tournament: trials must be at least 1");
    const std::vector<std::string> methods = opts.methods.empty() ? method_names() : opts.methods;
    const auto& known = method_names();
    for (const auto& m : methods) {
        if (std::find(known.begin(), known.end(), m) == known.end()) throw ConfigError("unknown method '" + m + "'");
    }

    std::vector<FeatureMap> inputs;
    for (std::size_t t = 0; t < opts.trials; ++t) {
        inputs.push_back(synthetic_clusters(opts.d, opts.p, opts.clusters, opts.seed + t));
    }

    std::vector<TournamentRow> rows;
    for (const auto& name : methods) {
        TournamentRow row;
        row.method = name;
        double entropy = 0;
        bool has_entropy = false;
        for (std::size_t t = 0; t < opts.trials; ++t) {
            MethodOptions mo;
            mo.seed = opts.seed + t;
            mo.k = std::min<std::size_t>(mo.k, opts.p);
            // Squared distances here are far larger than O(1); an ε on the
            // scale of the mean squared spread keeps Sinkhorn well conditioned.
            mo.epsilon = kmeans_distortion(inputs[t].x(), row_mean(inputs[t].x())) / static_cast<double>(opts.p);
            const auto start = std::chrono::steady_clock::now();
            const PooledSet out = run_method(name, inputs[t], mo);
            row.seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            row.norm += frobenius(out.u);
            row.distortion += kmeans_distortion(inputs[t].x(), out.u);
            if (out.attention) {
                has_entropy = true;
                entropy += column_entropy(out.attention->a);
                if (out.attention->stochastic_cols) {
                    row.stochastic = true;
                    row.max_col_sum_error = std::max(row.max_col_sum_error, out.attention->max_col_sum_error());
                }
            }
        }
        const double n = static_cast<double>(opts.trials);
        row.norm /= n;
        row.distortion /= n;
        if (has_entropy) row.entropy = entropy / n;
        rows.push_back(row);
    }
    return rows;
}

std::string format_tsv(const std::vector<TournamentRow>& rows, bool with_timing) {
    std::string out = "method\tnorm\tdistortion\tentropy";
    if (with_timing) out += "\tseconds";
    out += '\n';
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.10g", v);
        return std::string(buf);
    };
    for (const auto& r : rows) {
        out += r.method + '\t' + num(r.norm) + '\t' + num(r.distortion) + '\t' + (r.entropy ? num(*r.entropy) : "NA");
        if (with_timing) out += '\t' + num(r.seconds);
        out += '\n';
    }
    return out;
}

} // namespace genpool
