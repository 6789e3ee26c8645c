#pragma once

#include "genpool/mat.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace genpool {

using ScalarFn = std::function<double(const Mat&)>;

/// Central differences (f(θ + h·e) − f(θ − h·e)) / 2h per coordinate.
/// f must be pure. h must lie in [1e-8, 1e-2].
Mat central_diff(const ScalarFn& f, const Mat& theta, double h);

/// max_i |g1 − g2| / max(1e-12, max|g1| + max|g2|).
double rel_error(const Mat& g1, const Mat& g2);

struct GradReport {
    std::string name;
    double max_rel_error = 0;
    double mean_rel_error = 0;
    std::size_t worst_index = 0; ///< flat row-major index
};

/// Compare an analytic gradient to a numeric one.
GradReport compare_gradients(const std::string& name, const Mat& analytic, const Mat& numeric);

/// Check SimPool's backward pass for W_q, W_k and X on one seeded instance
/// (random X, W_q, W_k and du).
std::vector<GradReport> check_simpool(std::size_t d, std::size_t p, double gamma, double h,
                                      std::uint64_t seed);

} // namespace genpool
