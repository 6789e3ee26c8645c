#include "genpool/pooling.hpp"

#include "genpool/errors.hpp"

#include <algorithm>
#include <cmath>

namespace genpool {

FeatureMap::FeatureMap(Mat x, std::size_t width, std::size_t height)
    : x_(std::move(x)), width_(width), height_(height) {
    if (width_ * height_ != x_.cols()) {
        throw ShapeError("FeatureMap: grid " + std::to_string(width_) + "x" +
                         std::to_string(height_) + " does not match p=" +
                         std::to_string(x_.cols()));
    }
}

FeatureMap::FeatureMap(Mat x) : FeatureMap(x, x.cols(), 1) {}

double AttentionMatrix::max_col_sum_error() const {
    double worst = 0;
    for (std::size_t j = 0; j < a.cols(); ++j) {
        double s = 0;
        for (std::size_t i = 0; i < a.rows(); ++i) s += a(i, j);
        worst = std::max(worst, std::abs(s - 1.0));
    }
    return worst;
}

} // namespace genpool
