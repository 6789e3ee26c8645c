#pragma once

#include "genpool/mat.hpp"

#include <optional>

namespace genpool {

/// Feature matrix X (d×p) of a W×H spatial grid, flattened with j = y·W + x.
class FeatureMap {
public:
    FeatureMap(Mat x, std::size_t width, std::size_t height);
    /// 1-row grid: width = p, height = 1.
    explicit FeatureMap(Mat x);

    const Mat& x() const noexcept { return x_; }
    std::size_t d() const noexcept { return x_.rows(); }
    std::size_t p() const noexcept { return x_.cols(); }
    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }

private:
    Mat x_;
    std::size_t width_;
    std::size_t height_;
};

/// Attention A (p×k). When stochastic_cols is set every column is a
/// probability distribution.
struct AttentionMatrix {
    Mat a;
    bool stochastic_cols = false;

    /// Largest |column sum − 1|.
    double max_col_sum_error() const;
};

/// Pooled vectors U (d′×k) and the attention that produced them, if any.
struct PooledSet {
    Mat u;
    std::optional<AttentionMatrix> attention;
};

} // namespace genpool
