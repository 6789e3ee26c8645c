#pragma once

#include "genpool/mat.hpp"

#include <vector>

namespace genpool {

/// 3×3 local average over each channel (row) of a d×p map on a W×H grid;
/// same-size output, each cell averages its in-bounds neighbours.
Mat avg3(const Mat& x, std::size_t width, std::size_t height);

/// Single-output 7×7 convolution, stride 1, zero padding, over c input
/// channels. Channels are the columns of a p×c matrix (flat index y·W + x).
struct Conv7 {
    std::vector<Mat> kernel; ///< one 7×7 (rows = dy, cols = dx) per channel
    double bias = 0.0;

    Mat apply(const Mat& channels, std::size_t width, std::size_t height) const;

    static Conv7 zeros(std::size_t channels);
};

} // namespace genpool
