#pragma once

#include "genpool/mat.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace genpool {

struct AttnGrid {
    Mat values; ///< H×W, entry (y, x) = a[y·W + x]
    std::size_t width() const { return values.cols(); }
    std::size_t height() const { return values.rows(); }
};

struct Mask {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> cells; ///< row-major, 0 or 1

    bool at(std::size_t x, std::size_t y) const { return cells[y * width + x] != 0; }
    std::size_t count() const;
};

struct BBox {
    std::size_t x_min, y_min, x_max, y_max; ///< inclusive
    bool operator==(const BBox&) const = default;
};

/// a is p×1 (or 1×p) with p = W·H.
AttnGrid reshape_attention(const Mat& a, std::size_t width, std::size_t height);
/// Inverse of reshape_attention, p×1.
Mat flatten(const AttnGrid& grid);

/// Smallest set of highest cells whose mass reaches fraction·total. Equal
/// values are taken in increasing flat index. fraction = 1 keeps every
/// positive cell.
Mask mass_threshold(const AttnGrid& grid, double fraction);

/// Tight box of the largest 4-connected component. Size ties go to the
/// component containing the smallest flat index.
BBox largest_component_bbox(const Mask& mask);

/// Binary P5, min-max scaled to 0..255 with round-half-up; a constant grid
/// is written as zeros.
void write_pgm(const AttnGrid& grid, const std::filesystem::path& path);
/// Masks are written as 0/255.
void write_pgm(const Mask& mask, const std::filesystem::path& path);

} // namespace genpool
