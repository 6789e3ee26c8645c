#include "genpool/attnmap.hpp"

#include "genpool/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

namespace genpool {

std::size_t Mask::count() const {
    return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), std::uint8_t{1}));
}

AttnGrid reshape_attention(const Mat& a, std::size_t width, std::size_t height) {
    if (a.rows() != 1 && a.cols() != 1) throw ShapeError("reshape_attention: expected a vector, got " + a.shape_str());
    if (width * height != a.size()) {
        throw ShapeError("reshape_attention: " + std::to_string(a.size()) + " values do not fill a " +
                         std::to_string(width) + "x" + std::to_string(height) + " grid");
    }
    Mat g(height, width);
    for (std::size_t i = 0; i < a.size(); ++i) g[i] = a[i];
    return {g};
}

Mat flatten(const AttnGrid& grid) {
    Mat a(grid.values.size(), 1);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = grid.values[i];
    return a;
}

Mask mass_threshold(const AttnGrid& grid, double fraction) {
    if (!(fraction > 0 && fraction <= 1)) throw ContractError("mass_threshold: fraction must lie in (0, 1]");
    const Mat& v = grid.values;
    double total = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i]) || v[i] < 0) {
            throw ContractError("mass_threshold: cell " + std::to_string(i) + " is negative or non-finite");
        }
        total += v[i];
    }
    if (total == 0) throw DegenerateError("mass_threshold: attention grid has zero mass");

    Mask mask{grid.width(), grid.height(), std::vector<std::uint8_t>(v.size(), 0)};
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return v[l] > v[r]; });

    const double target = fraction * total;
    double acc = 0;
    for (std::size_t idx : order) {
        if (v[idx] <= 0) break;
        mask.cells[idx] = 1;
        acc += v[idx];
        if (fraction < 1 && acc >= target) break;
    }
    return mask;
}

BBox largest_component_bbox(const Mask& mask) {
    const std::size_t w = mask.width;
    const std::size_t h = mask.height;
    if (mask.cells.size() != w * h) throw ShapeError("largest_component_bbox: mask size mismatch");
    std::vector<int> label(w * h, -1);
    std::vector<std::size_t> stack;
    std::size_t best_size = 0;
    BBox best{};
    int next = 0;
    // Scanning in flat order means the first component found at a given size
    // is the one with the smallest starting index.
    for (std::size_t start = 0; start < w * h; ++start) {
        if (!mask.cells[start] || label[start] >= 0) continue;
        BBox box{start % w, start / w, start % w, start / w};
        std::size_t size = 0;
        label[start] = next;
        stack.push_back(start);
        while (!stack.empty()) {
            const std::size_t cur = stack.back();
            stack.pop_back();
            ++size;
            const std::size_t x = cur % w;
            const std::size_t y = cur / w;
            box.x_min = std::min(box.x_min, x);
            box.x_max = std::max(box.x_max, x);
            box.y_min = std::min(box.y_min, y);
            box.y_max = std::max(box.y_max, y);
            auto visit = [&](std::size_t n) {
                if (mask.cells[n] && label[n] < 0) {
                    label[n] = next;
                    stack.push_back(n);
                }
            };
            if (x > 0) visit(cur - 1);
            if (x + 1 < w) visit(cur + 1);
            if (y > 0) visit(cur - w);
            if (y + 1 < h) visit(cur + w);
        }
        if (size > best_size) {
            best_size = size;
            best = box;
        }
        ++next;
    }
    if (best_size == 0) throw ContractError("largest_component_bbox: mask is empty");
    return best;
}

namespace {

void write_p5(const std::vector<std::uint8_t>& pixels, std::size_t w, std::size_t h,
              const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "P5\n" << w << ' ' << h << "\n255\n";
    out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
    if (!out) throw IoError("failed writing " + path.string());
}

} // namespace

void write_pgm(const AttnGrid& grid, const std::filesystem::path& path) {
    const Mat& v = grid.values;
    require_finite(v, "write_pgm");
    const auto flat = v.data();
    const auto [lo, hi] = std::minmax_element(flat.begin(), flat.end());
    const double range = *hi - *lo;
    std::vector<std::uint8_t> px(v.size(), 0);
    if (range > 0) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            px[i] = static_cast<std::uint8_t>(std::floor((v[i] - *lo) / range * 255.0 + 0.5));
        }
    }
    write_p5(px, grid.width(), grid.height(), path);
}

void write_pgm(const Mask& mask, const std::filesystem::path& path) {
    std::vector<std::uint8_t> px(mask.cells.size());
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = mask.cells[i] ? 255 : 0;
    write_p5(px, mask.width, mask.height, path);
}

} // namespace genpool
