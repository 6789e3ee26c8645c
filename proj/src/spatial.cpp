#include "genpool/spatial.hpp"

#include "genpool/errors.hpp"

namespace genpool {

Mat avg3(const Mat& x, std::size_t width, std::size_t height) {
    if (width * height != x.cols()) {
        throw ShapeError("avg3: grid " + std::to_string(width) + "x" + std::to_string(height) +
                         " does not match p=" + std::to_string(x.cols()));
    }
    Mat out(x.rows(), x.cols());
    const auto w = static_cast<long>(width);
    const auto h = static_cast<long>(height);
    for (long y = 0; y < h; ++y) {
        for (long xx = 0; xx < w; ++xx) {
            const auto j = static_cast<std::size_t>(y * w + xx);
            for (std::size_t c = 0; c < x.rows(); ++c) {
                double s = 0;
                int count = 0;
                for (long dy = -1; dy <= 1; ++dy) {
                    for (long dx = -1; dx <= 1; ++dx) {
                        const long ny = y + dy;
                        const long nx = xx + dx;
                        if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
                        s += x(c, static_cast<std::size_t>(ny * w + nx));
                        ++count;
                    }
                }
                out(c, j) = s / count;
            }
        }
    }
    return out;
}

Mat Conv7::apply(const Mat& channels, std::size_t width, std::size_t height) const {
    if (width * height != channels.rows()) {
        throw ShapeError("conv7: grid " + std::to_string(width) + "x" + std::to_string(height) +
                         " does not match p=" + std::to_string(channels.rows()));
    }
    if (kernel.size() < channels.cols()) {
        throw ShapeError("conv7: kernel has " + std::to_string(kernel.size()) +
                         " channels, input has " + std::to_string(channels.cols()));
    }
    for (const Mat& k : kernel) {
        if (k.rows() != 7 || k.cols() != 7) throw ShapeError("conv7: kernel slice must be 7x7, got " + k.shape_str());
    }
    const auto w = static_cast<long>(width);
    const auto h = static_cast<long>(height);
    Mat out(channels.rows(), 1, bias);
    for (long y = 0; y < h; ++y) {
        for (long xx = 0; xx < w; ++xx) {
            double s = bias;
            for (std::size_t c = 0; c < channels.cols(); ++c) {
                for (long dy = -3; dy <= 3; ++dy) {
                    const long ny = y + dy;
                    if (ny < 0 || ny >= h) continue;
                    for (long dx = -3; dx <= 3; ++dx) {
                        const long nx = xx + dx;
                        if (nx < 0 || nx >= w) continue;
                        s += kernel[c](static_cast<std::size_t>(dy + 3), static_cast<std::size_t>(dx + 3)) *
                             channels(static_cast<std::size_t>(ny * w + nx), c);
                    }
                }
            }
            out[static_cast<std::size_t>(y * w + xx)] = s;
        }
    }
    return out;
}

Conv7 Conv7::zeros(std::size_t channels) {
    return {std::vector<Mat>(channels, Mat(7, 7)), 0.0};
}

} // namespace genpool
