#include "genpool/layers.hpp"

#include "genpool/errors.hpp"

#include <cmath>

namespace genpool {

Mat affine(const Mat& w, const Mat& x, const Mat& b) {
    Mat out = matmul(w, x);
    if (b.rows() != out.rows() || b.cols() != 1) {
        throw ShapeError("affine: bias " + b.shape_str() + " does not match output " +
                         out.shape_str());
    }
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += b[i];
    return out;
}

Mat Mlp::apply(const Mat& x) const {
    return affine(w2, relu(affine(w1, x, b1)), b2);
}

Mlp Mlp::seeded(std::size_t in, std::size_t hidden, std::size_t out, Rng& rng) {
    return {rng.normal_mat(hidden, in, 1.0 / std::sqrt(static_cast<double>(in))),
            Mat(hidden, 1),
            rng.normal_mat(out, hidden, 1.0 / std::sqrt(static_cast<double>(hidden))),
            Mat(out, 1)};
}

Mlp Mlp::zeros(std::size_t in, std::size_t hidden, std::size_t out) {
    return {Mat(hidden, in), Mat(hidden, 1), Mat(out, hidden), Mat(out, 1)};
}

Mat GruCell::apply(const Mat& x, const Mat& h) const {
    if (h.rows() != state_dim() || x.cols() != h.cols()) {
        throw ShapeError("GruCell: state " + h.shape_str() + " incompatible with input " +
                         x.shape_str());
    }
    const Mat r = sigmoid(add(affine(w_ir, x, b_ir), affine(w_hr, h, b_hr)));
    const Mat z = sigmoid(add(affine(w_iz, x, b_iz), affine(w_hz, h, b_hz)));
    Mat n = add(affine(w_in, x, b_in), hadamard(r, affine(w_hn, h, b_hn)));
    for (std::size_t i = 0; i < n.size(); ++i) n[i] = std::tanh(n[i]);
    Mat out(h.rows(), h.cols());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 - z[i]) * n[i] + z[i] * h[i];
    return out;
}

GruCell GruCell::seeded(std::size_t input, std::size_t state, Rng& rng) {
    const double si = 1.0 / std::sqrt(static_cast<double>(input));
    const double sh = 1.0 / std::sqrt(static_cast<double>(state));
    GruCell g = zeros(input, state);
    g.w_ir = rng.normal_mat(state, input, si);
    g.w_iz = rng.normal_mat(state, input, si);
    g.w_in = rng.normal_mat(state, input, si);
    g.w_hr = rng.normal_mat(state, state, sh);
    g.w_hz = rng.normal_mat(state, state, sh);
    g.w_hn = rng.normal_mat(state, state, sh);
    return g;
}

GruCell GruCell::zeros(std::size_t input, std::size_t state) {
    const Mat wi(state, input), wh(state, state), b(state, 1);
    return {wi, wi, wi, wh, wh, wh, b, b, b, b, b, b};
}

} // namespace genpool
