#pragma once

#include "genpool/mat.hpp"
#include "genpool/rng.hpp"

namespace genpool {

/// W·X + b·1⊤ with b a column vector.
Mat affine(const Mat& w, const Mat& x, const Mat& b);

/// Two affine layers with ReLU in between, applied to every column.
struct Mlp {
    Mat w1; ///< hidden × in
    Mat b1; ///< hidden × 1
    Mat w2; ///< out × hidden
    Mat b2; ///< out × 1

    Mat apply(const Mat& x) const;
    std::size_t in_dim() const { return w1.cols(); }
    std::size_t out_dim() const { return w2.rows(); }

    /// Scaled-normal weights (stddev 1/√fan_in), zero biases.
    static Mlp seeded(std::size_t in, std::size_t hidden, std::size_t out, Rng& rng);
    static Mlp zeros(std::size_t in, std::size_t hidden, std::size_t out);
};

/// Gated recurrent unit cell, columns are independent sequences:
///   r = σ(W_ir x + b_ir + W_hr h + b_hr)
///   z = σ(W_iz x + b_iz + W_hz h + b_hz)
///   n = tanh(W_in x + b_in + r ⊙ (W_hn h + b_hn))
///   h′ = (1 − z) ⊙ n + z ⊙ h
struct GruCell {
    Mat w_ir, w_iz, w_in; ///< state × input
    Mat w_hr, w_hz, w_hn; ///< state × state
    Mat b_ir, b_iz, b_in, b_hr, b_hz, b_hn; ///< state × 1

    Mat apply(const Mat& x, const Mat& h) const;
    std::size_t input_dim() const { return w_ir.cols(); }
    std::size_t state_dim() const { return w_ir.rows(); }

    static GruCell seeded(std::size_t input, std::size_t state, Rng& rng);
    static GruCell zeros(std::size_t input, std::size_t state);
};

} // namespace genpool
