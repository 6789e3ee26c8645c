#pragma once

#include "genpool/mat.hpp"

namespace genpool {

struct SinkhornParams {
    double epsilon = 0.1;
    double tol = 1e-9;
    int max_iter = 1000;
    /// Scaling sweeps before switching to Newton steps on the dual.
    int newton_after = 100;
};

/// Entropic optimal transport plan for a p×k cost with uniform marginals
/// P·1_k = 1_p/p and P⊤·1_p = 1_k/k, by alternating scaling of exp(−C/ε).
/// If the sweeps have not reached tol after `newton_after` of them, the
/// remaining iterations are damped Newton steps on the dual potentials.
/// Every sweep or Newton step counts toward max_iter.
Mat sinkhorn(const Mat& cost, const SinkhornParams& params);

/// Largest marginal violation of a plan against the uniform marginals.
double sinkhorn_residual(const Mat& plan);

} // namespace genpool
