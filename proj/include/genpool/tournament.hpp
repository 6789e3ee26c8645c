#pragma once

#include "genpool/pooling.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace genpool {

struct TournamentOptions {
    std::size_t d = 16;
    std::size_t p = 64;
    std::size_t clusters = 4;
    std::size_t trials = 1;
    std::uint64_t seed = 0;
    std::vector<std::string> methods; ///< empty means every method
};

struct TournamentRow {
    std::string method;
    double norm = 0;       ///< ‖U‖_F, averaged over trials
    double distortion = 0; ///< Σ_i min_j ‖x_i − u_j‖², averaged over trials
    std::optional<double> entropy; ///< mean column entropy of the attention, if any
    double max_col_sum_error = 0;  ///< worst over trials, for stochastic attention only
    bool stochastic = false;
    double seconds = 0;
};

/// Nonnegative Gaussian-cluster features: `clusters` centers drawn from
/// N(0, 3²), each column a center plus N(0, 1) noise, clamped at 0. The
/// grid is square when p is a perfect square and a single row otherwise.
FeatureMap synthetic_clusters(std::size_t d, std::size_t p, std::size_t clusters, std::uint64_t seed);

/// Every requested method on `trials` synthetic inputs; rows follow the
/// requested order.
std::vector<TournamentRow> run_tournament(const TournamentOptions& opts);

/// Tab-separated report with a header row. Wall time is included only
/// when requested so that reports are reproducible byte for byte.
std::string format_tsv(const std::vector<TournamentRow>& rows, bool with_timing);

} // namespace genpool
