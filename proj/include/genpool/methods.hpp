#pragma once

#include "genpool/pooling.hpp"
#include "genpool/tensor_io.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace genpool {

/// Hyperparameters and optional weights for running any method by name.
/// Absent weights are generated from `seed`.
struct MethodOptions {
    double gamma = 2.0;
    std::size_t k = 4;
    std::size_t iters = 3;
    std::size_t heads = 1;
    double epsilon = 0.1;
    double r = 1.0;
    std::uint64_t seed = 0;
    bool simplified = true;
    bool layernorm = true;
    std::map<std::string, Mat> weights; ///< role → matrix, see weight_roles()
};

/// Copies the hyperparameters and reads every weight file named in cfg.
MethodOptions options_from_config(const RunConfig& cfg);

/// Runs one of method_names() on fm.
PooledSet run_method(const std::string& name, const FeatureMap& fm, const MethodOptions& opts);

} // namespace genpool
