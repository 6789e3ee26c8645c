#pragma once

#include "genpool/mat.hpp"

#include <cstdint>
#include <random>
#include <string_view>

namespace genpool {

// Seeded generator used for every random choice in the library. Streams for
// distinct roles (e.g. "w_q", "slots") are derived from one user seed so a
// run is reproducible from that seed alone.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    static Rng for_role(std::uint64_t seed, std::string_view role);

    double normal(double mean = 0.0, double stddev = 1.0) {
        return std::normal_distribution<double>(mean, stddev)(gen_);
    }
    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(gen_);
    }
    std::size_t index(std::size_t n) {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen_);
    }

    Mat normal_mat(std::size_t rows, std::size_t cols, double stddev = 1.0);
    Mat uniform_mat(std::size_t rows, std::size_t cols, double lo, double hi);

    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
};

} // namespace genpool
