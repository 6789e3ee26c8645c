#include "genpool/rng.hpp"

namespace genpool {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

} // namespace

Rng Rng::for_role(std::uint64_t seed, std::string_view role) {
    std::uint64_t h = 0xCBF29CE484222325ULL; // FNV-1a
    for (char c : role) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return Rng(splitmix64(seed ^ splitmix64(h)));
}

Mat Rng::normal_mat(std::size_t rows, std::size_t cols, double stddev) {
    Mat out(rows, cols);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = normal(0.0, stddev);
    return out;
}

Mat Rng::uniform_mat(std::size_t rows, std::size_t cols, double lo, double hi) {
    Mat out(rows, cols);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = uniform(lo, hi);
    return out;
}

} // namespace genpool
