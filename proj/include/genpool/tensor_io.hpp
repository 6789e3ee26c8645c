#pragma once

#include "genpool/errors.hpp"
#include "genpool/mat.hpp"
#include "genpool/pooling.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace genpool {

enum class NpyErrorKind { BadMagic, BadVersion, FortranOrder, UnsupportedDtype, BadHeader, Truncated };

const char* to_string(NpyErrorKind kind);

/// A malformed NPY file. Part of the I/O family; kind() tells the cases apart.
class NpyFormatError : public IoError {
public:
    NpyFormatError(NpyErrorKind kind, const std::string& msg) : IoError(msg), kind_(kind) {}
    NpyErrorKind kind() const noexcept { return kind_; }

private:
    NpyErrorKind kind_;
};

struct NpyHeader {
    std::string descr; ///< "<f8" or "<f4"
    bool fortran_order = false;
    std::vector<std::size_t> shape;
};

struct NpyArray {
    NpyHeader header;
    /// 1-D (n) → n×1, 2-D (r, c) → r×c, 3-D (d, H, W) → d×(H·W).
    Mat data;
};

/// The exact header dictionary text, before padding.
std::string npy_header_dict(const std::vector<std::size_t>& shape, const std::string& descr = "<f8");

NpyArray read_npy(const std::filesystem::path& path);
NpyHeader read_npy_header(const std::filesystem::path& path);
/// Always '<f8', version 1.0, shape (rows, cols).
void write_npy(const Mat& m, const std::filesystem::path& path);
/// Shape (n,) for a vector.
void write_npy_vector(const Mat& v, const std::filesystem::path& path);

/// 3-D arrays take W and H from their shape; 2-D arrays default to W = p,
/// H = 1. Explicit width/height override both.
FeatureMap to_feature_map(const NpyArray& arr, std::optional<std::size_t> width = std::nullopt,
                          std::optional<std::size_t> height = std::nullopt);

/// The pooling methods the library implements.
const std::vector<std::string>& method_names();

struct RunConfig {
    std::string method = "simpool";
    std::string family = "conv"; ///< "conv" or "transformer"; selects the gamma default
    double gamma = 2.0;
    std::size_t k = 4;
    std::size_t iters = 3;
    std::size_t heads = 1;
    double epsilon = 0.1;
    double r = 1.0;
    std::uint64_t seed = 0;
    double mass = 0.6;
    bool simplified = true;
    bool layernorm = true;
    std::optional<std::size_t> width;
    std::optional<std::size_t> height;
    std::map<std::string, std::string> weights; ///< role → NPY path
    std::string input;
    std::string output;
    std::string attn_output;
};

/// Weight roles accepted in the "weights" object.
const std::vector<std::string>& weight_roles();

/// Check ranges and names; throws ConfigError.
void validate(const RunConfig& cfg);

/// Strict parse: unknown keys and wrong types are rejected, absent keys take
/// defaults. gamma defaults to 1.25 for family "transformer" and 2.0 otherwise.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);

} // namespace genpool
