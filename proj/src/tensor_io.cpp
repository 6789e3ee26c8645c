#include "genpool/tensor_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

static_assert(std::endian::native == std::endian::little, "NPY I/O assumes a little-endian host");

namespace genpool {

const char* to_string(NpyErrorKind kind) {
    switch (kind) {
    case NpyErrorKind::BadMagic: return "bad magic";
    case NpyErrorKind::BadVersion: return "unsupported version";
    case NpyErrorKind::FortranOrder: return "fortran order";
    case NpyErrorKind::UnsupportedDtype: return "unsupported dtype";
    case NpyErrorKind::BadHeader: return "malformed header";
    case NpyErrorKind::Truncated: return "truncated payload";
    }
    return "unknown";
}

namespace {

constexpr char kMagic[] = "\x93NUMPY";

[[noreturn]] void fail(NpyErrorKind kind, const std::filesystem::path& path, const std::string& detail) {
    throw NpyFormatError(kind, path.string() + ": " + to_string(kind) + (detail.empty() ? "" : ": " + detail));
}

NpyHeader parse_header(const std::string& dict, const std::filesystem::path& path) {
    static const std::regex descr_re(R"('descr'\s*:\s*'([^']*)')");
    static const std::regex order_re(R"('fortran_order'\s*:\s*(True|False))");
    static const std::regex shape_re(R"('shape'\s*:\s*\(([^)]*)\))");
    std::smatch m;
    NpyHeader h;
    if (!std::regex_search(dict, m, descr_re)) fail(NpyErrorKind::BadHeader, path, "no descr");
    h.descr = m[1];
    if (!std::regex_search(dict, m, order_re)) fail(NpyErrorKind::BadHeader, path, "no fortran_order");
    h.fortran_order = m[1] == "True";
    if (!std::regex_search(dict, m, shape_re)) fail(NpyErrorKind::BadHeader, path, "no shape");
    std::stringstream ss(m[1].str());
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(std::remove_if(item.begin(), item.end(), ::isspace), item.end());
        if (item.empty()) continue;
        if (!std::all_of(item.begin(), item.end(), ::isdigit)) fail(NpyErrorKind::BadHeader, path, "bad shape entry");
        h.shape.push_back(std::stoull(item));
    }
    if (h.fortran_order) fail(NpyErrorKind::FortranOrder, path, "only C order is supported");
    if (h.descr != "<f8" && h.descr != "<f4") fail(NpyErrorKind::UnsupportedDtype, path, h.descr);
    if (h.shape.empty() || h.shape.size() > 3) {
        fail(NpyErrorKind::BadHeader, path, "expected 1 to 3 dimensions, got " + std::to_string(h.shape.size()));
    }
    return h;
}

NpyHeader read_header(std::istream& in, const std::filesystem::path& path) {
    char magic[6];
    if (!in.read(magic, 6) || std::memcmp(magic, kMagic, 6) != 0) fail(NpyErrorKind::BadMagic, path, "");
    unsigned char ver[2];
    if (!in.read(reinterpret_cast<char*>(ver), 2)) fail(NpyErrorKind::Truncated, path, "in version");
    if (ver[0] != 1 || ver[1] != 0) {
        fail(NpyErrorKind::BadVersion, path, std::to_string(ver[0]) + "." + std::to_string(ver[1]));
    }
    unsigned char len[2];
    if (!in.read(reinterpret_cast<char*>(len), 2)) fail(NpyErrorKind::Truncated, path, "in header length");
    const std::size_t hlen = len[0] | (static_cast<std::size_t>(len[1]) << 8);
    std::string dict(hlen, '\0');
    if (!in.read(dict.data(), static_cast<std::streamsize>(hlen))) fail(NpyErrorKind::Truncated, path, "in header");
    return parse_header(dict, path);
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return in;
}

void write_raw(const std::vector<std::size_t>& shape, const Mat& m, const std::filesystem::path& path) {
    std::string dict = npy_header_dict(shape);
    const std::size_t unpadded = 10 + dict.size() + 1;
    dict.append((64 - unpadded % 64) % 64, ' ');
    dict.push_back('\n');
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(kMagic, 6);
    const char ver[2] = {1, 0};
    out.write(ver, 2);
    const char len[2] = {static_cast<char>(dict.size() & 0xff), static_cast<char>(dict.size() >> 8)};
    out.write(len, 2);
    out.write(dict.data(), static_cast<std::streamsize>(dict.size()));
    const auto flat = m.data();
    out.write(reinterpret_cast<const char*>(flat.data()), static_cast<std::streamsize>(flat.size() * sizeof(double)));
    if (!out) throw IoError("failed writing " + path.string());
}

} // namespace

std::string npy_header_dict(const std::vector<std::size_t>& shape, const std::string& descr) {
    std::string s = "{'descr': '" + descr + "', 'fortran_order': False, 'shape': (";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(shape[i]);
    }
    if (shape.size() == 1) s += ",";
    s += "), }";
    return s;
}

NpyHeader read_npy_header(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    return read_header(in, path);
}

NpyArray read_npy(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    NpyArray arr;
    arr.header = read_header(in, path);
    const auto& s = arr.header.shape;
    std::size_t rows = s[0];
    std::size_t cols = 1;
    for (std::size_t i = 1; i < s.size(); ++i) cols *= s[i];
    if (rows == 0 || cols == 0) fail(NpyErrorKind::BadHeader, path, "empty array");
    const std::size_t n = rows * cols;
    std::vector<double> values(n);
    if (arr.header.descr == "<f8") {
        if (!in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(n * sizeof(double)))) {
            fail(NpyErrorKind::Truncated, path, "expected " + std::to_string(n) + " float64 values");
        }
    } else {
        std::vector<float> narrow(n);
        if (!in.read(reinterpret_cast<char*>(narrow.data()), static_cast<std::streamsize>(n * sizeof(float)))) {
            fail(NpyErrorKind::Truncated, path, "expected " + std::to_string(n) + " float32 values");
        }
        std::copy(narrow.begin(), narrow.end(), values.begin());
    }
    arr.data = Mat(rows, cols, std::move(values));
    return arr;
}

void write_npy(const Mat& m, const std::filesystem::path& path) { write_raw({m.rows(), m.cols()}, m, path); }

void write_npy_vector(const Mat& v, const std::filesystem::path& path) { write_raw({v.size()}, v, path); }

FeatureMap to_feature_map(const NpyArray& arr, std::optional<std::size_t> width, std::optional<std::size_t> height) {
    std::size_t w = arr.data.cols();
    std::size_t h = 1;
    if (arr.header.shape.size() == 3) {
        h = arr.header.shape[1];
        w = arr.header.shape[2];
    }
    if (width) w = *width;
    if (height) h = *height;
    if (width && !height) h = arr.data.cols() / w;
    if (height && !width) w = arr.data.cols() / h;
    return FeatureMap(arr.data, w, h);
}

const std::vector<std::string>& method_names() {
    static const std::vector<std::string> names{"gap", "max",  "gem", "lse", "how", "sinkhorn-otk", "kmeans",
                                                "slot", "se", "cbam", "vit", "cait", "simpool"};
    return names;
}

const std::vector<std::string>& weight_roles() {
    static const std::vector<std::string> roles{"w_q", "w_k", "w_v", "w_u", "u0", "anchors", "centering", "projection"};
    return roles;
}

void validate(const RunConfig& c) {
    const auto& names = method_names();
    if (std::find(names.begin(), names.end(), c.method) == names.end()) {
        throw ConfigError("unknown method '" + c.method + "'");
    }
    if (c.family != "conv" && c.family != "transformer") {
        throw ConfigError("family must be \"conv\" or \"transformer\", got '" + c.family + "'");
    }
    if (!(c.gamma > 0 && c.gamma <= 100)) throw ConfigError("gamma must lie in (0, 100], got " + std::to_string(c.gamma));
    if (c.k < 1) throw ConfigError("k must be at least 1");
    if (c.iters < 1) throw ConfigError("iters must be at least 1");
    if (c.heads < 1) throw ConfigError("heads must be at least 1");
    if (!(c.epsilon > 0) || !std::isfinite(c.epsilon)) {
        throw ConfigError("epsilon must be positive, got " + std::to_string(c.epsilon));
    }
    if (!(std::abs(c.r) >= 1e-9) || !std::isfinite(c.r)) throw ConfigError("r must satisfy |r| >= 1e-9");
    if (!(c.mass > 0 && c.mass <= 1)) throw ConfigError("mass must lie in (0, 1]");
    if ((c.width && *c.width == 0) || (c.height && *c.height == 0)) throw ConfigError("width and height must be positive");
    const auto& roles = weight_roles();
    for (const auto& [role, path] : c.weights) {
        if (std::find(roles.begin(), roles.end(), role) == roles.end()) {
            throw ConfigError("unknown weight role '" + role + "'");
        }
    }
}

RunConfig parse_config(const std::string& text) {
    using nlohmann::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");

    static const std::set<std::string> known{"method", "family", "gamma", "k", "iters", "heads", "epsilon",
                                             "r", "seed", "mass", "simplified", "layernorm", "width", "height",
                                             "weights", "input", "output", "attn_output"};
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
    }

    RunConfig c;
    try {
        auto get = [&](const char* key, auto& field) {
            if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
        };
        auto get_count = [&](const char* key, auto& field) {
            if (!j.contains(key)) return;
            const json& v = j.at(key);
            if (!v.is_number_integer() || v.get<long long>() < 0) {
                throw ConfigError(std::string(key) + " must be a nonnegative integer");
            }
            field = v.get<std::size_t>();
        };
        get("method", c.method);
        get("family", c.family);
        c.gamma = c.family == "transformer" ? 1.25 : 2.0;
        get("gamma", c.gamma);
        get_count("k", c.k);
        get_count("iters", c.iters);
        get_count("heads", c.heads);
        get("epsilon", c.epsilon);
        get("r", c.r);
        std::uint64_t seed = 0;
        get_count("seed", seed);
        c.seed = seed;
        get("mass", c.mass);
        get("simplified", c.simplified);
        get("layernorm", c.layernorm);
        if (j.contains("width")) {
            std::size_t w = 0;
            get_count("width", w);
            c.width = w;
        }
        if (j.contains("height")) {
            std::size_t h = 0;
            get_count("height", h);
            c.height = h;
        }
        get("weights", c.weights);
        get("input", c.input);
        get("output", c.output);
        get("attn_output", c.attn_output);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config type error: ") + e.what());
    }
    validate(c);
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

} // namespace genpool
