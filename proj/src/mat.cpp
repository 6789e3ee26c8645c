#include "genpool/mat.hpp"

#include "genpool/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace genpool {

namespace {

void require_same_shape(const Mat& a, const Mat& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_str() +
                         " vs " + b.shape_str());
    }
}

template <typename F>
Mat map(const Mat& a, F f) {
    Mat out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
    return out;
}

template <typename F>
Mat zip(const Mat& a, const Mat& b, const char* op, F f) {
    require_same_shape(a, b, op);
    Mat out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i], b[i]);
    return out;
}

} // namespace

Mat::Mat(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols) {
    if (rows == 0 || cols == 0) {
        throw ShapeError("Mat: dimensions must be positive, got " +
                         std::to_string(rows) + "x" + std::to_string(cols));
    }
    data_.assign(rows * cols, fill);
}

Mat::Mat(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows == 0 || cols == 0) {
        throw ShapeError("Mat: dimensions must be positive, got " +
                         std::to_string(rows) + "x" + std::to_string(cols));
    }
    if (data_.size() != rows * cols) {
        throw ShapeError("Mat: data length " + std::to_string(data_.size()) +
                         " does not match " + std::to_string(rows) + "x" +
                         std::to_string(cols));
    }
}

Mat::Mat(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
    if (rows_ == 0 || cols_ == 0) throw ShapeError("Mat: empty initializer");
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw ShapeError("Mat: ragged initializer");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Mat Mat::identity(std::size_t n) {
    Mat out(n, n);
    for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
    return out;
}

Mat Mat::column(std::span<const double> values) {
    return Mat(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

Mat Mat::col(std::size_t c) const {
    Mat out(rows_, 1);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
}

void Mat::set_col(std::size_t c, const Mat& values) {
    if (values.rows() != rows_ || values.cols() != 1) {
        throw ShapeError("set_col: expected " + std::to_string(rows_) +
                         "x1, got " + values.shape_str());
    }
    for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = values[r];
}

std::string Mat::shape_str() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
}

Mat matmul(const Mat& a, const Mat& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: inner dimensions differ, " + a.shape_str() +
                         " * " + b.shape_str());
    }
    Mat out(a.rows(), b.cols());
    const std::size_t n = a.cols();
    const std::size_t c = b.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* orow = out.data().data() + i * c;
        for (std::size_t k = 0; k < n; ++k) {
            const double aik = a(i, k);
            const double* brow = b.data().data() + k * c;
            for (std::size_t j = 0; j < c; ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

Mat transpose(const Mat& a) {
    Mat out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    return out;
}

Mat add(const Mat& a, const Mat& b) {
    return zip(a, b, "add", [](double x, double y) { return x + y; });
}

Mat sub(const Mat& a, const Mat& b) {
    return zip(a, b, "sub", [](double x, double y) { return x - y; });
}

Mat hadamard(const Mat& a, const Mat& b) {
    return zip(a, b, "hadamard", [](double x, double y) { return x * y; });
}

Mat scale(const Mat& a, double s) {
    return map(a, [s](double x) { return x * s; });
}

Mat add_scalar(const Mat& a, double s) {
    return map(a, [s](double x) { return x + s; });
}

Mat power(const Mat& a, double exponent) {
    Mat out = map(a, [exponent](double x) { return std::pow(x, exponent); });
    require_finite(out, "power");
    return out;
}

Mat exp(const Mat& a) {
    Mat out = map(a, [](double x) { return std::exp(x); });
    require_finite(out, "exp");
    return out;
}

Mat log(const Mat& a) {
    Mat out = map(a, [](double x) { return std::log(x); });
    require_finite(out, "log");
    return out;
}

Mat clamp_below(const Mat& a, double floor) {
    return map(a, [floor](double x) { return std::max(x, floor); });
}

Mat sigmoid(const Mat& a) {
    return map(a, [](double x) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
    });
}

Mat relu(const Mat& a) {
    return map(a, [](double x) { return x > 0 ? x : 0.0; });
}

double min(const Mat& a) {
    return *std::min_element(a.data().begin(), a.data().end());
}

double max(const Mat& a) {
    return *std::max_element(a.data().begin(), a.data().end());
}

std::size_t argmin(const Mat& a) {
    return static_cast<std::size_t>(
        std::min_element(a.data().begin(), a.data().end()) - a.data().begin());
}

double sum(const Mat& a) {
    return std::accumulate(a.data().begin(), a.data().end(), 0.0);
}

Mat row_mean(const Mat& a) {
    Mat out(a.rows(), 1);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0;
        for (double v : a.row(i)) s += v;
        out[i] = s / static_cast<double>(a.cols());
    }
    return out;
}

Mat col_mean(const Mat& a) {
    Mat out(1, a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out[j] += a(i, j);
    return scale(out, 1.0 / static_cast<double>(a.rows()));
}

Mat diag_left(const Mat& v, const Mat& a) {
    if (v.cols() != 1 || v.rows() != a.rows()) {
        throw ShapeError("diag_left: vector " + v.shape_str() +
                         " incompatible with " + a.shape_str());
    }
    Mat out = a;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) *= v[i];
    return out;
}

Mat diag_right(const Mat& a, const Mat& v) {
    if (v.cols() != 1 || v.rows() != a.cols()) {
        throw ShapeError("diag_right: vector " + v.shape_str() +
                         " incompatible with " + a.shape_str());
    }
    Mat out = a;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) *= v[j];
    return out;
}

double frobenius(const Mat& a) {
    double s = 0;
    for (double v : a.data()) s += v * v;
    return std::sqrt(s);
}

Mat l2_normalize(const Mat& v) {
    const double n = frobenius(v);
    if (n == 0.0) throw DegenerateError("l2_normalize: zero vector");
    return scale(v, 1.0 / n);
}

Mat col_softmax(const Mat& s, double scale_by) {
    if (!(scale_by > 0)) throw ContractError("col_softmax: scale must be positive");
    require_finite(s, "col_softmax input");
    Mat out(s.rows(), s.cols());
    for (std::size_t j = 0; j < s.cols(); ++j) {
        double m = s(0, j) / scale_by;
        for (std::size_t i = 1; i < s.rows(); ++i) m = std::max(m, s(i, j) / scale_by);
        double total = 0;
        for (std::size_t i = 0; i < s.rows(); ++i) {
            out(i, j) = std::exp(s(i, j) / scale_by - m);
            total += out(i, j);
        }
        for (std::size_t i = 0; i < s.rows(); ++i) out(i, j) /= total;
    }
    return out;
}

Mat eta_norm(const Mat& a, Axis axis) {
    Mat out = a;
    if (axis == Axis::Rows) {
        for (std::size_t i = 0; i < a.rows(); ++i) {
            double s = 0;
            for (double v : a.row(i)) {
                if (v < 0) throw ContractError("eta_norm: negative entry in row " + std::to_string(i));
                s += v;
            }
            if (!(s > 0)) throw DegenerateError("eta_norm: row " + std::to_string(i) + " has zero mass");
            for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) /= s;
        }
    } else {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            double s = 0;
            for (std::size_t i = 0; i < a.rows(); ++i) {
                if (a(i, j) < 0) throw ContractError("eta_norm: negative entry in column " + std::to_string(j));
                s += a(i, j);
            }
            if (!(s > 0)) throw DegenerateError("eta_norm: column " + std::to_string(j) + " has zero mass");
            for (std::size_t i = 0; i < a.rows(); ++i) out(i, j) /= s;
        }
    }
    return out;
}

Mat layernorm_cols(const Mat& x, double eps) {
    if (!(eps > 0)) throw ContractError("layernorm_cols: eps must be positive");
    const auto d = static_cast<double>(x.rows());
    Mat out(x.rows(), x.cols());
    for (std::size_t j = 0; j < x.cols(); ++j) {
        double mean = 0;
        for (std::size_t i = 0; i < x.rows(); ++i) mean += x(i, j);
        mean /= d;
        double var = 0;
        for (std::size_t i = 0; i < x.rows(); ++i) {
            const double c = x(i, j) - mean;
            var += c * c;
        }
        var /= d;
        const double inv = 1.0 / std::sqrt(var + eps);
        for (std::size_t i = 0; i < x.rows(); ++i) out(i, j) = (x(i, j) - mean) * inv;
    }
    return out;
}

Eigh jacobi_eigh(const Mat& input) {
    const std::size_t n = input.rows();
    if (input.cols() != n) throw ShapeError("jacobi_eigh: matrix must be square, got " + input.shape_str());
    if (n > 64) throw ContractError("jacobi_eigh: size " + std::to_string(n) + " exceeds 64");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(input(i, j) - input(j, i)) > 1e-10)
                throw ContractError("jacobi_eigh: matrix is not symmetric at (" +
                                    std::to_string(i) + "," + std::to_string(j) + ")");
    require_finite(input, "jacobi_eigh input");

    Mat a = input;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * (input(i, j) + input(j, i));
    Mat v = Mat::identity(n);

    const double norm = frobenius(a);
    auto off_norm = [&] {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += 2 * a(i, j) * a(i, j);
        return std::sqrt(s);
    };

    constexpr int kMaxSweeps = 100;
    // Relative to the input norm, since an absolute cutoff never triggers for large matrices.
    const double threshold = 1e-12 * std::max(norm, 1e-300);
    int sweep = 0;
    for (; sweep < kMaxSweeps && off_norm() > threshold; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = a(q, p) = 0.0;  // exact by construction, drop rounding residue
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    if (off_norm() > threshold) {
        throw ConvergenceError("jacobi_eigh: no convergence after " +
                               std::to_string(kMaxSweeps) + " sweeps");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
    Eigh out{std::vector<double>(n), Mat(n, n)};
    for (std::size_t c = 0; c < n; ++c) {
        out.values[c] = a(order[c], order[c]);
        for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = v(r, order[c]);
    }
    return out;
}

void require_finite(const Mat& a, const char* what) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!std::isfinite(a[i])) {
            std::ostringstream msg;
            msg << what << ": non-finite value at (" << i / a.cols() << ","
                << i % a.cols() << ")";
            throw NumericError(msg.str());
        }
    }
}

Mat solve_spd(const Mat& a, const Mat& b) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.rows() != n) {
        throw ShapeError("solve_spd: matrix " + a.shape_str() + " and right-hand side " + b.shape_str());
    }
    Mat l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t m = 0; m < j; ++m) d -= l(j, m) * l(j, m);
        if (!(d > 0)) throw NumericError("solve_spd: matrix is not positive definite (pivot " + std::to_string(j) + ")");
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t m = 0; m < j; ++m) s -= l(i, m) * l(j, m);
            l(i, j) = s / l(j, j);
        }
    }
    Mat x = b;
    for (std::size_t c = 0; c < b.cols(); ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = x(i, c);
            for (std::size_t m = 0; m < i; ++m) s -= l(i, m) * x(m, c);
            x(i, c) = s / l(i, i);
        }
        for (std::size_t i = n; i-- > 0;) {
            double s = x(i, c);
            for (std::size_t m = i + 1; m < n; ++m) s -= l(m, i) * x(m, c);
            x(i, c) = s / l(i, i);
        }
    }
    return x;
}

} // namespace genpool
