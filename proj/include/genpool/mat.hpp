#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace genpool {

/// Dense row-major matrix of doubles. The only numeric container in the
/// library; vectors are represented as n×1 matrices.
class Mat {
public:
    /// Empty 0×0 placeholder; explicitly sized matrices must be nonempty.
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, double fill = 0.0);
    Mat(std::size_t rows, std::size_t cols, std::vector<double> data);
    Mat(std::initializer_list<std::initializer_list<double>> rows);

    static Mat identity(std::size_t n);
    static Mat column(std::span<const double> values);
    static Mat constant(std::size_t rows, std::size_t cols, double value) {
        return Mat(rows, cols, value);
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) noexcept {
        return data_[r * cols_ + c];
    }
    double operator()(std::size_t r, std::size_t c) const noexcept {
        return data_[r * cols_ + c];
    }
    double& operator[](std::size_t flat) noexcept { return data_[flat]; }
    double operator[](std::size_t flat) const noexcept { return data_[flat]; }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }
    std::span<const double> row(std::size_t r) const noexcept {
        return {data_.data() + r * cols_, cols_};
    }

    Mat col(std::size_t c) const;
    void set_col(std::size_t c, const Mat& values);

    /// "r×c" for error messages.
    std::string shape_str() const;

    bool operator==(const Mat& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

enum class Axis { Rows, Cols };

Mat matmul(const Mat& a, const Mat& b);
Mat transpose(const Mat& a);

Mat add(const Mat& a, const Mat& b);
Mat sub(const Mat& a, const Mat& b);
Mat hadamard(const Mat& a, const Mat& b);
Mat scale(const Mat& a, double s);
Mat add_scalar(const Mat& a, double s);
Mat power(const Mat& a, double exponent);
Mat exp(const Mat& a);
Mat log(const Mat& a);
Mat clamp_below(const Mat& a, double floor);
Mat sigmoid(const Mat& a);
Mat relu(const Mat& a);

double min(const Mat& a);
double max(const Mat& a);
/// Flat (row-major) index of the first occurrence of the minimum.
std::size_t argmin(const Mat& a);
double sum(const Mat& a);

/// Mean of each row: d×p -> d×1.
Mat row_mean(const Mat& a);
/// Mean of each column: d×p -> 1×p.
Mat col_mean(const Mat& a);
/// diag(v)·a, v is a.rows()×1.
Mat diag_left(const Mat& v, const Mat& a);
/// a·diag(v), v is a.cols()×1.
Mat diag_right(const Mat& a, const Mat& v);
/// Euclidean norm of all entries.
double frobenius(const Mat& a);
Mat l2_normalize(const Mat& v);

/// Column-wise softmax of s/scale with max subtraction (σ₂).
Mat col_softmax(const Mat& s, double scale);

/// ℓ1-normalization of rows (η₁) or columns (η₂); entries must be ≥ 0.
Mat eta_norm(const Mat& a, Axis axis);

/// Per-column LayerNorm without affine parameters.
Mat layernorm_cols(const Mat& x, double eps = 1e-5);

struct Eigh {
    std::vector<double> values; ///< ascending
    Mat vectors;                ///< column i pairs with values[i]
};

/// Cyclic Jacobi eigensolver for small symmetric matrices.
Eigh jacobi_eigh(const Mat& a);

/// Solves A·x = b for symmetric positive definite A by Cholesky
/// factorization. A non-positive pivot throws NumericError.
Mat solve_spd(const Mat& a, const Mat& b);

/// Throws NumericError when any entry is NaN or infinite.
void require_finite(const Mat& a, const char* what);

} // namespace genpool
