#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace rpca {

/// Dense column-major matrix of doubles.
///
/// Column-major storage keeps each video frame (one column) contiguous,
/// which is the access pattern of convolution, SVD and the reference
/// projection.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

    static Matrix identity(std::size_t n);
    /// Builds a matrix from a row-major nested list; all rows must have equal length.
    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
    static Matrix diagonal(std::span<const double> values);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[j * rows_ + i]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[j * rows_ + i]; }

    std::span<double> col(std::size_t j) noexcept { return {data_.data() + j * rows_, rows_}; }
    std::span<const double> col(std::size_t j) const noexcept {
        return {data_.data() + j * rows_, rows_};
    }

    std::span<double> flat() noexcept { return data_; }
    std::span<const double> flat() const noexcept { return data_; }
    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }

    bool same_shape(const Matrix& other) const noexcept {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    void fill(double value);
    void set_zero() { fill(0.0); }

    Matrix& operator+=(const Matrix& other);
    Matrix& operator-=(const Matrix& other);
    Matrix& operator*=(double s);
    /// this += s * other
    Matrix& add_scaled(const Matrix& other, double s);

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(double s, Matrix a);

Matrix transpose(const Matrix& a);
/// A * B
Matrix matmul(const Matrix& a, const Matrix& b);
/// A^T * B
Matrix matmul_tn(const Matrix& a, const Matrix& b);
/// A * B^T
Matrix matmul_nt(const Matrix& a, const Matrix& b);
/// Hadamard product; shapes must be identical.
Matrix elementwise_mul(const Matrix& a, const Matrix& b);

double frobenius_norm(const Matrix& a);
double squared_norm(const Matrix& a);
/// Frobenius inner product <A, B>.
double inner(const Matrix& a, const Matrix& b);
double max_abs(const Matrix& a);
double max_value(const Matrix& a);
double min_value(const Matrix& a);
bool all_finite(const Matrix& a);
bool all_zero(const Matrix& a);

/// Throws ShapeError naming `what` when shapes differ.
void require_same_shape(const Matrix& a, const Matrix& b, const char* what);

}  // namespace rpca
