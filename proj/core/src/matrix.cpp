#include "rpca/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rpca/errors.hpp"

namespace rpca {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix Matrix::identity(std::size_t n) {
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
    return out;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    Matrix out(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
        if (row.size() != c) throw ShapeError("Matrix::from_rows: ragged rows");
        std::size_t j = 0;
        for (double v : row) out(i, j++) = v;
        ++i;
    }
    return out;
}

Matrix Matrix::diagonal(std::span<const double> values) {
    Matrix out(values.size(), values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out(i, i) = values[i];
    return out;
}

void Matrix::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(what) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
    }
}

Matrix& Matrix::operator+=(const Matrix& other) {
    require_same_shape(*this, other, "operator+=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
    require_same_shape(*this, other, "operator-=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
    return *this;
}

Matrix& Matrix::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

Matrix& Matrix::add_scaled(const Matrix& other, double s) {
    require_same_shape(*this, other, "add_scaled");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += s * other.data_[k];
    return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (std::size_t j = 0; j < a.cols(); ++j)
        for (std::size_t i = 0; i < a.rows(); ++i) out(j, i) = a(i, j);
    return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw ShapeError("matmul: inner dimensions differ");
    Matrix out(a.rows(), b.cols());
    const std::size_t n = a.rows();
    for (std::size_t j = 0; j < b.cols(); ++j) {
        double* c = out.col(j).data();
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double s = b(k, j);
            if (s == 0.0) continue;
            const double* ak = a.col(k).data();
            for (std::size_t i = 0; i < n; ++i) c[i] += s * ak[i];
        }
    }
    return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw ShapeError("matmul_tn: row counts differ");
    Matrix out(a.cols(), b.cols());
    const std::size_t n = a.rows();
    for (std::size_t i = 0; i < a.cols(); ++i) {
        const double* ai = a.col(i).data();
        for (std::size_t j = 0; j < b.cols(); ++j) {
            const double* bj = b.col(j).data();
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) acc += ai[k] * bj[k];
            out(i, j) = acc;
        }
    }
    return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw ShapeError("matmul_nt: column counts differ");
    Matrix out(a.rows(), b.rows());
    const std::size_t n = a.rows();
    for (std::size_t k = 0; k < a.cols(); ++k) {
        const double* ak = a.col(k).data();
        for (std::size_t j = 0; j < b.rows(); ++j) {
            const double s = b(j, k);
            if (s == 0.0) continue;
            double* c = out.col(j).data();
            for (std::size_t i = 0; i < n; ++i) c[i] += s * ak[i];
        }
    }
    return out;
}

Matrix elementwise_mul(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "elementwise_mul");
    Matrix out(a.rows(), a.cols());
    auto x = a.flat();
    auto y = b.flat();
    auto z = out.flat();
    for (std::size_t k = 0; k < z.size(); ++k) z[k] = x[k] * y[k];
    return out;
}

double squared_norm(const Matrix& a) {
    double acc = 0.0;
    for (double v : a.flat()) acc += v * v;
    return acc;
}

double frobenius_norm(const Matrix& a) { return std::sqrt(squared_norm(a)); }

double inner(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "inner");
    double acc = 0.0;
    auto x = a.flat();
    auto y = b.flat();
    for (std::size_t k = 0; k < x.size(); ++k) acc += x[k] * y[k];
    return acc;
}

double max_abs(const Matrix& a) {
    double m = 0.0;
    for (double v : a.flat()) m = std::max(m, std::abs(v));
    return m;
}

double max_value(const Matrix& a) {
    if (a.empty()) throw ShapeError("max_value: empty matrix");
    return *std::max_element(a.flat().begin(), a.flat().end());
}

double min_value(const Matrix& a) {
    if (a.empty()) throw ShapeError("min_value: empty matrix");
    return *std::min_element(a.flat().begin(), a.flat().end());
}

bool all_finite(const Matrix& a) {
    return std::all_of(a.flat().begin(), a.flat().end(), [](double v) { return std::isfinite(v); });
}

bool all_zero(const Matrix& a) {
    return std::all_of(a.flat().begin(), a.flat().end(), [](double v) { return v == 0.0; });
}

}  // namespace rpca
