#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cogkit::linalg {

/// Dense row-major matrix of doubles. Rows are the natural unit here: an
/// N x D matrix holds N vectors of dimension D.
class Matrix {
   public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const {
        return {data_.data() + r * cols_, cols_};
    }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool operator==(const Matrix&) const = default;

   private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

/// max_ij |a_ij - b_ij|
double max_abs_diff(const Matrix& a, const Matrix& b);

/// Scales every row to unit Euclidean length; zero rows are left unchanged.
void unit_normalize_rows(Matrix& m);

/// Subtracts the column mean from every column.
void center_columns(Matrix& m);

struct Svd {
    Matrix u;                   // m x n, orthonormal columns
    std::vector<double> sigma;  // n, descending
    Matrix v;                   // n x n, orthogonal
};

/// Thin SVD a = u * diag(sigma) * v^T via one-sided Jacobi rotations.
/// Requires rows >= cols. Built for the small dense matrices this project
/// works with (cols <= ~1024); robustness is preferred over speed.
/// Throws NumericalError if the sweep limit is reached before convergence.
Svd jacobi_svd(const Matrix& a, double tol = 1e-12, int max_sweeps = 100);

}  // namespace cogkit::linalg
