#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace icmh {

// Dense row-major double matrix. All heavy products route through the
// dispatched kernels.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* row(std::size_t i) { return data_.data() + i * cols_; }
    const double* row(std::size_t i) const { return data_.data() + i * cols_; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    bool operator==(const Matrix& o) const = default;

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);     // A * B
Matrix matmul_nt(const Matrix& a, const Matrix& b);  // A * B^T
Matrix matmul_tn(const Matrix& a, const Matrix& b);  // A^T * B
Matrix transpose(const Matrix& a);

double frob_sq(const Matrix& a);
double frob_sq_diff(const Matrix& a, const Matrix& b);
double buffer_dot(const Matrix& a, const Matrix& b);  // <A, B> elementwise

void add_scaled(Matrix& y, double alpha, const Matrix& x);  // Y += alpha X
void scale_inplace(Matrix& a, double alpha);
void clamp_unit_inplace(Matrix& a);

bool all_finite(const Matrix& a);
bool within_unit_interval(const Matrix& a);  // every entry in [-1, 1]

// Rows of `a` selected by `idx`, in order.
Matrix take_rows(const Matrix& a, const std::vector<int>& idx);
// [top; bottom]
Matrix vstack(const Matrix& top, const Matrix& bottom);

// In-place lower Cholesky of an SPD matrix; returns false if a pivot is
// not strictly positive.
bool cholesky_factor(Matrix& a);
// Solves L L^T x = b for one right-hand side.
std::vector<double> cholesky_solve(const Matrix& l, const std::vector<double>& b);

}  // namespace icmh
