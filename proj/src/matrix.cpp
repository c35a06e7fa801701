#include "icmh/matrix.hpp"

#include <cmath>
#include <stdexcept>

#include "icmh/kernels.hpp"

namespace icmh {

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m(rows.size(), rows.size() ? rows.begin()->size() : 0);
    std::size_t i = 0;
    for (const auto& r : rows) {
        if (r.size() != m.cols()) throw std::invalid_argument("from_rows: ragged rows");
        std::size_t j = 0;
        for (double v : r) m(i, j++) = v;
        ++i;
    }
    return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimensions differ");
    Matrix c(a.rows(), b.cols());
    kernels::matmul_nn(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.cols());
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw std::invalid_argument("matmul_nt: inner dimensions differ");
    Matrix c(a.rows(), b.rows());
    kernels::matmul_nt(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.rows());
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw std::invalid_argument("matmul_tn: inner dimensions differ");
    Matrix c(a.cols(), b.cols());
    kernels::matmul_tn(a.data(), b.data(), c.data(), a.cols(), a.rows(), b.cols());
    return c;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

double frob_sq(const Matrix& a) { return kernels::dot(a.data(), a.data(), a.size()); }

double frob_sq_diff(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("frob_sq_diff: shape mismatch");
    return kernels::sq_diff_sum(a.data(), b.data(), a.size());
}

double buffer_dot(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("buffer_dot: shape mismatch");
    return kernels::dot(a.data(), b.data(), a.size());
}

void add_scaled(Matrix& y, double alpha, const Matrix& x) {
    if (!y.same_shape(x)) throw std::invalid_argument("add_scaled: shape mismatch");
    kernels::axpy(alpha, x.data(), y.data(), y.size());
}

void scale_inplace(Matrix& a, double alpha) { kernels::scale(alpha, a.data(), a.size()); }

void clamp_unit_inplace(Matrix& a) { kernels::clamp_unit(a.data(), a.size()); }

bool all_finite(const Matrix& a) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!std::isfinite(a.data()[i])) return false;
    return true;
}

bool within_unit_interval(const Matrix& a) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double v = a.data()[i];
        if (!(v >= -1.0 && v <= 1.0)) return false;
    }
    return true;
}

Matrix take_rows(const Matrix& a, const std::vector<int>& idx) {
    Matrix out(idx.size(), a.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const double* src = a.row(static_cast<std::size_t>(idx[i]));
        double* dst = out.row(i);
        for (std::size_t j = 0; j < a.cols(); ++j) dst[j] = src[j];
    }
    return out;
}

Matrix vstack(const Matrix& top, const Matrix& bottom) {
    if (top.empty()) return bottom;
    if (bottom.empty()) return top;
    if (top.cols() != bottom.cols()) throw std::invalid_argument("vstack: column mismatch");
    Matrix out(top.rows() + bottom.rows(), top.cols());
    for (std::size_t i = 0; i < top.rows(); ++i)
        for (std::size_t j = 0; j < top.cols(); ++j) out(i, j) = top(i, j);
    for (std::size_t i = 0; i < bottom.rows(); ++i)
        for (std::size_t j = 0; j < top.cols(); ++j) out(top.rows() + i, j) = bottom(i, j);
    return out;
}

bool cholesky_factor(Matrix& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("cholesky_factor: not square");
    const std::size_t n = a.rows();
    // numerically singular inputs can round to a tiny positive pivot, so
    // pivots are rejected relative to the largest input diagonal
    double diag_max = 0.0;
    for (std::size_t j = 0; j < n; ++j) diag_max = std::max(diag_max, std::abs(a(j, j)));
    const double pivot_floor = 1e-12 * diag_max;
    for (std::size_t j = 0; j < n; ++j) {
        const double d = a(j, j) - kernels::dot(a.row(j), a.row(j), j);
        if (d <= pivot_floor || !std::isfinite(d)) return false;
        a(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            const double s = kernels::dot(a.row(i), a.row(j), j);
            a(i, j) = (a(i, j) - s) / a(j, j);
        }
    }
    // zero the strict upper triangle so the factor is usable as-is
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) a(i, j) = 0.0;
    return true;
}

std::vector<double> cholesky_solve(const Matrix& l, const std::vector<double>& b) {
    const std::size_t n = l.rows();
    if (b.size() != n) throw std::invalid_argument("cholesky_solve: size mismatch");
    std::vector<double> y(n), x(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = (b[i] - kernels::dot(l.row(i), y.data(), i)) / l(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t j = ii + 1; j < n; ++j) s -= l(j, ii) * x[j];
        x[ii] = s / l(ii, ii);
    }
    return x;
}

}  // namespace icmh
