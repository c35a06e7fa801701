#pragma once

#include <cstddef>
#include <cstdint>

// Data-parallel primitives behind all dense math in the library.
// Every kernel has a scalar reference implementation and, on x86-64,
// an AVX2 variant; the active set is chosen once at runtime from CPU
// capabilities. The two variants are equivalence-tested against each
// other (bit-exact where the operation permits, tight relative
// tolerance for reduction-order-sensitive sums).

namespace icmh::kernels {

enum class Backend { Scalar, Avx2 };

// Table of kernel entry points for one backend.
struct KernelTable {
    double (*dot)(const double*, const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    void (*scale)(double, double*, std::size_t);
    void (*clamp_unit)(double*, std::size_t);
    double (*sq_diff_sum)(const double*, const double*, std::size_t);
    std::uint64_t (*hamming_words)(const std::uint64_t*, const std::uint64_t*, std::size_t);
    void (*matmul_nn)(const double*, const double*, double*, std::size_t, std::size_t, std::size_t);
    void (*matmul_nt)(const double*, const double*, double*, std::size_t, std::size_t, std::size_t);
    void (*matmul_tn)(const double*, const double*, double*, std::size_t, std::size_t, std::size_t);
};

const KernelTable& scalar_table();
#if defined(__x86_64__)
const KernelTable& avx2_table();
#endif

Backend active_backend();
const char* backend_name(Backend b);

// Switches the active kernel set; returns false when the backend is
// unavailable on this CPU. Intended for equivalence tests.
bool force_backend(Backend b);

// sum_i a[i]*b[i]
double dot(const double* a, const double* b, std::size_t n);

// y[i] += alpha * x[i]
void axpy(double alpha, const double* x, double* y, std::size_t n);

// x[i] *= alpha
void scale(double alpha, double* x, std::size_t n);

// x[i] <- min(max(x[i], -1), 1); the projection onto [-1,1]^n
void clamp_unit(double* x, std::size_t n);

// sum_i (a[i]-b[i])^2
double sq_diff_sum(const double* a, const double* b, std::size_t n);

// popcount of XOR over nwords 64-bit words
std::uint64_t hamming_words(const std::uint64_t* a, const std::uint64_t* b, std::size_t nwords);

// Row-major GEMM variants, C is overwritten.
// matmul_nn: C(m,n) = A(m,k) * B(k,n)
void matmul_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n);
// matmul_nt: C(m,n) = A(m,k) * B(n,k)^T
void matmul_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n);
// matmul_tn: C(m,n) = A(k,m)^T * B(k,n)
void matmul_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n);

}  // namespace icmh::kernels
