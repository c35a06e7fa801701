#include "icmh/kernels.hpp"

#include "icmh/cpu_features.hpp"

namespace icmh::kernels {
namespace {

struct Dispatch {
    const KernelTable* table;
    Backend backend;
    Dispatch() {
#if defined(__x86_64__)
        if (cpu::has_avx2()) {
            table = &avx2_table();
            backend = Backend::Avx2;
            return;
        }
#endif
        table = &scalar_table();
        backend = Backend::Scalar;
    }
};

Dispatch& dispatch() {
    static Dispatch d;
    return d;
}

}  // namespace

Backend active_backend() { return dispatch().backend; }

const char* backend_name(Backend b) {
    switch (b) {
        case Backend::Scalar: return "scalar";
        case Backend::Avx2: return "avx2";
    }
    return "?";
}

bool force_backend(Backend b) {
    if (b == Backend::Scalar) {
        dispatch().table = &scalar_table();
        dispatch().backend = b;
        return true;
    }
#if defined(__x86_64__)
    if (b == Backend::Avx2 && cpu::has_avx2()) {
        dispatch().table = &avx2_table();
        dispatch().backend = b;
        return true;
    }
#endif
    return false;
}

double dot(const double* a, const double* b, std::size_t n) {
    return dispatch().table->dot(a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    dispatch().table->axpy(alpha, x, y, n);
}

void scale(double alpha, double* x, std::size_t n) {
    dispatch().table->scale(alpha, x, n);
}

void clamp_unit(double* x, std::size_t n) {
    dispatch().table->clamp_unit(x, n);
}

double sq_diff_sum(const double* a, const double* b, std::size_t n) {
    return dispatch().table->sq_diff_sum(a, b, n);
}

std::uint64_t hamming_words(const std::uint64_t* a, const std::uint64_t* b, std::size_t nwords) {
    return dispatch().table->hamming_words(a, b, nwords);
}

void matmul_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
    dispatch().table->matmul_nn(a, b, c, m, k, n);
}

void matmul_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
    dispatch().table->matmul_nt(a, b, c, m, k, n);
}

void matmul_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
    dispatch().table->matmul_tn(a, b, c, m, k, n);
}

}  // namespace icmh::kernels
