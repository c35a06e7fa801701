#include "icmh/kernels.hpp"

#if defined(__x86_64__)

#include <immintrin.h>

#include <bit>

// AVX2/FMA kernel variants. Only reachable through the dispatcher after
// a cpuid check, so this translation unit may be compiled with -mavx2
// unconditionally on x86-64.

namespace icmh::kernels {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256d y0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        __m256d y1 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4));
        _mm256_storeu_pd(y + i, y0);
        _mm256_storeu_pd(y + i + 4, y1);
    }
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_avx2(double alpha, double* x, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    }
    for (; i < n; ++i) x[i] *= alpha;
}

void clamp_unit_avx2(double* x, std::size_t n) {
    const __m256d lo = _mm256_set1_pd(-1.0);
    const __m256d hi = _mm256_set1_pd(1.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(x + i);
        _mm256_storeu_pd(x + i, _mm256_min_pd(_mm256_max_pd(v, lo), hi));
    }
    for (; i < n; ++i) {
        double v = x[i];
        if (v < -1.0) v = -1.0;
        if (v > 1.0) v = 1.0;
        x[i] = v;
    }
}

double sq_diff_sum_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
        acc0 = _mm256_fmadd_pd(d0, d0, acc0);
        acc1 = _mm256_fmadd_pd(d1, d1, acc1);
    }
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc0 = _mm256_fmadd_pd(d, d, acc0);
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// Nibble-LUT popcount (vpshufb): counts bytes of a ^ b, accumulates via
// sad against zero into four 64-bit lanes.
std::uint64_t hamming_words_avx2(const std::uint64_t* a, const std::uint64_t* b, std::size_t nwords) {
    const __m256i lut = _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4,
                                         0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4);
    const __m256i low_mask = _mm256_set1_epi8(0x0f);
    __m256i acc = _mm256_setzero_si256();
    std::size_t i = 0;
    for (; i + 4 <= nwords; i += 4) {
        __m256i v = _mm256_xor_si256(
            _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i)),
            _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i)));
        __m256i lo = _mm256_and_si256(v, low_mask);
        __m256i hi = _mm256_and_si256(_mm256_srli_epi16(v, 4), low_mask);
        __m256i cnt = _mm256_add_epi8(_mm256_shuffle_epi8(lut, lo),
                                      _mm256_shuffle_epi8(lut, hi));
        acc = _mm256_add_epi64(acc, _mm256_sad_epu8(cnt, _mm256_setzero_si256()));
    }
    alignas(32) std::uint64_t lanes[4];
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
    std::uint64_t c = lanes[0] + lanes[1] + lanes[2] + lanes[3];
    for (; i < nwords; ++i) c += std::popcount(a[i] ^ b[i]);
    return c;
}

void matmul_nn_avx2(const double* a, const double* b, double* c,
                    std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        std::size_t j = 0;
        for (; j + 4 <= n; j += 4) _mm256_storeu_pd(crow + j, _mm256_setzero_pd());
        for (; j < n; ++j) crow[j] = 0.0;
        const double* arow = a + i * k;
        for (std::size_t l = 0; l < k; ++l) {
            const __m256d av = _mm256_set1_pd(arow[l]);
            const double* brow = b + l * n;
            std::size_t jj = 0;
            for (; jj + 8 <= n; jj += 8) {
                __m256d c0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + jj), _mm256_loadu_pd(crow + jj));
                __m256d c1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + jj + 4), _mm256_loadu_pd(crow + jj + 4));
                _mm256_storeu_pd(crow + jj, c0);
                _mm256_storeu_pd(crow + jj + 4, c1);
            }
            for (; jj + 4 <= n; jj += 4) {
                _mm256_storeu_pd(crow + jj, _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + jj), _mm256_loadu_pd(crow + jj)));
            }
            const double avs = arow[l];
            for (; jj < n; ++jj) crow[jj] += avs * brow[jj];
        }
    }
}

void matmul_nt_avx2(const double* a, const double* b, double* c,
                    std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] = dot_avx2(arow, b + j * k, k);
    }
}

void matmul_tn_avx2(const double* a, const double* b, double* c,
                    std::size_t m, std::size_t k, std::size_t n) {
    std::size_t z = 0;
    for (; z + 4 <= m * n; z += 4) _mm256_storeu_pd(c + z, _mm256_setzero_pd());
    for (; z < m * n; ++z) c[z] = 0.0;
    for (std::size_t l = 0; l < k; ++l) {
        const double* arow = a + l * m;
        const double* brow = b + l * n;
        for (std::size_t i = 0; i < m; ++i) {
            axpy_avx2(arow[i], brow, c + i * n, n);
        }
    }
}

}  // namespace

const KernelTable& avx2_table() {
    static const KernelTable t = {
        dot_avx2,       axpy_avx2,        scale_avx2,
        clamp_unit_avx2, sq_diff_sum_avx2, hamming_words_avx2,
        matmul_nn_avx2,  matmul_nt_avx2,   matmul_tn_avx2,
    };
    return t;
}

}  // namespace icmh::kernels

#endif  // __x86_64__
