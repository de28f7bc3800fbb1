#include "kernels_impl.hpp"

#if PRUNEKIT_HAVE_AVX2_TU

#include <immintrin.h>

// AVX2 + FMA variants. Accumulation order inside every routine is fixed
// (vector lanes reduced in lane order, scalar tail last), so results are
// bitwise reproducible run to run.

namespace prunekit::kernels::avx2 {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

inline float hsum(__m256 v) {
    __m128 lo = _mm256_castps256_ps128(v);
    __m128 hi = _mm256_extractf128_ps(v, 1);
    lo = _mm_add_ps(lo, hi);
    lo = _mm_add_ps(lo, _mm_movehl_ps(lo, lo));
    lo = _mm_add_ss(lo, _mm_shuffle_ps(lo, lo, 1));
    return _mm_cvtss_f32(lo);
}

// f32 reductions widen to f64 lanes before accumulating.
double dot_f32(const float* a, const float* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 av = _mm256_loadu_ps(a + i);
        __m256 bv = _mm256_loadu_ps(b + i);
        __m256d alo = _mm256_cvtps_pd(_mm256_castps256_ps128(av));
        __m256d ahi = _mm256_cvtps_pd(_mm256_extractf128_ps(av, 1));
        __m256d blo = _mm256_cvtps_pd(_mm256_castps256_ps128(bv));
        __m256d bhi = _mm256_cvtps_pd(_mm256_extractf128_ps(bv, 1));
        acc0 = _mm256_fmadd_pd(alo, blo, acc0);
        acc1 = _mm256_fmadd_pd(ahi, bhi, acc1);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += double(a[i]) * double(b[i]);
    return acc;
}

double dot_f64(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double norm_sq_f32(const float* v, std::size_t n) { return dot_f32(v, v, n); }
double norm_sq_f64(const double* v, std::size_t n) { return dot_f64(v, v, n); }

CosineTerms cosine_f32(const float* u, const float* v, std::size_t n) {
    __m256d uv = _mm256_setzero_pd(), uu = _mm256_setzero_pd(), vv = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d a = _mm256_cvtps_pd(_mm_loadu_ps(u + i));
        __m256d b = _mm256_cvtps_pd(_mm_loadu_ps(v + i));
        uv = _mm256_fmadd_pd(a, b, uv);
        uu = _mm256_fmadd_pd(a, a, uu);
        vv = _mm256_fmadd_pd(b, b, vv);
    }
    CosineTerms t{hsum(uv), hsum(uu), hsum(vv)};
    for (; i < n; ++i) {
        const double a = double(u[i]);
        const double b = double(v[i]);
        t.uv += a * b;
        t.uu += a * a;
        t.vv += b * b;
    }
    return t;
}

CosineTerms cosine_f64(const double* u, const double* v, std::size_t n) {
    __m256d uv = _mm256_setzero_pd(), uu = _mm256_setzero_pd(), vv = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d a = _mm256_loadu_pd(u + i);
        __m256d b = _mm256_loadu_pd(v + i);
        uv = _mm256_fmadd_pd(a, b, uv);
        uu = _mm256_fmadd_pd(a, a, uu);
        vv = _mm256_fmadd_pd(b, b, vv);
    }
    CosineTerms t{hsum(uv), hsum(uu), hsum(vv)};
    for (; i < n; ++i) {
        t.uv += u[i] * v[i];
        t.uu += u[i] * u[i];
        t.vv += v[i] * v[i];
    }
    return t;
}

void axpy_f32(float* y, float a, const float* x, std::size_t n) {
    const __m256 av = _mm256_set1_ps(a);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 r = _mm256_fmadd_ps(av, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i));
        _mm256_storeu_ps(y + i, r);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void axpy_f64(double* y, double a, const double* x, std::size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d r = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        _mm256_storeu_pd(y + i, r);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void scaled_mul_f32(float* y, const float* x, const float* w, float s, std::size_t n) {
    const __m256 sv = _mm256_set1_ps(s);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 r = _mm256_mul_ps(_mm256_mul_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(w + i)), sv);
        _mm256_storeu_ps(y + i, r);
    }
    for (; i < n; ++i) y[i] = x[i] * w[i] * s;
}

void scaled_mul_f64(double* y, const double* x, const double* w, double s, std::size_t n) {
    const __m256d sv = _mm256_set1_pd(s);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d r = _mm256_mul_pd(_mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(w + i)), sv);
        _mm256_storeu_pd(y + i, r);
    }
    for (; i < n; ++i) y[i] = x[i] * w[i] * s;
}

// ---- GEMM nt: C[m,n] = A[m,k] * B[n,k]^T ----
// 2x4 register block; each C element is one k-dot reduced in fixed order.

inline float dot_row_f32(const float* a, const float* b, std::size_t k) {
    __m256 acc = _mm256_setzero_ps();
    std::size_t p = 0;
    for (; p + 8 <= k; p += 8) {
        acc = _mm256_fmadd_ps(_mm256_loadu_ps(a + p), _mm256_loadu_ps(b + p), acc);
    }
    float s = hsum(acc);
    for (; p < k; ++p) s += a[p] * b[p];
    return s;
}

inline double dot_row_f64(const double* a, const double* b, std::size_t k) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t p = 0;
    for (; p + 4 <= k; p += 4) {
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + p), _mm256_loadu_pd(b + p), acc);
    }
    double s = hsum(acc);
    for (; p < k; ++p) s += a[p] * b[p];
    return s;
}

void gemm_nt_f32(float* c, const float* a, const float* b, std::size_t m, std::size_t n,
                 std::size_t k, bool accumulate) {
    std::size_t i = 0;
    for (; i + 2 <= m; i += 2) {
        const float* a0 = a + i * k;
        const float* a1 = a0 + k;
        std::size_t j = 0;
        for (; j + 4 <= n; j += 4) {
            __m256 c00 = _mm256_setzero_ps(), c01 = _mm256_setzero_ps();
            __m256 c02 = _mm256_setzero_ps(), c03 = _mm256_setzero_ps();
            __m256 c10 = _mm256_setzero_ps(), c11 = _mm256_setzero_ps();
            __m256 c12 = _mm256_setzero_ps(), c13 = _mm256_setzero_ps();
            const float* b0 = b + j * k;
            const float* b1 = b0 + k;
            const float* b2 = b1 + k;
            const float* b3 = b2 + k;
            std::size_t p = 0;
            for (; p + 8 <= k; p += 8) {
                const __m256 va0 = _mm256_loadu_ps(a0 + p);
                const __m256 va1 = _mm256_loadu_ps(a1 + p);
                const __m256 vb0 = _mm256_loadu_ps(b0 + p);
                const __m256 vb1 = _mm256_loadu_ps(b1 + p);
                const __m256 vb2 = _mm256_loadu_ps(b2 + p);
                const __m256 vb3 = _mm256_loadu_ps(b3 + p);
                c00 = _mm256_fmadd_ps(va0, vb0, c00);
                c01 = _mm256_fmadd_ps(va0, vb1, c01);
                c02 = _mm256_fmadd_ps(va0, vb2, c02);
                c03 = _mm256_fmadd_ps(va0, vb3, c03);
                c10 = _mm256_fmadd_ps(va1, vb0, c10);
                c11 = _mm256_fmadd_ps(va1, vb1, c11);
                c12 = _mm256_fmadd_ps(va1, vb2, c12);
                c13 = _mm256_fmadd_ps(va1, vb3, c13);
            }
            float s00 = hsum(c00), s01 = hsum(c01), s02 = hsum(c02), s03 = hsum(c03);
            float s10 = hsum(c10), s11 = hsum(c11), s12 = hsum(c12), s13 = hsum(c13);
            for (; p < k; ++p) {
                s00 += a0[p] * b0[p];
                s01 += a0[p] * b1[p];
                s02 += a0[p] * b2[p];
                s03 += a0[p] * b3[p];
                s10 += a1[p] * b0[p];
                s11 += a1[p] * b1[p];
                s12 += a1[p] * b2[p];
                s13 += a1[p] * b3[p];
            }
            float* c0 = c + i * n + j;
            float* c1 = c0 + n;
            if (accumulate) {
                c0[0] += s00; c0[1] += s01; c0[2] += s02; c0[3] += s03;
                c1[0] += s10; c1[1] += s11; c1[2] += s12; c1[3] += s13;
            } else {
                c0[0] = s00; c0[1] = s01; c0[2] = s02; c0[3] = s03;
                c1[0] = s10; c1[1] = s11; c1[2] = s12; c1[3] = s13;
            }
        }
        for (; j < n; ++j) {
            const float* bj = b + j * k;
            const float s0 = dot_row_f32(a0, bj, k);
            const float s1 = dot_row_f32(a1, bj, k);
            if (accumulate) {
                c[i * n + j] += s0;
                c[(i + 1) * n + j] += s1;
            } else {
                c[i * n + j] = s0;
                c[(i + 1) * n + j] = s1;
            }
        }
    }
    for (; i < m; ++i) {
        const float* ai = a + i * k;
        for (std::size_t j = 0; j < n; ++j) {
            const float s = dot_row_f32(ai, b + j * k, k);
            if (accumulate) {
                c[i * n + j] += s;
            } else {
                c[i * n + j] = s;
            }
        }
    }
}

void gemm_nt_f64(double* c, const double* a, const double* b, std::size_t m, std::size_t n,
                 std::size_t k, bool accumulate) {
    std::size_t i = 0;
    for (; i + 2 <= m; i += 2) {
        const double* a0 = a + i * k;
        const double* a1 = a0 + k;
        std::size_t j = 0;
        for (; j + 2 <= n; j += 2) {
            __m256d c00 = _mm256_setzero_pd(), c01 = _mm256_setzero_pd();
            __m256d c10 = _mm256_setzero_pd(), c11 = _mm256_setzero_pd();
            const double* b0 = b + j * k;
            const double* b1 = b0 + k;
            std::size_t p = 0;
            for (; p + 4 <= k; p += 4) {
                const __m256d va0 = _mm256_loadu_pd(a0 + p);
                const __m256d va1 = _mm256_loadu_pd(a1 + p);
                const __m256d vb0 = _mm256_loadu_pd(b0 + p);
                const __m256d vb1 = _mm256_loadu_pd(b1 + p);
                c00 = _mm256_fmadd_pd(va0, vb0, c00);
                c01 = _mm256_fmadd_pd(va0, vb1, c01);
                c10 = _mm256_fmadd_pd(va1, vb0, c10);
                c11 = _mm256_fmadd_pd(va1, vb1, c11);
            }
            double s00 = hsum(c00), s01 = hsum(c01), s10 = hsum(c10), s11 = hsum(c11);
            for (; p < k; ++p) {
                s00 += a0[p] * b0[p];
                s01 += a0[p] * b1[p];
                s10 += a1[p] * b0[p];
                s11 += a1[p] * b1[p];
            }
            double* c0 = c + i * n + j;
            double* c1 = c0 + n;
            if (accumulate) {
                c0[0] += s00; c0[1] += s01;
                c1[0] += s10; c1[1] += s11;
            } else {
                c0[0] = s00; c0[1] = s01;
                c1[0] = s10; c1[1] = s11;
            }
        }
        for (; j < n; ++j) {
            const double* bj = b + j * k;
            const double s0 = dot_row_f64(a0, bj, k);
            const double s1 = dot_row_f64(a1, bj, k);
            if (accumulate) {
                c[i * n + j] += s0;
                c[(i + 1) * n + j] += s1;
            } else {
                c[i * n + j] = s0;
                c[(i + 1) * n + j] = s1;
            }
        }
    }
    for (; i < m; ++i) {
        const double* ai = a + i * k;
        for (std::size_t j = 0; j < n; ++j) {
            const double s = dot_row_f64(ai, b + j * k, k);
            if (accumulate) {
                c[i * n + j] += s;
            } else {
                c[i * n + j] = s;
            }
        }
    }
}

// ---- GEMM nn / tn: rank-1 update over k, C rows stay resident ----

inline void row_fma_f32(float* c, const float* b, float a, std::size_t n) {
    const __m256 av = _mm256_set1_ps(a);
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
        _mm256_storeu_ps(c + j, _mm256_fmadd_ps(av, _mm256_loadu_ps(b + j), _mm256_loadu_ps(c + j)));
    }
    for (; j < n; ++j) c[j] += a * b[j];
}

void gemm_nn_f32(float* c, const float* a, const float* b, std::size_t m, std::size_t n,
                 std::size_t k, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
        float* ci = c + i * n;
        if (!accumulate) {
            for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0f;
        }
        for (std::size_t p = 0; p < k; ++p) {
            row_fma_f32(ci, b + p * n, a[i * k + p], n);
        }
    }
}

void gemm_nn_f64(double* c, const double* a, const double* b, std::size_t m, std::size_t n,
                 std::size_t k, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
        double* ci = c + i * n;
        if (!accumulate) {
            for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0;
        }
        for (std::size_t p = 0; p < k; ++p) {
            const __m256d av = _mm256_set1_pd(a[i * k + p]);
            const double* bp = b + p * n;
            std::size_t j = 0;
            for (; j + 4 <= n; j += 4) {
                _mm256_storeu_pd(ci + j,
                                 _mm256_fmadd_pd(av, _mm256_loadu_pd(bp + j), _mm256_loadu_pd(ci + j)));
            }
            for (; j < n; ++j) ci[j] += a[i * k + p] * bp[j];
        }
    }
}

void gemm_tn_f32(float* c, const float* a, const float* b, std::size_t m, std::size_t n,
                 std::size_t k, std::size_t lda, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
        float* ci = c + i * n;
        if (!accumulate) {
            for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0f;
        }
        for (std::size_t p = 0; p < k; ++p) {
            row_fma_f32(ci, b + p * n, a[p * lda + i], n);
        }
    }
}

void gemm_tn_f64(double* c, const double* a, const double* b, std::size_t m, std::size_t n,
                 std::size_t k, std::size_t lda, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
        double* ci = c + i * n;
        if (!accumulate) {
            for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0;
        }
        for (std::size_t p = 0; p < k; ++p) {
            const __m256d av = _mm256_set1_pd(a[p * lda + i]);
            const double* bp = b + p * n;
            std::size_t j = 0;
            for (; j + 4 <= n; j += 4) {
                _mm256_storeu_pd(ci + j,
                                 _mm256_fmadd_pd(av, _mm256_loadu_pd(bp + j), _mm256_loadu_pd(ci + j)));
            }
            for (; j < n; ++j) ci[j] += a[p * lda + i] * bp[j];
        }
    }
}

}  // namespace

const Ops& ops() {
    static const Ops table = {
        dot_f32,        dot_f64,        norm_sq_f32,    norm_sq_f64, cosine_f32,  cosine_f64,
        axpy_f32,       axpy_f64,       scaled_mul_f32, scaled_mul_f64, gemm_nt_f32, gemm_nt_f64,
        gemm_nn_f32,    gemm_nn_f64,    gemm_tn_f32,    gemm_tn_f64,
    };
    return table;
}

}  // namespace prunekit::kernels::avx2

#endif  // PRUNEKIT_HAVE_AVX2_TU
