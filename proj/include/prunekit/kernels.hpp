#pragma once

#include <cstddef>

// Data-parallel arithmetic core. Every routine has a scalar reference
// implementation and (on x86-64) an AVX2+FMA variant; the active variant is
// chosen once at runtime from CPUID, overridable via set_backend() or the
// PRUNEKIT_BACKEND environment variable (scalar|avx2|auto).
//
// Determinism contract: for a fixed backend the result of every routine is
// bitwise reproducible. Reductions (dot, norm_sq,
// cosine_terms) accumulate in 64-bit regardless of element type. GEMMs are
// partitioned across threads by output row, so each output element is reduced
// sequentially by exactly one thread and results do not depend on the thread
// count.

namespace prunekit::kernels {

enum class Backend { kAuto, kScalar, kAvx2 };

void set_backend(Backend b);
Backend active_backend();
const char* backend_name();

void set_threads(int n);
int threads();

double dot(const float* a, const float* b, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);

double norm_sq(const float* v, std::size_t n);
double norm_sq(const double* v, std::size_t n);

struct CosineTerms {
    double uv = 0.0;
    double uu = 0.0;
    double vv = 0.0;
};

// Single-pass u·v, u·u, v·v.
CosineTerms cosine_terms(const float* u, const float* v, std::size_t n);
CosineTerms cosine_terms(const double* u, const double* v, std::size_t n);

// y += a * x
void axpy(float* y, float a, const float* x, std::size_t n);
void axpy(double* y, double a, const double* x, std::size_t n);

// y[i] = x[i] * w[i] * s
void scaled_mul(float* y, const float* x, const float* w, float s, std::size_t n);
void scaled_mul(double* y, const double* x, const double* w, double s, std::size_t n);

// Row-major GEMM variants. With accumulate=false C is overwritten.
// C[M,N] = A[M,K] * B[N,K]^T      (projection with row-major weights)
void matmul_nt(float* c, const float* a, const float* b, std::size_t m, std::size_t n,
               std::size_t k, bool accumulate);
void matmul_nt(double* c, const double* a, const double* b, std::size_t m, std::size_t n,
               std::size_t k, bool accumulate);

// C[M,N] = A[M,K] * B[K,N]
void matmul_nn(float* c, const float* a, const float* b, std::size_t m, std::size_t n,
               std::size_t k, bool accumulate);
void matmul_nn(double* c, const double* a, const double* b, std::size_t m, std::size_t n,
               std::size_t k, bool accumulate);

// C[M,N] = A[K,M]^T * B[K,N]      (weight gradients)
void matmul_tn(float* c, const float* a, const float* b, std::size_t m, std::size_t n,
               std::size_t k, bool accumulate);
void matmul_tn(double* c, const double* a, const double* b, std::size_t m, std::size_t n,
               std::size_t k, bool accumulate);

}  // namespace prunekit::kernels
