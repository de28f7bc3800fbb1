#pragma once

#include <cstddef>

#include "prunekit/kernels.hpp"

// Internal: per-backend entry points. The avx2 namespace is only referenced
// when the TU compiled with -mavx2 -mfma is linked in (x86-64 builds).

namespace prunekit::kernels {

struct Ops {
    double (*dot_f32)(const float*, const float*, std::size_t);
    double (*dot_f64)(const double*, const double*, std::size_t);
    double (*norm_sq_f32)(const float*, std::size_t);
    double (*norm_sq_f64)(const double*, std::size_t);
    CosineTerms (*cosine_f32)(const float*, const float*, std::size_t);
    CosineTerms (*cosine_f64)(const double*, const double*, std::size_t);
    void (*axpy_f32)(float*, float, const float*, std::size_t);
    void (*axpy_f64)(double*, double, const double*, std::size_t);
    void (*scaled_mul_f32)(float*, const float*, const float*, float, std::size_t);
    void (*scaled_mul_f64)(double*, const double*, const double*, double, std::size_t);
    // Row-range GEMM workers: operate on rows [0,m) of C with the leading
    // dimensions of the full problem; the dispatcher offsets pointers when
    // splitting across threads. lda is the row stride of A (tn only).
    void (*gemm_nt_f32)(float*, const float*, const float*, std::size_t, std::size_t,
                        std::size_t, bool);
    void (*gemm_nt_f64)(double*, const double*, const double*, std::size_t, std::size_t,
                        std::size_t, bool);
    void (*gemm_nn_f32)(float*, const float*, const float*, std::size_t, std::size_t,
                        std::size_t, bool);
    void (*gemm_nn_f64)(double*, const double*, const double*, std::size_t, std::size_t,
                        std::size_t, bool);
    void (*gemm_tn_f32)(float*, const float*, const float*, std::size_t, std::size_t,
                        std::size_t, std::size_t, bool);
    void (*gemm_tn_f64)(double*, const double*, const double*, std::size_t, std::size_t,
                        std::size_t, std::size_t, bool);
};

namespace scalar {
const Ops& ops();
}

#if defined(__x86_64__) || defined(_M_X64)
#define PRUNEKIT_HAVE_AVX2_TU 1
namespace avx2 {
const Ops& ops();
}
#else
#define PRUNEKIT_HAVE_AVX2_TU 0
#endif

}  // namespace prunekit::kernels
