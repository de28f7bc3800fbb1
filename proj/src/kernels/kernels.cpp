#include "prunekit/kernels.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "kernels_impl.hpp"

namespace prunekit::kernels {

// ============================================================
// Scalar reference kernels
// ============================================================

namespace scalar {
namespace {

template <typename T>
double dot_impl(const T* a, const T* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += double(a[i]) * double(b[i]);
    return acc;
}

template <typename T>
double norm_sq_impl(const T* v, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += double(v[i]) * double(v[i]);
    return acc;
}

template <typename T>
CosineTerms cosine_impl(const T* u, const T* v, std::size_t n) {
    CosineTerms t;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = double(u[i]);
        const double b = double(v[i]);
        t.uv += a * b;
        t.uu += a * a;
        t.vv += b * b;
    }
    return t;
}

template <typename T>
void axpy_impl(T* y, T a, const T* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

template <typename T>
void scaled_mul_impl(T* y, const T* x, const T* w, T s, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] * w[i] * s;
}

// C[m,n] = A[m,k] * B[n,k]^T
template <typename T>
void gemm_nt_impl(T* c, const T* a, const T* b, std::size_t m, std::size_t n, std::size_t k,
                  bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
        const T* ai = a + i * k;
        for (std::size_t j = 0; j < n; ++j) {
            const T* bj = b + j * k;
            T acc = accumulate ? c[i * n + j] : T(0);
            for (std::size_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
            c[i * n + j] = acc;
        }
    }
}

// C[m,n] = A[m,k] * B[k,n]
template <typename T>
void gemm_nn_impl(T* c, const T* a, const T* b, std::size_t m, std::size_t n, std::size_t k,
                  bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
        T* ci = c + i * n;
        if (!accumulate) {
            for (std::size_t j = 0; j < n; ++j) ci[j] = T(0);
        }
        for (std::size_t p = 0; p < k; ++p) {
            const T av = a[i * k + p];
            const T* bp = b + p * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
        }
    }
}

// C[m,n] = A[.,m]^T * B[.,n] over k rows; lda is the row stride of A.
template <typename T>
void gemm_tn_impl(T* c, const T* a, const T* b, std::size_t m, std::size_t n, std::size_t k,
                  std::size_t lda, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
        T* ci = c + i * n;
        if (!accumulate) {
            for (std::size_t j = 0; j < n; ++j) ci[j] = T(0);
        }
        for (std::size_t p = 0; p < k; ++p) {
            const T av = a[p * lda + i];
            const T* bp = b + p * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
        }
    }
}

}  // namespace

const Ops& ops() {
    static const Ops table = {
        dot_impl<float>,        dot_impl<double>,        norm_sq_impl<float>,
        norm_sq_impl<double>,   cosine_impl<float>,      cosine_impl<double>,
        axpy_impl<float>,       axpy_impl<double>,       scaled_mul_impl<float>,
        scaled_mul_impl<double>, gemm_nt_impl<float>,    gemm_nt_impl<double>,
        gemm_nn_impl<float>,    gemm_nn_impl<double>,    gemm_tn_impl<float>,
        gemm_tn_impl<double>,
    };
    return table;
}

}  // namespace scalar

// ============================================================
// Backend selection
// ============================================================

namespace {

bool cpu_has_avx2_fma() {
#if PRUNEKIT_HAVE_AVX2_TU
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend resolve(Backend requested) {
    if (requested == Backend::kAvx2) return Backend::kAvx2;
    if (requested == Backend::kScalar) return Backend::kScalar;
    if (const char* env = std::getenv("PRUNEKIT_BACKEND")) {
        const std::string s(env);
        if (s == "scalar") return Backend::kScalar;
        if (s == "avx2") return Backend::kAvx2;
    }
    return cpu_has_avx2_fma() ? Backend::kAvx2 : Backend::kScalar;
}

std::atomic<const Ops*> g_ops{nullptr};
std::atomic<Backend> g_backend{Backend::kAuto};
std::once_flag g_init_once;

const Ops& backend_ops(Backend b) {
#if PRUNEKIT_HAVE_AVX2_TU
    if (b == Backend::kAvx2) return avx2::ops();
#endif
    return scalar::ops();
}

void init_default() {
    const Backend b = resolve(Backend::kAuto);
    g_backend.store(b);
    g_ops.store(&backend_ops(b));
}

const Ops& ops() {
    std::call_once(g_init_once, init_default);
    return *g_ops.load();
}

// ============================================================
// Thread pool (row-partitioned GEMM only)
// ============================================================

int default_threads() {
    if (const char* env = std::getenv("PRUNEKIT_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1 && v <= 64) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : int(hw > 8 ? 8 : hw);
}

std::atomic<int> g_threads{0};

class Pool {
public:
    static Pool& instance() {
        static Pool pool;
        return pool;
    }

    // Runs fn(0..jobs-1), executing job 0 on the caller thread. Concurrent
    // callers are serialized; GEMMs are never nested.
    void run(int jobs, const std::function<void(int)>& fn) {
        if (jobs <= 1) {
            fn(0);
            return;
        }
        std::lock_guard<std::mutex> run_lock(run_mu_);
        ensure_workers(jobs - 1);
        {
            std::unique_lock<std::mutex> lock(mu_);
            fn_ = &fn;
            next_job_ = 1;
            jobs_ = jobs;
            pending_ = jobs - 1;
            ++epoch_;
        }
        cv_.notify_all();
        fn(0);
        std::unique_lock<std::mutex> lock(mu_);
        done_cv_.wait(lock, [&] { return pending_ == 0; });
        fn_ = nullptr;
    }

private:
    Pool() = default;
    ~Pool() {
        {
            std::unique_lock<std::mutex> lock(mu_);
            stop_ = true;
        }
        cv_.notify_all();
        for (auto& w : workers_) w.join();
    }

    void ensure_workers(int n) {
        std::unique_lock<std::mutex> lock(mu_);
        while (int(workers_.size()) < n) {
            workers_.emplace_back([this] { worker_loop(); });
        }
    }

    void worker_loop() {
        std::uint64_t seen = 0;
        for (;;) {
            const std::function<void(int)>* fn = nullptr;
            int job = -1;
            {
                std::unique_lock<std::mutex> lock(mu_);
                cv_.wait(lock, [&] { return stop_ || (epoch_ != seen && next_job_ < jobs_); });
                if (stop_) return;
                if (next_job_ >= jobs_) {
                    seen = epoch_;
                    continue;
                }
                fn = fn_;
                job = next_job_++;
                if (next_job_ >= jobs_) seen = epoch_;
            }
            (*fn)(job);
            std::unique_lock<std::mutex> lock(mu_);
            if (--pending_ == 0) done_cv_.notify_all();
        }
    }

    std::mutex run_mu_;
    std::mutex mu_;
    std::condition_variable cv_, done_cv_;
    std::vector<std::thread> workers_;
    const std::function<void(int)>* fn_ = nullptr;
    int next_job_ = 0, jobs_ = 0, pending_ = 0;
    std::uint64_t epoch_ = 0;
    bool stop_ = false;
};

// Split rows [0,m) into contiguous chunks, one per job. Each output row is
// produced entirely by one thread, so results match the serial run bitwise.
template <typename Fn>
void parallel_rows(std::size_t m, std::size_t work_per_row, const Fn& fn) {
    int nt = threads();
    const std::size_t total = m * work_per_row;
    if (nt > 1 && (total < 1u << 16 || m < 2)) nt = 1;
    if (nt == 1) {
        fn(0, m);
        return;
    }
    if (std::size_t(nt) > m) nt = int(m);
    const std::size_t chunk = (m + nt - 1) / nt;
    std::function<void(int)> job = [&](int t) {
        const std::size_t r0 = std::size_t(t) * chunk;
        const std::size_t r1 = r0 + chunk < m ? r0 + chunk : m;
        if (r0 < r1) fn(r0, r1);
    };
    Pool::instance().run(nt, job);
}

}  // namespace

void set_backend(Backend b) {
    std::call_once(g_init_once, init_default);
    const Backend resolved = resolve(b);
    g_backend.store(resolved);
    g_ops.store(&backend_ops(resolved));
}

Backend active_backend() {
    std::call_once(g_init_once, init_default);
    return g_backend.load();
}

const char* backend_name() {
    return active_backend() == Backend::kAvx2 ? "avx2" : "scalar";
}

void set_threads(int n) {
    if (n < 1) n = 1;
    if (n > 64) n = 64;
    g_threads.store(n);
}

int threads() {
    int n = g_threads.load();
    if (n == 0) {
        n = default_threads();
        g_threads.store(n);
    }
    return n;
}

// ============================================================
// Public entry points
// ============================================================

double dot(const float* a, const float* b, std::size_t n) { return ops().dot_f32(a, b, n); }
double dot(const double* a, const double* b, std::size_t n) { return ops().dot_f64(a, b, n); }

double norm_sq(const float* v, std::size_t n) { return ops().norm_sq_f32(v, n); }
double norm_sq(const double* v, std::size_t n) { return ops().norm_sq_f64(v, n); }

CosineTerms cosine_terms(const float* u, const float* v, std::size_t n) {
    return ops().cosine_f32(u, v, n);
}
CosineTerms cosine_terms(const double* u, const double* v, std::size_t n) {
    return ops().cosine_f64(u, v, n);
}

void axpy(float* y, float a, const float* x, std::size_t n) { ops().axpy_f32(y, a, x, n); }
void axpy(double* y, double a, const double* x, std::size_t n) { ops().axpy_f64(y, a, x, n); }

void scaled_mul(float* y, const float* x, const float* w, float s, std::size_t n) {
    ops().scaled_mul_f32(y, x, w, s, n);
}
void scaled_mul(double* y, const double* x, const double* w, double s, std::size_t n) {
    ops().scaled_mul_f64(y, x, w, s, n);
}

void matmul_nt(float* c, const float* a, const float* b, std::size_t m, std::size_t n,
               std::size_t k, bool accumulate) {
    const Ops& o = ops();
    parallel_rows(m, n * k, [&](std::size_t r0, std::size_t r1) {
        o.gemm_nt_f32(c + r0 * n, a + r0 * k, b, r1 - r0, n, k, accumulate);
    });
}
void matmul_nt(double* c, const double* a, const double* b, std::size_t m, std::size_t n,
               std::size_t k, bool accumulate) {
    const Ops& o = ops();
    parallel_rows(m, n * k, [&](std::size_t r0, std::size_t r1) {
        o.gemm_nt_f64(c + r0 * n, a + r0 * k, b, r1 - r0, n, k, accumulate);
    });
}

void matmul_nn(float* c, const float* a, const float* b, std::size_t m, std::size_t n,
               std::size_t k, bool accumulate) {
    const Ops& o = ops();
    parallel_rows(m, n * k, [&](std::size_t r0, std::size_t r1) {
        o.gemm_nn_f32(c + r0 * n, a + r0 * k, b, r1 - r0, n, k, accumulate);
    });
}
void matmul_nn(double* c, const double* a, const double* b, std::size_t m, std::size_t n,
               std::size_t k, bool accumulate) {
    const Ops& o = ops();
    parallel_rows(m, n * k, [&](std::size_t r0, std::size_t r1) {
        o.gemm_nn_f64(c + r0 * n, a + r0 * k, b, r1 - r0, n, k, accumulate);
    });
}

void matmul_tn(float* c, const float* a, const float* b, std::size_t m, std::size_t n,
               std::size_t k, bool accumulate) {
    const Ops& o = ops();
    parallel_rows(m, n * k, [&](std::size_t r0, std::size_t r1) {
        o.gemm_tn_f32(c + r0 * n, a + r0, b, r1 - r0, n, k, m, accumulate);
    });
}
void matmul_tn(double* c, const double* a, const double* b, std::size_t m, std::size_t n,
               std::size_t k, bool accumulate) {
    const Ops& o = ops();
    parallel_rows(m, n * k, [&](std::size_t r0, std::size_t r1) {
        o.gemm_tn_f64(c + r0 * n, a + r0, b, r1 - r0, n, k, m, accumulate);
    });
}

}  // namespace prunekit::kernels
