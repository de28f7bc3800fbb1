#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "prunekit/kernels.hpp"

namespace pk = prunekit::kernels;

namespace {

std::vector<float> random_vec_f32(std::mt19937_64& gen, std::size_t n) {
    std::vector<float> v(n);
    for (auto& x : v) x = float(int64_t(gen() % 2001) - 1000) / 250.0f;
    return v;
}

std::vector<double> random_vec_f64(std::mt19937_64& gen, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = double(int64_t(gen() % 2001) - 1000) / 250.0;
    return v;
}

struct BackendGuard {
    explicit BackendGuard(pk::Backend b) { pk::set_backend(b); }
    ~BackendGuard() { pk::set_backend(pk::Backend::kAuto); }
};

bool avx2_available() {
    pk::set_backend(pk::Backend::kAuto);
    return pk::active_backend() == pk::Backend::kAvx2;
}

}  // namespace

TEST_CASE("dot and norm accumulate in 64-bit and match across backends") {
    if (!avx2_available()) return;
    std::mt19937_64 gen(11);
    for (std::size_t n : {1u, 7u, 8u, 65u, 1000u}) {
        auto a = random_vec_f32(gen, n);
        auto b = random_vec_f32(gen, n);
        pk::set_backend(pk::Backend::kScalar);
        const double ds = pk::dot(a.data(), b.data(), n);
        const double ns = pk::norm_sq(a.data(), n);
        pk::set_backend(pk::Backend::kAvx2);
        const double dv = pk::dot(a.data(), b.data(), n);
        const double nv = pk::norm_sq(a.data(), n);
        pk::set_backend(pk::Backend::kAuto);
        CHECK(dv == doctest::Approx(ds).epsilon(1e-12));
        CHECK(nv == doctest::Approx(ns).epsilon(1e-12));
    }
}

TEST_CASE("cosine_terms single pass equals separate reductions") {
    std::mt19937_64 gen(12);
    auto u = random_vec_f64(gen, 301);
    auto v = random_vec_f64(gen, 301);
    const auto t = pk::cosine_terms(u.data(), v.data(), u.size());
    CHECK(t.uv == doctest::Approx(pk::dot(u.data(), v.data(), u.size())).epsilon(1e-13));
    CHECK(t.uu == doctest::Approx(pk::norm_sq(u.data(), u.size())).epsilon(1e-13));
    CHECK(t.vv == doctest::Approx(pk::norm_sq(v.data(), v.size())).epsilon(1e-13));
}

TEST_CASE("gemm variants agree between scalar and avx2 backends") {
    if (!avx2_available()) return;
    std::mt19937_64 gen(13);
    const std::size_t m = 13, n = 9, k = 37;

    auto a32 = random_vec_f32(gen, m * k);
    auto bt32 = random_vec_f32(gen, n * k);
    auto b32 = random_vec_f32(gen, k * n);
    auto at32 = random_vec_f32(gen, k * m);

    auto run_all_f32 = [&](std::vector<float>& nt, std::vector<float>& nn, std::vector<float>& tn) {
        nt.assign(m * n, 0.5f);
        nn.assign(m * n, 0.5f);
        tn.assign(m * n, 0.5f);
        pk::matmul_nt(nt.data(), a32.data(), bt32.data(), m, n, k, true);
        pk::matmul_nn(nn.data(), a32.data(), b32.data(), m, n, k, false);
        pk::matmul_tn(tn.data(), at32.data(), b32.data(), m, n, k, true);
    };

    std::vector<float> nt_s, nn_s, tn_s, nt_v, nn_v, tn_v;
    {
        BackendGuard g(pk::Backend::kScalar);
        run_all_f32(nt_s, nn_s, tn_s);
    }
    {
        BackendGuard g(pk::Backend::kAvx2);
        run_all_f32(nt_v, nn_v, tn_v);
    }
    auto close = [](float x, float y) { return std::abs(x - y) <= 1e-5 * (1.0 + std::abs(y)); };
    for (std::size_t i = 0; i < m * n; ++i) {
        CHECK(close(nt_v[i], nt_s[i]));
        CHECK(close(nn_v[i], nn_s[i]));
        CHECK(close(tn_v[i], tn_s[i]));
    }
}

TEST_CASE("gemm nn equals nt against a transposed operand (f64, tight)") {
    std::mt19937_64 gen(14);
    const std::size_t m = 6, n = 11, k = 23;
    auto a = random_vec_f64(gen, m * k);
    auto b = random_vec_f64(gen, k * n);
    std::vector<double> bt(n * k);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t p = 0; p < k; ++p) bt[j * k + p] = b[p * n + j];

    std::vector<double> c_nn(m * n), c_nt(m * n);
    pk::matmul_nn(c_nn.data(), a.data(), b.data(), m, n, k, false);
    pk::matmul_nt(c_nt.data(), a.data(), bt.data(), m, n, k, false);
    for (std::size_t i = 0; i < m * n; ++i)
        CHECK(c_nt[i] == doctest::Approx(c_nn[i]).epsilon(1e-12));
}

TEST_CASE("row-partitioned gemm is bitwise identical for any thread count") {
    std::mt19937_64 gen(15);
    const std::size_t m = 64, n = 48, k = 96;
    auto a = random_vec_f32(gen, m * k);
    auto b = random_vec_f32(gen, n * k);

    std::vector<float> c1(m * n), c4(m * n);
    pk::set_threads(1);
    pk::matmul_nt(c1.data(), a.data(), b.data(), m, n, k, false);
    pk::set_threads(4);
    pk::matmul_nt(c4.data(), a.data(), b.data(), m, n, k, false);
    pk::set_threads(2);
    CHECK(std::memcmp(c1.data(), c4.data(), m * n * sizeof(float)) == 0);
}

TEST_CASE("axpy and scaled_mul") {
    std::mt19937_64 gen(16);
    auto x = random_vec_f64(gen, 19);
    std::vector<double> y(19, 1.0);
    pk::axpy(y.data(), 2.0, x.data(), x.size());
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == doctest::Approx(1.0 + 2.0 * x[i]));

    auto w = random_vec_f64(gen, 19);
    std::vector<double> z(19);
    pk::scaled_mul(z.data(), x.data(), w.data(), 0.5, x.size());
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(z[i] == doctest::Approx(0.5 * x[i] * w[i]));
}
