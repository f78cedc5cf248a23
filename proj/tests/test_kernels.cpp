#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "wst/kernels.hpp"
#include "wst/rng.hpp"

#include "support/helpers.hpp"

#include <cmath>
#include <vector>

using namespace wst;

namespace {

// Plain triple loop, no blocking or vectorization; the reference the
// optimized paths are judged against.
void naive_gemm(bool ta, bool tb, std::size_t m, std::size_t n, std::size_t k,
                double alpha, const std::vector<double>& a, std::size_t lda,
                const std::vector<double>& b, std::size_t ldb, double beta,
                std::vector<double>& c, std::size_t ldc) {
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t l = 0; l < k; ++l) {
                const double av = ta ? a[l * lda + i] : a[i * lda + l];
                const double bv = tb ? b[j * ldb + l] : b[l * ldb + j];
                acc += av * bv;
            }
            c[i * ldc + j] = beta * c[i * ldc + j] + alpha * acc;
        }
    }
}

} // namespace

TEST_CASE("scalar gemm matches the naive triple loop in all layouts") {
    Rng rng(7);
    const auto& ops = kernels::scalar_ops();
    for (int ta = 0; ta <= 1; ++ta) {
        for (int tb = 0; tb <= 1; ++tb) {
            const std::size_t m = 5, n = 7, k = 9;
            const std::size_t lda = ta ? m : k;
            const std::size_t ldb = tb ? k : n;
            std::vector<double> a((ta ? k : m) * lda), b((tb ? n : k) * ldb);
            for (double& v : a) v = rng.gaussian();
            for (double& v : b) v = rng.gaussian();
            std::vector<double> c(m * n), expected(m * n);
            for (std::size_t i = 0; i < c.size(); ++i) {
                c[i] = rng.gaussian();
                expected[i] = c[i];
            }
            ops.gemm(ta, tb, m, n, k, 1.3, a.data(), lda, b.data(), ldb, 0.7,
                     c.data(), n);
            naive_gemm(ta, tb, m, n, k, 1.3, a, lda, b, ldb, 0.7, expected, n);
            for (std::size_t i = 0; i < c.size(); ++i) {
                CHECK(c[i] == doctest::Approx(expected[i]).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
    const kernels::Ops* simd = kernels::avx2_ops();
    if (simd == nullptr) {
        MESSAGE("AVX2 unavailable on this machine; equivalence checks skipped");
        return;
    }
    const auto& ref = kernels::scalar_ops();
    Rng rng(42);

    for (std::size_t n : {std::size_t{1}, std::size_t{3}, std::size_t{8},
                          std::size_t{17}, std::size_t{256}, std::size_t{1001}}) {
        std::vector<double> x = testsupport::random_series(n, rng, 3.0);
        std::vector<double> y = testsupport::random_series(n, rng, 3.0);

        CHECK(simd->dot(x.data(), y.data(), n) ==
              doctest::Approx(ref.dot(x.data(), y.data(), n)).epsilon(1e-12));
        CHECK(simd->sum(x.data(), n) ==
              doctest::Approx(ref.sum(x.data(), n)).epsilon(1e-12));
        CHECK(simd->sum_sq(x.data(), n) ==
              doctest::Approx(ref.sum_sq(x.data(), n)).epsilon(1e-12));

        std::vector<double> y1 = y, y2 = y;
        simd->axpy(0.37, x.data(), y1.data(), n);
        ref.axpy(0.37, x.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-13));
        }

        std::vector<double> d1(n), d2(n);
        simd->sub(x.data(), y.data(), d1.data(), n);
        ref.sub(x.data(), y.data(), d2.data(), n);
        CHECK(d1 == d2);
    }

    for (int ta = 0; ta <= 1; ++ta) {
        for (int tb = 0; tb <= 1; ++tb) {
            const std::size_t m = 13, n = 19, k = 31;
            const std::size_t lda = ta ? m : k;
            const std::size_t ldb = tb ? k : n;
            std::vector<double> a =
                testsupport::random_series((ta ? k : m) * lda, rng);
            std::vector<double> b =
                testsupport::random_series((tb ? n : k) * ldb, rng);
            std::vector<double> c1(m * n, 0.5), c2(m * n, 0.5);
            simd->gemm(ta, tb, m, n, k, 2.0, a.data(), lda, b.data(), ldb, 1.0,
                       c1.data(), n);
            ref.gemm(ta, tb, m, n, k, 2.0, a.data(), lda, b.data(), ldb, 1.0,
                     c2.data(), n);
            for (std::size_t i = 0; i < c1.size(); ++i) {
                CHECK(c1[i] == doctest::Approx(c2[i]).epsilon(1e-11));
            }
        }
    }
}

TEST_CASE("active backend is one of the registered implementations") {
    const std::string name = kernels::active_backend_name();
    CHECK((name == "scalar" || name == "avx2"));
    if (!kernels::cpu_supports_avx2()) {
        CHECK(name == "scalar");
    }
}

TEST_CASE("kernel results are reproducible within a process") {
    Rng rng(11);
    std::vector<double> x = testsupport::random_series(513, rng);
    std::vector<double> y = testsupport::random_series(513, rng);
    const double first = kernels::dot(x.data(), y.data(), x.size());
    for (int i = 0; i < 5; ++i) {
        CHECK(kernels::dot(x.data(), y.data(), x.size()) == first);
    }
}
