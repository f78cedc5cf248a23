#pragma once

#include <cstddef>
#include <string>

namespace wst::kernels {

/// Dense double-precision primitives behind the numeric modules.
/// Two implementations exist: a scalar reference and an AVX2/FMA variant.
/// The active one is chosen once per process from CPUID, overridable with
/// the environment variable WST_KERNELS=scalar|avx2|auto.
struct Ops {
    const char* name;

    // y[i] += a * x[i]
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    double (*dot)(const double* x, const double* y, std::size_t n);
    double (*sum)(const double* x, std::size_t n);
    double (*sum_sq)(const double* x, std::size_t n);
    // out[i] = a[i] - b[i]
    void (*sub)(const double* a, const double* b, double* out, std::size_t n);

    // C = beta*C + alpha * op(A)*op(B), row-major.
    //   op(A): m x k  (lda = row stride of the stored matrix)
    //   op(B): k x n
    //   C    : m x n
    void (*gemm)(bool trans_a, bool trans_b, std::size_t m, std::size_t n,
                 std::size_t k, double alpha, const double* a, std::size_t lda,
                 const double* b, std::size_t ldb, double beta, double* c,
                 std::size_t ldc);
};

const Ops& scalar_ops();
const Ops* avx2_ops();   // nullptr when the CPU or build lacks AVX2+FMA
const Ops& active_ops(); // resolved once, stable for the process lifetime

bool cpu_supports_avx2();
std::string active_backend_name();

// Convenience wrappers over active_ops().
inline void axpy(double a, const double* x, double* y, std::size_t n) {
    active_ops().axpy(a, x, y, n);
}
inline double dot(const double* x, const double* y, std::size_t n) {
    return active_ops().dot(x, y, n);
}
inline double sum(const double* x, std::size_t n) {
    return active_ops().sum(x, n);
}
inline double sum_sq(const double* x, std::size_t n) {
    return active_ops().sum_sq(x, n);
}
inline void sub(const double* a, const double* b, double* out, std::size_t n) {
    active_ops().sub(a, b, out, n);
}
inline void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n,
                 std::size_t k, double alpha, const double* a, std::size_t lda,
                 const double* b, std::size_t ldb, double beta, double* c,
                 std::size_t ldc) {
    active_ops().gemm(trans_a, trans_b, m, n, k, alpha, a, lda, b, ldb, beta,
                      c, ldc);
}

} // namespace wst::kernels
