#include "wst/kernels.hpp"

namespace wst::kernels {
namespace {

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

double sum_scalar(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double sum_sq_scalar(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
    return acc;
}

void sub_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void gemm_scalar(bool trans_a, bool trans_b, std::size_t m, std::size_t n,
                 std::size_t k, double alpha, const double* a, std::size_t lda,
                 const double* b, std::size_t ldb, double beta, double* c,
                 std::size_t ldc) {
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * ldc;
        if (beta == 0.0) {
            for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
        } else if (beta != 1.0) {
            for (std::size_t j = 0; j < n; ++j) crow[j] *= beta;
        }
    }
    if (!trans_a && !trans_b) {
        for (std::size_t i = 0; i < m; ++i) {
            const double* arow = a + i * lda;
            double* crow = c + i * ldc;
            for (std::size_t l = 0; l < k; ++l) {
                const double av = alpha * arow[l];
                const double* brow = b + l * ldb;
                for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
            }
        }
    } else if (!trans_a && trans_b) {
        for (std::size_t i = 0; i < m; ++i) {
            const double* arow = a + i * lda;
            double* crow = c + i * ldc;
            for (std::size_t j = 0; j < n; ++j) {
                const double* brow = b + j * ldb;
                double acc = 0.0;
                for (std::size_t l = 0; l < k; ++l) acc += arow[l] * brow[l];
                crow[j] += alpha * acc;
            }
        }
    } else if (trans_a && !trans_b) {
        for (std::size_t l = 0; l < k; ++l) {
            const double* arow = a + l * lda;
            const double* brow = b + l * ldb;
            for (std::size_t i = 0; i < m; ++i) {
                const double av = alpha * arow[i];
                double* crow = c + i * ldc;
                for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
            }
        }
    } else {
        for (std::size_t i = 0; i < m; ++i) {
            double* crow = c + i * ldc;
            for (std::size_t j = 0; j < n; ++j) {
                double acc = 0.0;
                for (std::size_t l = 0; l < k; ++l)
                    acc += a[l * lda + i] * b[j * ldb + l];
                crow[j] += alpha * acc;
            }
        }
    }
}

} // namespace

const Ops& scalar_ops() {
    static const Ops ops{"scalar",   axpy_scalar, dot_scalar, sum_scalar,
                         sum_sq_scalar, sub_scalar,  gemm_scalar};
    return ops;
}

} // namespace wst::kernels
