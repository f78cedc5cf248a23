#include "wst/diagnostics.hpp"

#include "wst/errors.hpp"
#include "wst/kernels.hpp"
#include "wst/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace wst::diagnostics {
namespace {

// Cholesky solve of the symmetric positive definite system A x = b.
// Returns false when A is (numerically) singular.
bool cholesky_solve(std::vector<double>& a, std::vector<double>& b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < i; ++k)
                s -= a[i * n + k] * a[j * n + k];
            if (i == j) {
                if (s <= 1e-12) return false;
                a[i * n + i] = std::sqrt(s);
            } else {
                a[j * n + i] = s / a[i * n + i];
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= a[i * n + k] * b[k];
        b[i] = s / a[i * n + i];
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= a[k * n + i] * b[k];
        b[i] = s / a[i * n + i];
    }
    return true;
}

// Least squares of y on the columns of X (row-major rows x cols).
// Solves via normal equations after scaling columns to unit norm.
// Returns false on singularity; otherwise fills fitted values.
bool ols_fit(const std::vector<double>& x, std::size_t rows, std::size_t cols,
             std::span<const double> y, std::vector<double>& fitted) {
    std::vector<double> scale(cols, 1.0);
    for (std::size_t j = 0; j < cols; ++j) {
        double ss = 0.0;
        for (std::size_t i = 0; i < rows; ++i) ss += x[i * cols + j] * x[i * cols + j];
        if (ss <= 1e-300) return false;
        scale[j] = 1.0 / std::sqrt(ss);
    }
    std::vector<double> gram(cols * cols, 0.0);
    std::vector<double> rhs(cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
        const double* row = &x[i * cols];
        for (std::size_t j = 0; j < cols; ++j) {
            const double xj = row[j] * scale[j];
            rhs[j] += xj * y[i];
            for (std::size_t k = j; k < cols; ++k)
                gram[j * cols + k] += xj * row[k] * scale[k];
        }
    }
    for (std::size_t j = 0; j < cols; ++j)
        for (std::size_t k = 0; k < j; ++k) gram[j * cols + k] = gram[k * cols + j];
    if (!cholesky_solve(gram, rhs, cols)) return false;
    fitted.assign(rows, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
        double v = 0.0;
        for (std::size_t j = 0; j < cols; ++j)
            v += x[i * cols + j] * scale[j] * rhs[j];
        fitted[i] = v;
    }
    return true;
}

// AR(p) least-squares fit with intercept; residuals over t = p..n-1.
// Returns false for a degenerate design.
bool ar_residuals(std::span<const double> x, int p, std::vector<double>& resid,
                  double& sigma2) {
    const std::size_t n = x.size();
    const auto pu = static_cast<std::size_t>(p);
    const std::size_t rows = n - pu;
    const std::size_t cols = pu + 1;
    std::vector<double> design(rows * cols);
    std::vector<double> y(rows);
    for (std::size_t t = 0; t < rows; ++t) {
        design[t * cols] = 1.0;
        for (std::size_t j = 0; j < pu; ++j)
            design[t * cols + 1 + j] = x[t + pu - 1 - j];
        y[t] = x[t + pu];
    }
    std::vector<double> fitted;
    if (!ols_fit(design, rows, cols, y, fitted)) return false;
    resid.resize(rows);
    double ss = 0.0;
    for (std::size_t t = 0; t < rows; ++t) {
        resid[t] = y[t] - fitted[t];
        ss += resid[t] * resid[t];
    }
    sigma2 = ss / static_cast<double>(rows);
    return true;
}

} // namespace

const char* to_string(Decision d) {
    switch (d) {
        case Decision::Linear: return "linear";
        case Decision::Nonlinear: return "nonlinear";
        case Decision::White: return "white";
        case Decision::Correlated: return "correlated";
    }
    return "?";
}

const char* to_string(Route r) {
    return r == Route::Sarima ? "sarima" : "transformer";
}

TestResult ljung_box(std::span<const double> residuals, int lags, double alpha,
                     int fitted_params) {
    if (lags < 1) throw DataError("ljung_box: lags must be >= 1");
    const std::size_t n = residuals.size();
    if (n <= static_cast<std::size_t>(lags)) {
        throw DataError("ljung_box: need more observations than lags");
    }
    const double nd = static_cast<double>(n);
    const double mean = kernels::sum(residuals.data(), n) / nd;

    std::vector<double> centered(n);
    for (std::size_t i = 0; i < n; ++i) centered[i] = residuals[i] - mean;
    const double denom = kernels::sum_sq(centered.data(), n);

    TestResult r;
    r.alpha = alpha;
    r.df1 = std::max(1, lags - fitted_params);
    if (denom <= 0.0) {
        // Constant residual series: no autocorrelation evidence either way.
        r.degenerate = true;
        r.statistic = 0.0;
        r.p_value = 1.0;
        r.decision = Decision::White;
        return r;
    }
    double q = 0.0;
    for (int k = 1; k <= lags; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        const double acov =
            kernels::dot(centered.data() + ku, centered.data(), n - ku);
        const double rho = acov / denom;
        q += rho * rho / (nd - k);
    }
    q *= nd * (nd + 2.0);
    r.statistic = q;
    r.p_value = special::chi_square_sf(q, r.df1);
    r.decision = r.p_value < alpha ? Decision::Correlated : Decision::White;
    return r;
}

TestResult tsay_test(std::span<const double> series, int ar_order, double alpha) {
    const std::size_t n = series.size();
    TestResult r;
    r.alpha = alpha;

    // Degenerate (constant) input: no nonlinearity evidence.
    const double mean = kernels::sum(series.data(), n) / static_cast<double>(n);
    double var = 0.0;
    for (double v : series) var += (v - mean) * (v - mean);
    if (var <= 1e-30 * static_cast<double>(n)) {
        r.degenerate = true;
        r.decision = Decision::Linear;
        return r;
    }

    int p = ar_order;
    if (p <= 0) {
        // AIC over p = 1..10 (capped so the length precondition holds).
        double best_aic = std::numeric_limits<double>::infinity();
        p = 1;
        for (int cand = 1; cand <= 10; ++cand) {
            if (n < static_cast<std::size_t>(40 + cand * cand)) break;
            std::vector<double> resid;
            double sigma2 = 0.0;
            if (!ar_residuals(series, cand, resid, sigma2) || sigma2 <= 0.0)
                continue;
            const double n_eff = static_cast<double>(n - static_cast<std::size_t>(cand));
            const double aic = n_eff * std::log(sigma2) + 2.0 * (cand + 1);
            if (aic < best_aic) {
                best_aic = aic;
                p = cand;
            }
        }
    }
    if (n < static_cast<std::size_t>(40 + p * p)) {
        throw DataError("tsay_test: series too short for AR order " +
                        std::to_string(p));
    }

    std::vector<double> resid;
    double sigma2 = 0.0;
    if (!ar_residuals(series, p, resid, sigma2) || sigma2 <= 1e-30) {
        r.degenerate = true;
        r.decision = Decision::Linear;
        return r;
    }

    const auto pu = static_cast<std::size_t>(p);
    const std::size_t rows = n - pu;
    const std::size_t m = pu * (pu + 1) / 2;

    // Cross-products of the p lagged values, each orthogonalized against
    // the AR regressors {1, x_{t-1}..x_{t-p}} so the F-test is exact under
    // the linear null and affine-invariant.
    const std::size_t ar_cols = pu + 1;
    std::vector<double> ar_design(rows * ar_cols);
    for (std::size_t t = 0; t < rows; ++t) {
        ar_design[t * ar_cols] = 1.0;
        for (std::size_t j = 0; j < pu; ++j)
            ar_design[t * ar_cols + 1 + j] = series[t + pu - 1 - j];
    }
    std::vector<double> z(rows * m);
    {
        std::vector<double> col(rows), fitted;
        std::size_t c = 0;
        for (std::size_t i = 1; i <= pu; ++i) {
            for (std::size_t j = i; j <= pu; ++j, ++c) {
                for (std::size_t t = 0; t < rows; ++t)
                    col[t] = series[t + pu - i] * series[t + pu - j];
                if (!ols_fit(ar_design, rows, ar_cols, col, fitted)) {
                    r.degenerate = true;
                    r.decision = Decision::Linear;
                    return r;
                }
                for (std::size_t t = 0; t < rows; ++t)
                    z[t * m + c] = col[t] - fitted[t];
            }
        }
    }

    const double df2 = static_cast<double>(rows) - static_cast<double>(m) - 1.0;
    if (df2 < 1.0) throw DataError("tsay_test: not enough observations");

    std::vector<double> fitted;
    if (!ols_fit(z, rows, m, resid, fitted)) {
        r.degenerate = true;
        r.decision = Decision::Linear;
        return r;
    }
    double explained = 0.0, total = 0.0;
    for (std::size_t t = 0; t < rows; ++t) {
        explained += fitted[t] * fitted[t];
        total += resid[t] * resid[t];
    }
    const double unexplained = total - explained;
    if (unexplained <= 0.0) {
        r.degenerate = true;
        r.decision = Decision::Nonlinear;
        r.p_value = 0.0;
        return r;
    }
    r.df1 = static_cast<double>(m);
    r.df2 = df2;
    r.statistic = (explained / static_cast<double>(m)) / (unexplained / df2);
    r.p_value = special::f_sf(r.statistic, r.df1, r.df2);
    r.decision = r.p_value < alpha ? Decision::Nonlinear : Decision::Linear;
    return r;
}

std::vector<ComponentRouting>
classify_components(const wavelet::Decomposition& decomposition, double alpha) {
    std::vector<ComponentRouting> out;
    out.reserve(decomposition.details.size() + 1);
    for (std::size_t j = 0; j < decomposition.details.size(); ++j) {
        ComponentRouting cr;
        cr.component = "D" + std::to_string(j + 1);
        cr.test = tsay_test(decomposition.details[j], 0, alpha);
        cr.route = cr.test.decision == Decision::Nonlinear ? Route::Transformer
                                                           : Route::Sarima;
        out.push_back(std::move(cr));
    }
    ComponentRouting cr;
    cr.component = "S" + std::to_string(decomposition.levels);
    cr.test = tsay_test(decomposition.smooth, 0, alpha);
    cr.route = cr.test.decision == Decision::Nonlinear ? Route::Transformer
                                                       : Route::Sarima;
    out.push_back(std::move(cr));
    return out;
}

} // namespace wst::diagnostics
