#pragma once

#include "wst/wavelet.hpp"

#include <span>
#include <string>
#include <vector>

namespace wst::diagnostics {

enum class Decision { Linear, Nonlinear, White, Correlated };

const char* to_string(Decision d);

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    double df1 = 0.0;     // chi-square df, or F numerator df
    double df2 = 0.0;     // F denominator df (0 for chi-square tests)
    double alpha = 0.05;
    Decision decision = Decision::Linear;
    bool degenerate = false;
};

/// Portmanteau test that autocorrelations up to `lags` are jointly zero.
/// `fitted_params` reduces the chi-square df (floored at 1) when the input
/// is the residual series of an estimated ARMA model.
TestResult ljung_box(std::span<const double> residuals, int lags,
                     double alpha = 0.05, int fitted_params = 0);

/// F-test for neglected nonlinearity: AR(p) residuals regressed on the
/// p(p+1)/2 cross-products of lagged values, orthogonalized against the
/// AR regressors. ar_order = 0 selects p in 1..10 by AIC.
TestResult tsay_test(std::span<const double> series, int ar_order = 0,
                     double alpha = 0.05);

enum class Route { Sarima, Transformer };

const char* to_string(Route r);

struct ComponentRouting {
    std::string component; // "D1".."DJ" or "SJ"
    TestResult test;
    Route route = Route::Sarima;
};

/// Tsay-classifies every multiresolution component: nonlinear components
/// go to the transformer, the rest (including degenerate ones) to SARIMA.
std::vector<ComponentRouting>
classify_components(const wavelet::Decomposition& decomposition,
                    double alpha = 0.05);

} // namespace wst::diagnostics
