#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wst::sarima {

/// (p,d,q)(P,D,Q)_s with the constant-term convention: included when
/// d + D = 0 unless overridden.
struct Spec {
    int p = 0, d = 0, q = 0;
    int P = 0, D = 0, Q = 0;
    int s = 12;
    std::optional<bool> include_constant; // nullopt = convention above

    bool constant_enabled() const {
        return include_constant.value_or(d + D == 0);
    }
    int num_coefficients() const { return p + q + P + Q; }
    std::string to_string() const;
    /// Parses "p,d,q,P,D,Q,s".
    static Spec parse(const std::string& text);

    bool operator==(const Spec& other) const {
        return p == other.p && d == other.d && q == other.q && P == other.P &&
               D == other.D && Q == other.Q && s == other.s &&
               constant_enabled() == other.constant_enabled();
    }
};

struct Fit {
    Spec spec;
    std::vector<double> phi;   // non-seasonal AR
    std::vector<double> theta; // non-seasonal MA
    std::vector<double> Phi;   // seasonal AR
    std::vector<double> Theta; // seasonal MA
    double constant = 0.0;
    double sigma2 = 0.0;
    double loglik = 0.0;
    double aic = 0.0;
    double bic = 0.0;
    std::vector<double> residuals; // post-differencing, post-conditioning
    std::size_t n_effective = 0;
    bool converged = false;
    int iterations = 0;

    std::vector<double> series; // retained for forecasting
};

struct GridBounds {
    int p_max = 3, q_max = 3;
    int P_max = 2, Q_max = 2;
    int d_max = 1, D_max = 1;
};

/// (1-L)^d then (1-L^s)^D; output length N - d - D*s.
std::vector<double> difference(std::span<const double> x, int d, int D, int s);

/// Conditional-sum-of-squares estimation refined by BFGS on the
/// concentrated Gaussian likelihood, in a partial-autocorrelation
/// parameterization that keeps every iterate stationary and invertible.
/// ncond_override widens the conditioning window (differenced-series
/// indices) so that likelihoods are comparable across specifications;
/// auto_select uses it to put every candidate on one effective sample.
Fit fit(std::span<const double> x, const Spec& spec, int ncond_override = -1);

/// Exhaustive AIC grid search; ties broken by parameter count then
/// lexicographic order. Throws ModelError when every candidate fails.
Spec auto_select(std::span<const double> x, int s, const GridBounds& bounds = {});

/// Iterated conditional-expectation forecasts (future shocks zero),
/// differencing inverted with the retained pre-sample values.
std::vector<double> forecast(const Fit& fit, int horizon);

std::string fit_to_json(const Fit& fit);

} // namespace wst::sarima
