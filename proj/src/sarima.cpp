#include "wst/sarima.hpp"

#include "wst/errors.hpp"
#include "wst/optim.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <thread>

namespace wst::sarima {
namespace {

// Monahan transform: unconstrained values -> partial autocorrelations via
// tanh -> coefficients of a stationary polynomial 1 - c1 L - ... - ck L^k.
// The partial autocorrelations are kept strictly inside the unit interval
// so a near-unit-root optimum cannot round onto the boundary.
std::vector<double> pacf_to_coeffs(std::span<const double> raw) {
    constexpr double kBoundary = 1.0 - 1e-8;
    const std::size_t k = raw.size();
    std::vector<double> coeffs(k), work(k);
    for (std::size_t i = 0; i < k; ++i) {
        coeffs[i] = std::clamp(std::tanh(raw[i]), -kBoundary, kBoundary);
    }
    work = coeffs;
    for (std::size_t j = 1; j < k; ++j) {
        for (std::size_t i = 0; i < j; ++i)
            work[i] -= coeffs[j] * coeffs[j - i - 1];
        std::copy(work.begin(), work.begin() + static_cast<long>(j),
                  coeffs.begin());
    }
    return coeffs;
}

// Inverse Levinson-Durbin: true iff 1 - c1 L - ... - ck L^k has all roots
// outside the unit circle (every implied partial autocorrelation < 1).
bool is_stationary_poly(std::span<const double> coeffs) {
    std::vector<double> a(coeffs.begin(), coeffs.end());
    for (std::size_t j = a.size(); j > 0; --j) {
        const double r = a[j - 1];
        if (!(std::abs(r) < 1.0)) return false;
        if (j == 1) break;
        std::vector<double> prev(j - 1);
        const double denom = 1.0 - r * r;
        for (std::size_t i = 0; i < j - 1; ++i)
            prev[i] = (a[i] + r * a[j - 2 - i]) / denom;
        a = std::move(prev);
    }
    return true;
}

// Product of (1 - sum c_i L^i) and (1 - sum C_k L^{s k}); returns the full
// coefficient array with index = lag, entry 0 = 1.
std::vector<double> expand_poly(std::span<const double> c,
                                std::span<const double> cs, int s) {
    std::vector<double> a(c.size() + cs.size() * static_cast<std::size_t>(s) + 1,
                          0.0);
    a[0] = 1.0;
    for (std::size_t i = 0; i < c.size(); ++i) a[i + 1] = -c[i];
    if (!cs.empty()) {
        std::vector<double> b(a.size(), 0.0);
        for (std::size_t k = 0; k <= cs.size(); ++k) {
            const double coeff = (k == 0) ? 1.0 : -cs[k - 1];
            const std::size_t off = k * static_cast<std::size_t>(s);
            for (std::size_t i = 0; i + off < a.size() &&
                                    i <= c.size(); ++i) {
                b[i + off] += coeff * a[i];
            }
        }
        a = std::move(b);
    }
    return a;
}

struct CssEval {
    double ssq = 0.0;
    double constant = 0.0;
    std::size_t n_eff = 0;
    std::vector<double> residuals; // only filled when requested
};

// Conditional sum of squares with the constant profiled out analytically:
// e_t(c) = e0_t - c * kappa_t, with kappa the recursion response to a unit
// constant. Pre-sample shocks are zero; the first p + s P observations of
// the differenced series condition the recursion.
CssEval css_evaluate(std::span<const double> w, std::span<const double> a,
                     std::span<const double> b, std::size_t ncond,
                     bool with_constant, bool want_residuals) {
    const std::size_t nd = w.size();
    const std::size_t pa = a.size() - 1;
    const std::size_t qb = b.size() - 1;
    std::vector<double> e0(nd, 0.0), kap(nd, 0.0);

    for (std::size_t t = ncond; t < nd; ++t) {
        double acc = w[t];
        for (std::size_t j = 1; j <= pa && j <= t; ++j) acc += a[j] * w[t - j];
        double kacc = with_constant ? 1.0 : 0.0;
        for (std::size_t j = 1; j <= qb && j <= t; ++j) {
            if (t - j >= ncond) {
                acc -= b[j] * e0[t - j];
                kacc -= b[j] * kap[t - j];
            }
        }
        e0[t] = acc;
        kap[t] = kacc;
    }

    CssEval out;
    out.n_eff = nd - ncond;
    if (with_constant) {
        double num = 0.0, den = 0.0;
        for (std::size_t t = ncond; t < nd; ++t) {
            num += e0[t] * kap[t];
            den += kap[t] * kap[t];
        }
        out.constant = den > 0.0 ? num / den : 0.0;
    }
    double ssq = 0.0;
    for (std::size_t t = ncond; t < nd; ++t) {
        const double e = e0[t] - out.constant * kap[t];
        ssq += e * e;
    }
    out.ssq = ssq;
    if (want_residuals) {
        out.residuals.resize(out.n_eff);
        for (std::size_t t = ncond; t < nd; ++t)
            out.residuals[t - ncond] = e0[t] - out.constant * kap[t];
    }
    return out;
}

struct UnpackedParams {
    std::vector<double> phi, theta, Phi, Theta;
};

UnpackedParams unpack(const Spec& spec, const std::vector<double>& u) {
    UnpackedParams up;
    std::size_t offset = 0;
    auto take = [&](int count) {
        if (count == 0) return std::vector<double>{};
        std::span<const double> raw(u.data() + offset,
                                    static_cast<std::size_t>(count));
        offset += static_cast<std::size_t>(count);
        return pacf_to_coeffs(raw);
    };
    up.phi = take(spec.p);
    up.theta = take(spec.q);
    up.Phi = take(spec.P);
    up.Theta = take(spec.Q);
    return up;
}

double concentrated_nll(double ssq, std::size_t n_eff) {
    const double n = static_cast<double>(n_eff);
    return 0.5 * n * (std::log(2.0 * 3.14159265358979323846) + 1.0 +
                      std::log(ssq / n));
}

} // namespace

std::string Spec::to_string() const {
    return "(" + std::to_string(p) + "," + std::to_string(d) + "," +
           std::to_string(q) + ")(" + std::to_string(P) + "," +
           std::to_string(D) + "," + std::to_string(Q) + ")_" +
           std::to_string(s);
}

Spec Spec::parse(const std::string& text) {
    Spec spec;
    int fields[7];
    std::size_t pos = 0;
    for (int i = 0; i < 7; ++i) {
        std::size_t next = 0;
        try {
            fields[i] = std::stoi(text.substr(pos), &next);
        } catch (const std::exception&) {
            throw ConfigError("bad order '" + text +
                              "', expected p,d,q,P,D,Q,s");
        }
        pos += next;
        if (i < 6) {
            if (pos >= text.size() || text[pos] != ',')
                throw ConfigError("bad order '" + text +
                                  "', expected p,d,q,P,D,Q,s");
            ++pos;
        }
    }
    if (pos != text.size())
        throw ConfigError("trailing characters in order '" + text + "'");
    spec.p = fields[0];
    spec.d = fields[1];
    spec.q = fields[2];
    spec.P = fields[3];
    spec.D = fields[4];
    spec.Q = fields[5];
    spec.s = fields[6];
    if (spec.p < 0 || spec.d < 0 || spec.q < 0 || spec.P < 0 || spec.D < 0 ||
        spec.Q < 0 || spec.s < 1) {
        throw ConfigError("orders must be non-negative and s >= 1");
    }
    return spec;
}

std::vector<double> difference(std::span<const double> x, int d, int D, int s) {
    if (d < 0 || D < 0 || s < 1) throw DataError("invalid differencing orders");
    if (x.size() <= static_cast<std::size_t>(d) +
                        static_cast<std::size_t>(D) * static_cast<std::size_t>(s)) {
        throw DataError("series too short to difference");
    }
    std::vector<double> w(x.begin(), x.end());
    for (int i = 0; i < d; ++i) {
        for (std::size_t t = w.size(); t-- > 1;) w[t] -= w[t - 1];
        w.erase(w.begin());
    }
    const auto su = static_cast<std::size_t>(s);
    for (int i = 0; i < D; ++i) {
        for (std::size_t t = w.size(); t-- > su;) w[t] -= w[t - su];
        w.erase(w.begin(), w.begin() + static_cast<long>(su));
    }
    return w;
}

Fit fit(std::span<const double> x, const Spec& spec, int ncond_override) {
    if (spec.p < 0 || spec.d < 0 || spec.q < 0 || spec.P < 0 || spec.D < 0 ||
        spec.Q < 0 || spec.s < 1) {
        throw ModelError("invalid specification " + spec.to_string());
    }
    const std::vector<double> w = difference(x, spec.d, spec.D, spec.s);
    const int n_coeff = spec.num_coefficients();
    if (w.size() < static_cast<std::size_t>(10 * (n_coeff + 1))) {
        throw ModelError("differenced length " + std::to_string(w.size()) +
                         " below 10x parameter count for " + spec.to_string());
    }
    auto ncond = static_cast<std::size_t>(spec.p) +
                 static_cast<std::size_t>(spec.s) *
                     static_cast<std::size_t>(spec.P);
    if (ncond_override >= 0) {
        if (static_cast<std::size_t>(ncond_override) < ncond) {
            throw ModelError("conditioning window too small for " +
                             spec.to_string());
        }
        ncond = static_cast<std::size_t>(ncond_override);
    }
    if (w.size() <= ncond + static_cast<std::size_t>(n_coeff) + 2) {
        throw ModelError("too few effective observations for " +
                         spec.to_string());
    }
    const bool with_constant = spec.constant_enabled();

    auto objective = [&](const std::vector<double>& u) {
        const UnpackedParams up = unpack(spec, u);
        const auto a = expand_poly(up.phi, up.Phi, spec.s);
        const auto b = expand_poly(up.theta, up.Theta, spec.s);
        const CssEval ev = css_evaluate(w, a, b, ncond, with_constant, false);
        if (!(ev.ssq > 0.0) || !std::isfinite(ev.ssq)) {
            return std::numeric_limits<double>::infinity();
        }
        return concentrated_nll(ev.ssq, ev.n_eff);
    };

    std::vector<double> u0(static_cast<std::size_t>(n_coeff), 0.0);
    const optim::Result opt = optim::minimize_bfgs(objective, std::move(u0));
    if (opt.hit_iteration_cap) {
        throw ModelError("optimizer hit the iteration cap for " +
                         spec.to_string());
    }
    if (!std::isfinite(opt.f)) {
        throw ModelError("optimizer failed to find a finite optimum for " +
                         spec.to_string());
    }

    const UnpackedParams up = unpack(spec, opt.x);
    if (!is_stationary_poly(up.phi) || !is_stationary_poly(up.Phi)) {
        throw ModelError("non-stationary AR optimum for " + spec.to_string());
    }
    if (!is_stationary_poly(up.theta) || !is_stationary_poly(up.Theta)) {
        throw ModelError("non-invertible MA optimum for " + spec.to_string());
    }

    const auto a = expand_poly(up.phi, up.Phi, spec.s);
    const auto b = expand_poly(up.theta, up.Theta, spec.s);
    const CssEval ev = css_evaluate(w, a, b, ncond, with_constant, true);

    Fit f;
    f.spec = spec;
    f.phi = up.phi;
    f.theta = up.theta;
    f.Phi = up.Phi;
    f.Theta = up.Theta;
    f.constant = ev.constant;
    f.n_effective = ev.n_eff;
    f.sigma2 = ev.ssq / static_cast<double>(ev.n_eff);
    if (!(f.sigma2 > 0.0)) {
        throw ModelError("degenerate innovation variance for " +
                         spec.to_string());
    }
    f.loglik = -concentrated_nll(ev.ssq, ev.n_eff);
    const int k = n_coeff + (with_constant ? 1 : 0) + 1; // + sigma2
    f.aic = -2.0 * f.loglik + 2.0 * k;
    f.bic = -2.0 * f.loglik + k * std::log(static_cast<double>(ev.n_eff));
    f.residuals = ev.residuals;
    f.converged = opt.converged;
    f.iterations = opt.iterations;
    f.series.assign(x.begin(), x.end());
    return f;
}

Spec auto_select(std::span<const double> x, int s, const GridBounds& bounds) {
    if (x.size() < static_cast<std::size_t>(3 * s)) {
        throw ModelError("auto_select requires at least 3 seasonal cycles");
    }
    std::vector<Spec> candidates;
    for (int d = 0; d <= bounds.d_max; ++d)
        for (int D = 0; D <= bounds.D_max; ++D)
            for (int p = 0; p <= bounds.p_max; ++p)
                for (int q = 0; q <= bounds.q_max; ++q)
                    for (int P = 0; P <= bounds.P_max; ++P)
                        for (int Q = 0; Q <= bounds.Q_max; ++Q) {
                            Spec spec;
                            spec.p = p; spec.d = d; spec.q = q;
                            spec.P = P; spec.D = D; spec.Q = Q;
                            spec.s = s;
                            candidates.push_back(spec);
                        }

    // Likelihoods are only comparable on a common effective sample: every
    // candidate is conditioned on the same original-time window, sized for
    // the largest differencing and AR reach in the grid.
    const int t0 = bounds.d_max + s * bounds.D_max + bounds.p_max +
                   s * bounds.P_max;

    std::vector<double> aic(candidates.size(),
                            std::numeric_limits<double>::infinity());
    const unsigned workers =
        std::max(1u, std::min(std::thread::hardware_concurrency(),
                              static_cast<unsigned>(candidates.size())));
    auto run_chunk = [&](unsigned worker) {
        for (std::size_t i = worker; i < candidates.size(); i += workers) {
            const Spec& spec = candidates[i];
            try {
                aic[i] =
                    fit(x, spec, t0 - spec.d - s * spec.D).aic;
            } catch (const ModelError&) {
                // candidate failed; stays at +inf
            }
        }
    };
    if (workers > 1) {
        std::vector<std::future<void>> futures;
        for (unsigned wkr = 0; wkr < workers; ++wkr)
            futures.push_back(std::async(std::launch::async, run_chunk, wkr));
        for (auto& fut : futures) fut.get();
    } else {
        run_chunk(0);
    }

    // Deterministic merge: AIC, then parameter count, then lexicographic.
    std::size_t best = candidates.size();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (!std::isfinite(aic[i])) continue;
        if (best == candidates.size()) {
            best = i;
            continue;
        }
        const Spec& a = candidates[i];
        const Spec& b = candidates[best];
        const auto key = [](const Spec& sp, double v) {
            return std::make_tuple(v, sp.num_coefficients(), sp.p, sp.d, sp.q,
                                   sp.P, sp.D, sp.Q);
        };
        if (key(a, aic[i]) < key(b, aic[best])) best = i;
    }
    if (best == candidates.size()) {
        throw ModelError("auto_select: every candidate specification failed");
    }
    return candidates[best];
}

std::vector<double> forecast(const Fit& fit, int horizon) {
    if (horizon < 1) throw ModelError("forecast horizon must be >= 1");
    const Spec& spec = fit.spec;
    const auto h = static_cast<std::size_t>(horizon);

    // Differencing stages, outermost first: stages[0] is the raw series,
    // each entry one more difference applied (d single lags, then D
    // seasonal lags).
    std::vector<std::vector<double>> stages;
    std::vector<int> lags;
    stages.push_back(fit.series);
    for (int i = 0; i < spec.d; ++i) {
        stages.push_back(difference(stages.back(), 1, 0, spec.s));
        lags.push_back(1);
    }
    for (int i = 0; i < spec.D; ++i) {
        stages.push_back(difference(stages.back(), 0, 1, spec.s));
        lags.push_back(spec.s);
    }

    const std::vector<double>& w = stages.back();
    const std::size_t nd = w.size();
    const auto ncond = static_cast<std::size_t>(spec.p) +
                       static_cast<std::size_t>(spec.s) *
                           static_cast<std::size_t>(spec.P);

    const auto a = expand_poly(fit.phi, fit.Phi, spec.s);
    const auto b = expand_poly(fit.theta, fit.Theta, spec.s);
    const std::size_t pa = a.size() - 1;
    const std::size_t qb = b.size() - 1;

    // Shock sequence: estimated residuals inside the sample, zero outside.
    std::vector<double> shocks(nd + h, 0.0);
    for (std::size_t t = 0; t < fit.residuals.size(); ++t)
        shocks[ncond + t] = fit.residuals[t];

    std::vector<double> wx(w);
    wx.resize(nd + h);
    for (std::size_t t = nd; t < nd + h; ++t) {
        double acc = fit.constant;
        for (std::size_t j = 1; j <= pa && j <= t; ++j) acc -= a[j] * wx[t - j];
        for (std::size_t j = 1; j <= qb && j <= t; ++j) acc += b[j] * shocks[t - j];
        wx[t] = acc;
    }

    // Invert the differencing, innermost stage outward.
    std::vector<double> fc(wx.begin() + static_cast<long>(nd), wx.end());
    for (std::size_t stage = stages.size() - 1; stage-- > 0;) {
        const auto lag = static_cast<std::size_t>(lags[stage]);
        const std::vector<double>& base = stages[stage];
        std::vector<double> integrated(h);
        for (std::size_t i = 0; i < h; ++i) {
            const double prev = (i < lag)
                                    ? base[base.size() - lag + i]
                                    : integrated[i - lag];
            integrated[i] = fc[i] + prev;
        }
        fc = std::move(integrated);
    }
    return fc;
}

std::string fit_to_json(const Fit& f) {
    nlohmann::json j;
    j["spec"] = {{"p", f.spec.p}, {"d", f.spec.d}, {"q", f.spec.q},
                 {"P", f.spec.P}, {"D", f.spec.D}, {"Q", f.spec.Q},
                 {"s", f.spec.s}, {"constant", f.spec.constant_enabled()}};
    j["phi"] = f.phi;
    j["theta"] = f.theta;
    j["seasonal_phi"] = f.Phi;
    j["seasonal_theta"] = f.Theta;
    j["constant"] = f.constant;
    j["sigma2"] = f.sigma2;
    j["loglik"] = f.loglik;
    j["aic"] = f.aic;
    j["bic"] = f.bic;
    j["n_effective"] = f.n_effective;
    j["converged"] = f.converged;
    j["iterations"] = f.iterations;
    return j.dump(2);
}

} // namespace wst::sarima
