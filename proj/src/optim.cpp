#include "wst/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wst::optim {
namespace {

double inf_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

} // namespace

Result minimize_bfgs(const std::function<double(const std::vector<double>&)>& f,
                     std::vector<double> x0, const Options& opt) {
    const std::size_t n = x0.size();
    Result res;
    res.x = std::move(x0);
    res.f = f(res.x);
    res.evaluations = 1;
    if (n == 0) {
        res.converged = true;
        return res;
    }

    auto gradient = [&](const std::vector<double>& x, std::vector<double>& g) {
        std::vector<double> xp = x;
        for (std::size_t i = 0; i < n; ++i) {
            const double h = opt.gradient_step * std::max(1.0, std::abs(x[i]));
            xp[i] = x[i] + h;
            const double fp = f(xp);
            xp[i] = x[i] - h;
            const double fm = f(xp);
            xp[i] = x[i];
            g[i] = (fp - fm) / (2.0 * h);
            res.evaluations += 2;
        }
    };

    // Inverse Hessian approximation, dense row-major, starts at identity.
    std::vector<double> hinv(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) hinv[i * n + i] = 1.0;

    std::vector<double> g(n), g_new(n), dir(n), x_new(n), s(n), y(n), hy(n);
    gradient(res.x, g);
    res.gradient_norm = inf_norm(g);

    int stall_count = 0;
    bool scaled_h0 = false;
    for (res.iterations = 0; res.iterations < opt.max_iterations;
         ++res.iterations) {
        if (res.gradient_norm <= opt.gradient_tolerance) {
            res.converged = true;
            return res;
        }
        // dir = -Hinv * g
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += hinv[i * n + j] * g[j];
            dir[i] = -acc;
        }
        double slope = 0.0;
        for (std::size_t i = 0; i < n; ++i) slope += dir[i] * g[i];
        if (!(slope < 0.0)) {
            // Direction lost descent; reset to steepest descent.
            std::fill(hinv.begin(), hinv.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) hinv[i * n + i] = 1.0;
            for (std::size_t i = 0; i < n; ++i) dir[i] = -g[i];
            slope = 0.0;
            for (std::size_t i = 0; i < n; ++i) slope += dir[i] * g[i];
            if (!(slope < 0.0)) {
                res.converged = true; // zero gradient to machine precision
                return res;
            }
        }

        // Backtracking Armijo line search. Until the inverse Hessian has
        // been calibrated by one update, unit steps along -g can be huge;
        // start from a step of gradient-independent length instead.
        double step = 1.0;
        if (!scaled_h0) {
            double dir_norm = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                dir_norm += dir[i] * dir[i];
            dir_norm = std::sqrt(dir_norm);
            if (dir_norm > 1.0) step = 1.0 / dir_norm;
        }
        double f_new = std::numeric_limits<double>::infinity();
        bool improved = false;
        for (int ls = 0; ls < 40; ++ls) {
            for (std::size_t i = 0; i < n; ++i)
                x_new[i] = res.x[i] + step * dir[i];
            f_new = f(x_new);
            ++res.evaluations;
            if (std::isfinite(f_new) &&
                f_new <= res.f + 1e-4 * step * slope) {
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) {
            // No descent at machine resolution: treat as converged.
            res.converged = true;
            return res;
        }

        gradient(x_new, g_new);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = x_new[i] - res.x[i];
            y[i] = g_new[i] - g[i];
        }
        const double f_drop = res.f - f_new;
        res.x = x_new;
        const double f_scale = std::max(1.0, std::abs(res.f));
        res.f = f_new;
        g = g_new;
        res.gradient_norm = inf_norm(g);

        if (f_drop <= opt.f_tolerance * f_scale) {
            if (++stall_count >= 2) {
                res.converged = true;
                return res;
            }
        } else {
            stall_count = 0;
        }

        // BFGS inverse update (skipped when curvature is not positive).
        double sy = 0.0, ss = 0.0, yy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sy += s[i] * y[i];
            ss += s[i] * s[i];
            yy += y[i] * y[i];
        }
        if (sy > 1e-10 * std::sqrt(ss * yy)) {
            if (!scaled_h0) {
                // Nocedal-Wright H0 scaling before the first update.
                const double gamma = sy / yy;
                for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t j = 0; j < n; ++j) {
                        hinv[i * n + j] = (i == j) ? gamma : 0.0;
                    }
                }
                scaled_h0 = true;
            }
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < n; ++j) acc += hinv[i * n + j] * y[j];
                hy[i] = acc;
            }
            double yhy = 0.0;
            for (std::size_t i = 0; i < n; ++i) yhy += y[i] * hy[i];
            const double c1 = (sy + yhy) / (sy * sy);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    hinv[i * n + j] += c1 * s[i] * s[j] -
                                       (hy[i] * s[j] + s[i] * hy[j]) / sy;
                }
            }
        }
    }
    res.hit_iteration_cap = true;
    return res;
}

} // namespace wst::optim
