#pragma once

#include "wst/rng.hpp"
#include "wst/sarima.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace testsupport {

inline std::vector<double> random_series(std::size_t n, wst::Rng& rng,
                                         double scale = 1.0) {
    std::vector<double> x(n);
    for (double& v : x) v = scale * rng.gaussian();
    return x;
}

inline std::vector<double> simulate_ar1(std::size_t n, double phi, wst::Rng& rng,
                                        double sigma = 1.0) {
    std::vector<double> x(n + 200);
    for (std::size_t t = 1; t < x.size(); ++t) {
        x[t] = phi * x[t - 1] + sigma * rng.gaussian();
    }
    return {x.end() - static_cast<long>(n), x.end()};
}

// Seasonal MA(1): x_t = e_t - Theta * e_{t-s} (paper's sign convention).
inline std::vector<double> simulate_seasonal_ma1(std::size_t n, double Theta,
                                                 int s, wst::Rng& rng) {
    std::vector<double> e(n + static_cast<std::size_t>(s));
    for (double& v : e) v = rng.gaussian();
    std::vector<double> x(n);
    for (std::size_t t = 0; t < n; ++t) {
        x[t] = e[t + static_cast<std::size_t>(s)] - Theta * e[t];
    }
    return x;
}

// General SARIMA simulator driven by the model recursion itself.
inline std::vector<double> simulate_sarima(std::size_t n,
                                           const wst::sarima::Spec& spec,
                                           const std::vector<double>& phi,
                                           const std::vector<double>& theta,
                                           const std::vector<double>& Phi,
                                           const std::vector<double>& Theta,
                                           wst::Rng& rng, double sigma = 1.0,
                                           double constant = 0.0) {
    const std::size_t burn = 300;
    const std::size_t total = n + burn;
    // Combined polynomials, minus convention.
    std::vector<double> a(static_cast<std::size_t>(spec.p + spec.s * spec.P) + 1,
                          0.0);
    a[0] = 1.0;
    for (int i = 0; i < spec.p; ++i) a[static_cast<std::size_t>(i) + 1] = -phi[static_cast<std::size_t>(i)];
    {
        std::vector<double> b(a.size(), 0.0);
        for (int k = 0; k <= spec.P; ++k) {
            const double c = (k == 0) ? 1.0 : -Phi[static_cast<std::size_t>(k - 1)];
            for (std::size_t i = 0; i + static_cast<std::size_t>(k * spec.s) < a.size() &&
                                    i <= static_cast<std::size_t>(spec.p); ++i)
                b[i + static_cast<std::size_t>(k * spec.s)] += c * a[i];
        }
        a = std::move(b);
    }
    std::vector<double> m(static_cast<std::size_t>(spec.q + spec.s * spec.Q) + 1,
                          0.0);
    m[0] = 1.0;
    for (int i = 0; i < spec.q; ++i) m[static_cast<std::size_t>(i) + 1] = -theta[static_cast<std::size_t>(i)];
    {
        std::vector<double> b(m.size(), 0.0);
        for (int k = 0; k <= spec.Q; ++k) {
            const double c = (k == 0) ? 1.0 : -Theta[static_cast<std::size_t>(k - 1)];
            for (std::size_t i = 0; i + static_cast<std::size_t>(k * spec.s) < m.size() &&
                                    i <= static_cast<std::size_t>(spec.q); ++i)
                b[i + static_cast<std::size_t>(k * spec.s)] += c * m[i];
        }
        m = std::move(b);
    }
    std::vector<double> e(total), w(total, 0.0);
    for (double& v : e) v = sigma * rng.gaussian();
    for (std::size_t t = 0; t < total; ++t) {
        double acc = constant + e[t];
        for (std::size_t j = 1; j < a.size() && j <= t; ++j)
            acc -= a[j] * w[t - j];
        for (std::size_t j = 1; j < m.size() && j <= t; ++j)
            acc -= m[j] * e[t - j];
        w[t] = acc;
    }
    std::vector<double> x(w.end() - static_cast<long>(n), w.end());
    // Integrate the differencing operators.
    for (int i = 0; i < spec.D; ++i) {
        for (std::size_t t = static_cast<std::size_t>(spec.s); t < x.size(); ++t)
            x[t] += x[t - static_cast<std::size_t>(spec.s)];
    }
    for (int i = 0; i < spec.d; ++i) {
        for (std::size_t t = 1; t < x.size(); ++t) x[t] += x[t - 1];
    }
    return x;
}

// Threshold AR: x_t = 0.8 x_{t-1} (x > 0) or -0.5 x_{t-1} (x <= 0), plus noise.
inline std::vector<double> simulate_threshold_ar(std::size_t n, wst::Rng& rng,
                                                 double sigma = 1.0) {
    std::vector<double> x(n + 200, 0.0);
    for (std::size_t t = 1; t < x.size(); ++t) {
        const double coeff = x[t - 1] > 0.0 ? 0.8 : -0.5;
        x[t] = coeff * x[t - 1] + sigma * rng.gaussian();
    }
    return {x.end() - static_cast<long>(n), x.end()};
}

class TempDir {
public:
    TempDir() {
        auto base = std::filesystem::temp_directory_path();
        for (int i = 0; i < 100; ++i) {
            auto candidate =
                base / ("wst-test-" + std::to_string(std::rand()) + "-" +
                        std::to_string(i));
            std::error_code ec;
            if (std::filesystem::create_directory(candidate, ec)) {
                path_ = candidate;
                return;
            }
        }
        throw std::runtime_error("cannot create temp dir");
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    std::string file(const std::string& name) const {
        return (path_ / name).string();
    }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace testsupport
