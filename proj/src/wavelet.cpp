#include "wst/wavelet.hpp"

#include "wst/errors.hpp"
#include "wst/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace wst::wavelet {
namespace {

// Scaling filters, lowest index first, sum = sqrt(2). Standard published
// tables rounded to nearest double; the filter-bank unit tests check the
// quadrature-mirror, unit-energy and vanishing-moment identities against
// these constants.
const double kHaar[2] = {
    0.70710678118654757, 0.70710678118654757};

const double kDaubechies4[8] = {
    0.23037781330889651,   0.71484657055291567,  0.63088076792985892,
    -0.027983769416859854, -0.18703481171909309, 0.030841381835560764,
    0.032883011666885197,  -0.010597401785069032};

const double kSymlet4[8] = {
    0.032223100604051466, -0.012603967262031304, -0.099219543576633526,
    0.29785779560530606,  0.8037387518051321,    0.49761866763277501,
    -0.029635527646002493, -0.075765714789502212};

const double kCoiflet3[18] = {
    -3.4599773197272774e-05, -7.0983302506379004e-05, 0.00046621695982040288,
    0.0011175187708306303,   -0.0025745176881367968,  -0.0090079761367306242,
    0.015880544863669452,    0.034555027573297731,    -0.082301927106299813,
    -0.071799821619154838,   0.42848347637737,        0.79377722262608719,
    0.40517690240911819,     -0.061123390002972539,   -0.065771911281469364,
    0.023452696142077165,    0.0077825964256727454,   -0.0037935128643808015};

std::span<const double> scaling_filter(Family f) {
    switch (f) {
        case Family::Haar: return kHaar;
        case Family::Daubechies4: return kDaubechies4;
        case Family::Symlet4: return kSymlet4;
        case Family::Coiflet3: return kCoiflet3;
    }
    throw DataError("unsupported wavelet family");
}

// out[n] += coeff * x[(n - shift) mod N], vectorized as two contiguous spans.
void add_shifted(double coeff, std::span<const double> x, std::size_t shift,
                 std::span<double> out) {
    const std::size_t n = x.size();
    kernels::axpy(coeff, x.data() + (n - shift), out.data(), shift);
    kernels::axpy(coeff, x.data(), out.data() + shift, n - shift);
}

// out[n] += coeff * x[(n + shift) mod N]
void add_shifted_fwd(double coeff, std::span<const double> x, std::size_t shift,
                     std::span<double> out) {
    const std::size_t n = x.size();
    kernels::axpy(coeff, x.data() + shift, out.data(), n - shift);
    kernels::axpy(coeff, x.data(), out.data() + (n - shift), shift);
}

// One analysis step at level j: filters upsampled by stride 2^(j-1) via
// index arithmetic (never materialized).
void analysis_step(std::span<const double> v_prev, const FilterBank& fb,
                   std::size_t stride, std::span<double> w_out,
                   std::span<double> v_out) {
    const std::size_t n = v_prev.size();
    std::fill(w_out.begin(), w_out.end(), 0.0);
    std::fill(v_out.begin(), v_out.end(), 0.0);
    for (int l = 0; l < fb.length(); ++l) {
        const std::size_t shift = (static_cast<std::size_t>(l) * stride) % n;
        add_shifted(fb.h_tilde[static_cast<std::size_t>(l)], v_prev, shift, w_out);
        add_shifted(fb.g_tilde[static_cast<std::size_t>(l)], v_prev, shift, v_out);
    }
}

// One synthesis step: v_prev[n] = sum_l h~_l w[(n + stride*l) mod N]
//                              + sum_l g~_l v[(n + stride*l) mod N]
void synthesis_step(std::span<const double> w, std::span<const double> v,
                    const FilterBank& fb, std::size_t stride,
                    std::span<double> v_prev) {
    const std::size_t n = v_prev.size();
    std::fill(v_prev.begin(), v_prev.end(), 0.0);
    for (int l = 0; l < fb.length(); ++l) {
        const std::size_t shift = (static_cast<std::size_t>(l) * stride) % n;
        if (!w.empty())
            add_shifted_fwd(fb.h_tilde[static_cast<std::size_t>(l)], w, shift, v_prev);
        if (!v.empty())
            add_shifted_fwd(fb.g_tilde[static_cast<std::size_t>(l)], v, shift, v_prev);
    }
}

void check_levels(std::size_t n, int levels) {
    if (levels < 1) throw DataError("decomposition level must be >= 1");
    const int cap = static_cast<int>(std::floor(std::log2(static_cast<double>(n))));
    if (levels > cap) {
        throw DataError("level " + std::to_string(levels) +
                        " exceeds floor(log2(N)) = " + std::to_string(cap) +
                        " for N = " + std::to_string(n));
    }
}

} // namespace

Family family_from_string(const std::string& name) {
    if (name == "haar") return Family::Haar;
    if (name == "db4") return Family::Daubechies4;
    if (name == "sym4") return Family::Symlet4;
    if (name == "coif3") return Family::Coiflet3;
    throw DataError("unknown wavelet family '" + name +
                    "' (expected haar|db4|sym4|coif3)");
}

const char* to_string(Family f) {
    switch (f) {
        case Family::Haar: return "haar";
        case Family::Daubechies4: return "db4";
        case Family::Symlet4: return "sym4";
        case Family::Coiflet3: return "coif3";
    }
    return "?";
}

int filter_length(Family f) {
    return static_cast<int>(scaling_filter(f).size());
}

FilterBank filter_bank(Family family) {
    const auto g = scaling_filter(family);
    const std::size_t L = g.size();
    FilterBank fb;
    fb.family = family;
    fb.g.assign(g.begin(), g.end());
    fb.h.resize(L);
    for (std::size_t l = 0; l < L; ++l) {
        fb.h[l] = ((l % 2 == 0) ? 1.0 : -1.0) * fb.g[L - 1 - l];
    }
    // Division keeps the Haar rescaled taps exactly 0.5.
    const double sqrt2 = std::sqrt(2.0);
    fb.g_tilde.resize(L);
    fb.h_tilde.resize(L);
    for (std::size_t l = 0; l < L; ++l) {
        fb.g_tilde[l] = fb.g[l] / sqrt2;
        fb.h_tilde[l] = fb.h[l] / sqrt2;
    }
    return fb;
}

int max_level(std::size_t n, int filter_length) {
    if (filter_length < 2) throw DataError("filter length must be >= 2");
    if (n < static_cast<std::size_t>(filter_length)) {
        throw DataError("series length " + std::to_string(n) +
                        " shorter than filter length " +
                        std::to_string(filter_length));
    }
    return static_cast<int>(std::floor(
        std::log2(static_cast<double>(n) / (filter_length - 1))));
}

ModwtCoefficients modwt(std::span<const double> x, Family family, int levels) {
    if (x.empty()) throw DataError("modwt: empty series");
    check_levels(x.size(), levels);
    const FilterBank fb = filter_bank(family);
    const std::size_t n = x.size();

    ModwtCoefficients out;
    out.family = family;
    out.levels = levels;
    out.detail.assign(static_cast<std::size_t>(levels), std::vector<double>(n));
    out.smooth.resize(n);

    std::vector<double> v_prev(x.begin(), x.end());
    std::vector<double> v_next(n);
    for (int j = 1; j <= levels; ++j) {
        const std::size_t stride = std::size_t{1} << (j - 1);
        analysis_step(v_prev, fb, stride % n,
                      out.detail[static_cast<std::size_t>(j - 1)], v_next);
        v_prev.swap(v_next);
    }
    out.smooth = std::move(v_prev);
    return out;
}

std::vector<double> imodwt(const ModwtCoefficients& coeffs) {
    const std::size_t n = coeffs.length();
    if (n == 0) throw DataError("imodwt: empty coefficients");
    if (coeffs.levels < 1 ||
        coeffs.detail.size() != static_cast<std::size_t>(coeffs.levels)) {
        throw DataError("imodwt: level/detail count mismatch");
    }
    for (const auto& w : coeffs.detail) {
        if (w.size() != n)
            throw DataError("imodwt: inconsistent coefficient lengths");
    }
    const FilterBank fb = filter_bank(coeffs.family);

    std::vector<double> v(coeffs.smooth);
    std::vector<double> v_prev(n);
    for (int j = coeffs.levels; j >= 1; --j) {
        const std::size_t stride = std::size_t{1} << (j - 1);
        synthesis_step(coeffs.detail[static_cast<std::size_t>(j - 1)], v, fb,
                       stride % n, v_prev);
        v.swap(v_prev);
    }
    return v;
}

std::vector<double> Decomposition::reconstruct() const {
    std::vector<double> acc(smooth);
    for (const auto& d : details) {
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += d[i];
    }
    return acc;
}

Decomposition mra(std::span<const double> x, Family family, int levels) {
    const ModwtCoefficients coeffs = modwt(x, family, levels);
    const FilterBank fb = filter_bank(family);
    const std::size_t n = x.size();

    Decomposition out;
    out.family = family;
    out.levels = levels;
    out.details.assign(static_cast<std::size_t>(levels), std::vector<double>(n));

    // D_j: synthesize from level j with every band but W_j zeroed.
    std::vector<double> u(n), u_prev(n);
    for (int j = 1; j <= levels; ++j) {
        std::size_t stride = std::size_t{1} << (j - 1);
        synthesis_step(coeffs.detail[static_cast<std::size_t>(j - 1)], {}, fb,
                       stride % n, u);
        for (int k = j - 1; k >= 1; --k) {
            stride = std::size_t{1} << (k - 1);
            synthesis_step({}, u, fb, stride % n, u_prev);
            u.swap(u_prev);
        }
        out.details[static_cast<std::size_t>(j - 1)] = u;
    }
    // S_J: synthesize the approximation band alone.
    u = coeffs.smooth;
    for (int k = levels; k >= 1; --k) {
        const std::size_t stride = std::size_t{1} << (k - 1);
        synthesis_step({}, u, fb, stride % n, u_prev);
        u.swap(u_prev);
    }
    out.smooth = std::move(u);
    return out;
}

} // namespace wst::wavelet
