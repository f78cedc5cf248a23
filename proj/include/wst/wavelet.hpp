#pragma once

#include <span>
#include <string>
#include <vector>

namespace wst::wavelet {

enum class Family { Haar, Daubechies4, Symlet4, Coiflet3 };

Family family_from_string(const std::string& name); // haar|db4|sym4|coif3
const char* to_string(Family f);
int filter_length(Family f); // 2, 8, 8, 18

/// Orthonormal filter pair plus the /sqrt(2) rescalings used by the
/// maximal-overlap transform. g is the scaling (low-pass) filter with
/// sum sqrt(2); h is the wavelet filter h_l = (-1)^l g_{L-1-l}.
struct FilterBank {
    Family family;
    std::vector<double> g;
    std::vector<double> h;
    std::vector<double> g_tilde; // g / sqrt(2)
    std::vector<double> h_tilde; // h / sqrt(2)

    int length() const { return static_cast<int>(g.size()); }
};

FilterBank filter_bank(Family family);

/// floor(log2(n / (L - 1))); the deepest level whose equivalent filter
/// still fits the series. Requires n >= L.
int max_level(std::size_t n, int filter_length);

/// Non-decimated coefficients: J detail series and the level-J
/// approximation, all of length N, periodic boundary.
struct ModwtCoefficients {
    std::vector<std::vector<double>> detail; // W_1..W_J
    std::vector<double> smooth;              // V_J
    Family family = Family::Haar;
    int levels = 0;

    std::size_t length() const { return smooth.size(); }
};

ModwtCoefficients modwt(std::span<const double> x, Family family, int levels);
std::vector<double> imodwt(const ModwtCoefficients& coeffs);

/// Additive multiresolution components: x = sum_j D_j + S_J.
struct Decomposition {
    std::vector<std::vector<double>> details; // D_1..D_J
    std::vector<double> smooth;               // S_J
    Family family = Family::Haar;
    int levels = 0;

    std::size_t length() const { return smooth.size(); }
    std::vector<double> reconstruct() const;
};

Decomposition mra(std::span<const double> x, Family family, int levels);

} // namespace wst::wavelet
