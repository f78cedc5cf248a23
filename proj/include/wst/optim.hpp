#pragma once

#include <functional>
#include <vector>

namespace wst::optim {

struct Options {
    int max_iterations = 500;
    double gradient_tolerance = 1e-8;   // infinity norm
    double gradient_step = 1e-6;        // central-difference half-width
    double f_tolerance = 1e-12;         // relative objective stall
};

struct Result {
    std::vector<double> x;
    double f = 0.0;
    double gradient_norm = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;     // gradient / stall criterion met before the cap
    bool hit_iteration_cap = false;
};

/// Dense quasi-Newton (BFGS) minimizer with backtracking line search and
/// central-difference gradients. Intended for small, smooth problems
/// (dimension below ~30).
Result minimize_bfgs(const std::function<double(const std::vector<double>&)>& f,
                     std::vector<double> x0, const Options& options = {});

} // namespace wst::optim
