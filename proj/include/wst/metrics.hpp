#pragma once

#include <optional>
#include <span>
#include <string>

namespace wst::metrics {

/// The eight accuracy measures. Units follow the inputs (mm for rainfall);
/// smape and pbias are percentages. When the observations have zero
/// variance the agreement/efficiency indices are undefined and
/// degenerate_obs is set (their values are then NaN).
struct MetricReport {
    double rmse = 0.0;
    double mae = 0.0;
    double smape = 0.0;
    double willmott_d = 0.0;
    double skill_score = 0.0;
    double pbias = 0.0;
    double explained_variance = 0.0;
    double legates_mccabe_e1 = 0.0;
    bool degenerate_obs = false;
};

/// Taylor-diagram coordinates; population (1/n) standard deviations so the
/// law-of-cosines identity crmse^2 = so^2 + sp^2 - 2 so sp r is exact.
struct TaylorStats {
    double correlation = 0.0;
    double std_obs = 0.0;
    double std_pred = 0.0;
    double centered_rmse = 0.0;
};

/// reference_mse defaults to the population variance of obs (climatology
/// reference for the skill score).
MetricReport compute_metrics(std::span<const double> obs,
                             std::span<const double> pred,
                             std::optional<double> reference_mse = {});

TaylorStats taylor_stats(std::span<const double> obs,
                         std::span<const double> pred);

std::string to_json(const MetricReport& report);
std::string to_json(const TaylorStats& stats);

} // namespace wst::metrics
