#include "wst/metrics.hpp"

#include "wst/errors.hpp"
#include "wst/kernels.hpp"

#include "json.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace wst::metrics {
namespace {

void check_lengths(std::span<const double> obs, std::span<const double> pred) {
    if (obs.size() != pred.size()) {
        throw DataError("obs/pred length mismatch: " +
                        std::to_string(obs.size()) + " vs " +
                        std::to_string(pred.size()));
    }
    if (obs.size() < 2) throw DataError("need at least 2 observations");
}

} // namespace

MetricReport compute_metrics(std::span<const double> obs,
                             std::span<const double> pred,
                             std::optional<double> reference_mse) {
    check_lengths(obs, pred);
    const std::size_t n = obs.size();
    const double nd = static_cast<double>(n);
    const double nan = std::numeric_limits<double>::quiet_NaN();

    const double obs_mean = kernels::sum(obs.data(), n) / nd;

    double sse = 0.0, sae = 0.0, smape_acc = 0.0, obs_sum = 0.0, err_sum = 0.0;
    double pot_err = 0.0, abs_dev_obs = 0.0, obs_var_acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = obs[i] - pred[i];
        sse += e * e;
        sae += std::abs(e);
        const double denom = (std::abs(obs[i]) + std::abs(pred[i])) / 2.0;
        if (denom > 0.0) smape_acc += std::abs(e) / denom;
        obs_sum += obs[i];
        err_sum += e;
        const double po = std::abs(pred[i] - obs_mean) + std::abs(obs[i] - obs_mean);
        pot_err += po * po;
        abs_dev_obs += std::abs(obs[i] - obs_mean);
        obs_var_acc += (obs[i] - obs_mean) * (obs[i] - obs_mean);
    }
    const double mse = sse / nd;
    const double obs_var = obs_var_acc / nd; // population

    MetricReport r;
    r.rmse = std::sqrt(mse);
    r.mae = sae / nd;
    r.smape = 100.0 / nd * smape_acc;
    r.pbias = (obs_sum != 0.0) ? 100.0 * err_sum / obs_sum : nan;
    r.degenerate_obs = !(obs_var > 0.0);

    if (r.degenerate_obs) {
        r.willmott_d = nan;
        r.skill_score = nan;
        r.explained_variance = nan;
        r.legates_mccabe_e1 = nan;
        return r;
    }

    r.willmott_d = (pot_err > 0.0) ? 1.0 - sse / pot_err : 1.0;

    const double ref = reference_mse.value_or(obs_var);
    r.skill_score = 1.0 - mse / ref;

    // Var(obs - pred) / Var(obs), population convention in both.
    const double err_mean = err_sum / nd;
    double err_var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = obs[i] - pred[i] - err_mean;
        err_var += e * e;
    }
    err_var /= nd;
    r.explained_variance = 1.0 - err_var / obs_var;

    r.legates_mccabe_e1 = 1.0 - sae / abs_dev_obs;
    return r;
}

TaylorStats taylor_stats(std::span<const double> obs,
                         std::span<const double> pred) {
    check_lengths(obs, pred);
    const std::size_t n = obs.size();
    const double nd = static_cast<double>(n);

    const double mo = kernels::sum(obs.data(), n) / nd;
    const double mp = kernels::sum(pred.data(), n) / nd;

    double so2 = 0.0, sp2 = 0.0, cov = 0.0, crmse2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = obs[i] - mo;
        const double b = pred[i] - mp;
        so2 += a * a;
        sp2 += b * b;
        cov += a * b;
        crmse2 += (a - b) * (a - b);
    }
    so2 /= nd;
    sp2 /= nd;
    cov /= nd;
    crmse2 /= nd;

    if (!(so2 > 0.0) || !(sp2 > 0.0)) {
        throw DataError("taylor_stats: zero-variance input");
    }

    TaylorStats t;
    t.std_obs = std::sqrt(so2);
    t.std_pred = std::sqrt(sp2);
    t.correlation = cov / (t.std_obs * t.std_pred);
    t.centered_rmse = std::sqrt(crmse2);
    return t;
}

std::string to_json(const MetricReport& r) {
    nlohmann::json j{{"rmse", r.rmse},
                     {"mae", r.mae},
                     {"smape", r.smape},
                     {"willmott_d", r.willmott_d},
                     {"skill_score", r.skill_score},
                     {"pbias", r.pbias},
                     {"explained_variance", r.explained_variance},
                     {"legates_mccabe_e1", r.legates_mccabe_e1},
                     {"degenerate_obs", r.degenerate_obs}};
    return j.dump(2);
}

std::string to_json(const TaylorStats& t) {
    nlohmann::json j{{"correlation", t.correlation},
                     {"std_obs", t.std_obs},
                     {"std_pred", t.std_pred},
                     {"centered_rmse", t.centered_rmse}};
    return j.dump(2);
}

} // namespace wst::metrics
