#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "wst/errors.hpp"
#include "wst/metrics.hpp"

#include "support/helpers.hpp"

#include <cmath>

using namespace wst;

TEST_CASE("a perfect forecast maxes every index") {
    const std::vector<double> obs{3.0, 7.0, 1.0, 9.0, 4.0};
    const metrics::MetricReport r = metrics::compute_metrics(obs, obs);
    CHECK(r.rmse == 0.0);
    CHECK(r.mae == 0.0);
    CHECK(r.smape == 0.0);
    CHECK(r.willmott_d == doctest::Approx(1.0));
    CHECK(r.skill_score == doctest::Approx(1.0));
    CHECK(r.pbias == doctest::Approx(0.0));
    CHECK(r.explained_variance == doctest::Approx(1.0));
    CHECK(r.legates_mccabe_e1 == doctest::Approx(1.0));
}

TEST_CASE("the climatology forecast zeroes the efficiency scores") {
    const std::vector<double> obs{3.0, 7.0, 1.0, 9.0, 4.0};
    double mean = 0.0;
    for (double v : obs) mean += v;
    mean /= static_cast<double>(obs.size());
    const std::vector<double> pred(obs.size(), mean);
    const metrics::MetricReport r = metrics::compute_metrics(obs, pred);
    CHECK(r.legates_mccabe_e1 == doctest::Approx(0.0));
    CHECK(r.explained_variance == doctest::Approx(0.0));
    CHECK(r.skill_score == doctest::Approx(0.0)); // variance reference
}

TEST_CASE("skill-score convention reproduces the published back-solve") {
    // RMSE 98.731 with observed (population) std 171.34:
    // SS = 1 - (98.731/171.34)^2 = 0.668
    const double ss = 1.0 - (98.731 / 171.34) * (98.731 / 171.34);
    CHECK(std::abs(ss - 0.668) < 0.002);

    // ... and compute_metrics applies exactly that convention.
    Rng rng(12);
    std::vector<double> obs = testsupport::random_series(300, rng, 10.0);
    std::vector<double> pred = obs;
    for (double& v : pred) v += rng.gaussian();
    const metrics::MetricReport r = metrics::compute_metrics(obs, pred);
    double mo = 0.0;
    for (double v : obs) mo += v;
    mo /= static_cast<double>(obs.size());
    double var = 0.0, mse = 0.0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        var += (obs[i] - mo) * (obs[i] - mo);
        mse += (obs[i] - pred[i]) * (obs[i] - pred[i]);
    }
    var /= static_cast<double>(obs.size());
    mse /= static_cast<double>(obs.size());
    CHECK(r.skill_score == doctest::Approx(1.0 - mse / var).epsilon(1e-12));

    // explicit reference beats the default when supplied
    const metrics::MetricReport r2 =
        metrics::compute_metrics(obs, pred, 2.0 * var);
    CHECK(r2.skill_score == doctest::Approx(1.0 - mse / (2.0 * var)).epsilon(1e-12));
}

TEST_CASE("rmse dominates mae; smape stays within [0, 200]") {
    Rng rng(4);
    for (int rep = 0; rep < 50; ++rep) {
        const std::vector<double> obs = testsupport::random_series(40, rng, 5.0);
        std::vector<double> pred = testsupport::random_series(40, rng, 5.0);
        const metrics::MetricReport r = metrics::compute_metrics(obs, pred);
        CHECK(r.rmse >= r.mae);
        CHECK(r.smape >= 0.0);
        CHECK(r.smape <= 200.0);
        CHECK(r.willmott_d >= 0.0);
        CHECK(r.willmott_d <= 1.0);
    }
    // equal absolute errors make them coincide
    const std::vector<double> obs{1.0, 2.0, 3.0};
    const std::vector<double> pred{2.0, 1.0, 4.0};
    const metrics::MetricReport r = metrics::compute_metrics(obs, pred);
    CHECK(r.rmse == doctest::Approx(r.mae));
}

TEST_CASE("pbias is positive when the model underestimates") {
    const std::vector<double> obs{10.0, 20.0, 30.0};
    std::vector<double> pred{8.0, 18.0, 28.0}; // uniformly below
    CHECK(metrics::compute_metrics(obs, pred).pbias > 0.0);
    for (double& v : pred) v += 4.0; // uniformly above
    CHECK(metrics::compute_metrics(obs, pred).pbias < 0.0);
}

TEST_CASE("smape ignores double-zero terms") {
    const std::vector<double> obs{0.0, 1.0};
    const std::vector<double> pred{0.0, 1.0};
    CHECK(metrics::compute_metrics(obs, pred).smape == 0.0);
}

TEST_CASE("degenerate observations flag the agreement indices") {
    const std::vector<double> obs{5.0, 5.0, 5.0};
    const std::vector<double> pred{4.0, 5.0, 6.0};
    const metrics::MetricReport r = metrics::compute_metrics(obs, pred);
    CHECK(r.degenerate_obs);
    CHECK(std::isnan(r.willmott_d));
    CHECK(std::isnan(r.skill_score));
    CHECK(std::isnan(r.explained_variance));
    CHECK(std::isnan(r.legates_mccabe_e1));
    CHECK(r.rmse > 0.0); // error magnitudes remain defined
}

TEST_CASE("argument validation") {
    const std::vector<double> a{1.0, 2.0};
    const std::vector<double> b{1.0};
    CHECK_THROWS_AS(metrics::compute_metrics(a, b), DataError);
    CHECK_THROWS_AS(metrics::compute_metrics(b, b), DataError);
    CHECK_THROWS_AS(metrics::taylor_stats(a, std::vector<double>{2.0, 2.0}),
                    DataError);
}

TEST_CASE("taylor stats: identity and anti-correlation geometry") {
    const std::vector<double> obs{1.0, -2.0, 3.0, -2.0};
    const metrics::TaylorStats same = metrics::taylor_stats(obs, obs);
    CHECK(same.correlation == doctest::Approx(1.0));
    CHECK(same.std_pred == doctest::Approx(same.std_obs));
    CHECK(same.centered_rmse == doctest::Approx(0.0));

    std::vector<double> neg = obs;
    for (double& v : neg) v = -v;
    const metrics::TaylorStats anti = metrics::taylor_stats(obs, neg);
    CHECK(anti.correlation == doctest::Approx(-1.0));
    CHECK(anti.centered_rmse == doctest::Approx(2.0 * anti.std_obs));
}

TEST_CASE("law of cosines holds on random pairs") {
    Rng rng(99);
    for (int rep = 0; rep < 100; ++rep) {
        const std::vector<double> obs = testsupport::random_series(50, rng, 7.0);
        const std::vector<double> pred = testsupport::random_series(50, rng, 7.0);
        const metrics::TaylorStats t = metrics::taylor_stats(obs, pred);
        const double lhs = t.centered_rmse * t.centered_rmse;
        const double rhs = t.std_obs * t.std_obs + t.std_pred * t.std_pred -
                           2.0 * t.std_obs * t.std_pred * t.correlation;
        CHECK(std::abs(lhs - rhs) <= 1e-6 * std::max(1.0, std::abs(rhs)));
    }
}

TEST_CASE("published Taylor anchor: ARP SARIMA row") {
    // r = 0.8288, std_obs = 171.34, std_pred = 118.91 -> centered RMSE 98.61
    const double crmse =
        std::sqrt(171.34 * 171.34 + 118.91 * 118.91 -
                  2.0 * 171.34 * 118.91 * 0.8288);
    CHECK(std::abs(crmse - 98.6) < 0.5);
    CHECK(crmse == doctest::Approx(98.61).epsilon(0.005));
}
