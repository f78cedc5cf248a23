#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "wst/errors.hpp"
#include "wst/pipeline.hpp"

#include "support/helpers.hpp"

#include <cmath>

using namespace wst;
using namespace wst::pipeline;

namespace {

// Fast settings for orchestration tests: tiny encoder, narrow grid.
HybridConfig test_config() {
    HybridConfig cfg;
    cfg.family = wavelet::Family::Haar;
    cfg.level = 3;
    cfg.horizon = 12;
    cfg.grid.p_max = 1;
    cfg.grid.q_max = 1;
    cfg.grid.P_max = 1;
    cfg.grid.Q_max = 1;
    cfg.transformer.num_blocks = 1;
    cfg.transformer.d_model = 16;
    cfg.transformer.num_heads = 2;
    cfg.transformer.d_ff = 8;
    cfg.transformer.mlp_units = 8;
    cfg.transformer.dropout = 0.1;
    cfg.transformer.mlp_dropout = 0.1;
    cfg.transformer.window = 12;
    cfg.transformer.batch_size = 16;
    cfg.transformer.max_epochs = 12;
    cfg.transformer.early_stop_patience = 5;
    return cfg;
}

TimeSeries seasonal_series(std::size_t n, std::uint64_t seed,
                           double noise = 2.0) {
    Rng rng(seed);
    std::vector<double> v(n);
    for (std::size_t t = 0; t < n; ++t) {
        v[t] = 50.0 +
               25.0 * std::sin(2.0 * 3.14159265358979323846 *
                               static_cast<double>(t % 12) / 12.0) +
               noise * rng.gaussian();
    }
    return TimeSeries(v, {1971, 1});
}

} // namespace

TEST_CASE("hybrid run: additivity, shapes and report fields") {
    const TimeSeries series = seasonal_series(240, 5);
    const HybridConfig cfg = test_config();
    const HybridResult r = run_hybrid(series, cfg);

    CHECK(r.test_obs.size() == 48); // round(0.8*240) = 192 train, 48 test
    CHECK(r.train_size == 192);
    CHECK(r.level == 3);
    CHECK(r.components.size() == 4);
    CHECK(r.routing.size() == 4);

    // Reconstructed forecasts are the exact sum of component forecasts.
    for (std::size_t i = 0; i < r.test_pred.size(); ++i) {
        double acc = 0.0;
        for (const auto& c : r.components) acc += c.test_pred[i];
        CHECK(std::abs(acc - r.test_pred[i]) <= 1e-8);
    }
    for (std::size_t i = 0; i < r.future_raw.size(); ++i) {
        double acc = 0.0;
        for (const auto& c : r.components) acc += c.future[i];
        CHECK(std::abs(acc - r.future_raw[i]) <= 1e-8);
    }
    for (double v : r.future) CHECK(std::isfinite(v));
    for (double v : r.test_pred) CHECK(std::isfinite(v));

    CHECK(r.future.size() == 12);
    CHECK(r.future_start == MonthDate{1991, 1}); // 240 months after 1971-01

    const std::string json = report_json(r, cfg);
    for (const char* key :
         {"config", "routing", "components", "metrics", "taylor", "ljung_box",
          "forecasts", "split", "decomposition"}) {
        CHECK(json.find(key) != std::string::npos);
    }
}

TEST_CASE("identical config and seed give bit-identical results") {
    const TimeSeries series = seasonal_series(240, 6);
    HybridConfig cfg = test_config();
    cfg.seed = 77;
    const HybridResult a = run_hybrid(series, cfg);
    const HybridResult b = run_hybrid(series, cfg);
    CHECK(a.test_pred == b.test_pred);
    CHECK(a.future == b.future);
    CHECK(a.report.rmse == b.report.rmse);
    CHECK(a.ljung_box.statistic == b.ljung_box.statistic);
    REQUIRE(a.routing.size() == b.routing.size());
    for (std::size_t i = 0; i < a.routing.size(); ++i) {
        CHECK(a.routing[i].route == b.routing[i].route);
    }
}

TEST_CASE("level clamping: invariant form on the training window") {
    // max_level(636, 18) = 5 for the full series, but the decomposition
    // sees only the training window: max_level(509, 18) = 4.
    CHECK(wavelet::max_level(636, 18) == 5);
    CHECK(wavelet::max_level(509, 18) == 4);

    Rng rng(12);
    std::vector<double> v(636);
    for (std::size_t t = 0; t < v.size(); ++t) {
        v[t] = 60.0 +
               20.0 * std::sin(2.0 * 3.14159265358979323846 *
                               static_cast<double>(t % 12) / 12.0) +
               3.0 * rng.gaussian();
    }
    const TimeSeries series(v, {1971, 1});
    HybridConfig cfg = test_config();
    cfg.family = wavelet::Family::Coiflet3;
    cfg.level = 8;
    cfg.sarima_spec = sarima::Spec{}; // fixed spec: keep the run fast
    cfg.sarima_spec->p = 1;
    const HybridResult r = run_variant(series, cfg, Variant::WaveletSarima);
    CHECK(r.requested_level == 8);
    CHECK(r.level == 4);
    CHECK(r.level_clamped);
    const std::string json = report_json(r, cfg);
    CHECK(json.find("\"clamped\": true") != std::string::npos);
}

TEST_CASE("variant sarima is the standalone model with empty routing") {
    const TimeSeries series = seasonal_series(200, 7);
    HybridConfig cfg = test_config();
    const HybridResult r = run_variant(series, cfg, Variant::Sarima);
    CHECK(r.routing.empty());
    CHECK(r.components.size() == 1);
    CHECK(r.components[0].name == "series");
    CHECK(r.components[0].model.substr(0, 6) == "sarima");
    CHECK(r.level == 0);

    // equivalent direct computation: auto-select + fit + forecast
    const SplitPair split = split_train_test(series, cfg.split_ratio);
    const sarima::Spec spec =
        sarima::auto_select(split.train.view(), 12, cfg.grid);
    const sarima::Fit fit = sarima::fit(split.train.view(), spec);
    const std::vector<double> fc = sarima::forecast(
        fit, static_cast<int>(split.test.size()) + cfg.horizon);
    for (std::size_t i = 0; i < r.test_pred.size(); ++i) {
        CHECK(r.test_pred[i] == doctest::Approx(fc[i]).epsilon(1e-12));
    }
}

TEST_CASE("variant wavelet-sarima on white noise keeps additivity") {
    Rng rng(10);
    std::vector<double> v(150);
    for (double& x : v) x = 10.0 + rng.gaussian();
    const TimeSeries series(v, {1980, 1});
    HybridConfig cfg = test_config();
    cfg.level = 1;
    const HybridResult r = run_variant(series, cfg, Variant::WaveletSarima);
    CHECK(r.components.size() == 2);
    for (const auto& c : r.components) {
        CHECK(c.route == diagnostics::Route::Sarima);
    }
    for (std::size_t i = 0; i < r.test_pred.size(); ++i) {
        double acc = 0.0;
        for (const auto& c : r.components) acc += c.test_pred[i];
        CHECK(std::abs(acc - r.test_pred[i]) <= 1e-8);
    }
}

TEST_CASE("variant wavelet-transformer forces the transformer route") {
    const TimeSeries series = seasonal_series(180, 8);
    HybridConfig cfg = test_config();
    cfg.level = 2;
    cfg.transformer.max_epochs = 5;
    const HybridResult r =
        run_variant(series, cfg, Variant::WaveletTransformer);
    for (const auto& c : r.components) {
        if (!c.constant_mean) {
            CHECK(c.route == diagnostics::Route::Transformer);
        }
    }
}

TEST_CASE("hybrid on a noisy seasonal sine stays within 1.5x of SARIMA") {
    const TimeSeries series = seasonal_series(240, 9, 2.0);
    HybridConfig cfg = test_config();
    cfg.seed = 3;
    // components that route to the encoder need real training capacity
    cfg.transformer.d_model = 32;
    cfg.transformer.mlp_units = 16;
    cfg.transformer.max_epochs = 50;
    cfg.transformer.early_stop_patience = 10;
    const HybridResult hybrid = run_hybrid(series, cfg);
    const HybridResult standalone = run_variant(series, cfg, Variant::Sarima);
    CHECK(hybrid.report.rmse <= 1.5 * standalone.report.rmse);
}

TEST_CASE("forecast_future slices the labelled horizon") {
    const TimeSeries series = seasonal_series(180, 11);
    HybridConfig cfg = test_config();
    cfg.horizon = 24;
    const HybridResult r = run_hybrid(series, cfg);

    const auto h24 = forecast_future(r, 24);
    CHECK(h24.size() == 24);
    CHECK(h24.front().first == r.future_start);
    CHECK(h24.back().first == advance_months(r.future_start, 23));

    const auto h1 = forecast_future(r, 1);
    double acc = 0.0;
    for (const auto& c : r.components) acc += c.future[0];
    if (r.future[0] > 0.0) {
        CHECK(h1[0].second == doctest::Approx(acc).epsilon(1e-10));
    }

    CHECK_THROWS_AS(forecast_future(r, 25), DataError);
    CHECK_THROWS_AS(forecast_future(r, 0), DataError);
}

TEST_CASE("negative reconstructed forecasts are clipped when configured") {
    // Decaying near-zero series pushes forecasts below zero easily.
    Rng rng(14);
    std::vector<double> v(150);
    for (std::size_t t = 0; t < v.size(); ++t) {
        v[t] = std::max(0.0, 0.3 + 0.2 * rng.gaussian());
    }
    const TimeSeries series(v, {1980, 1});
    HybridConfig cfg = test_config();
    cfg.level = 1;
    const HybridResult r = run_variant(series, cfg, Variant::WaveletSarima);
    for (double f : r.future) CHECK(f >= 0.0);
    // raw values are retained for audit
    CHECK(r.future_raw.size() == r.future.size());

    HybridConfig keep = cfg;
    keep.clip_negative = false;
    const HybridResult r2 = run_variant(series, keep, Variant::WaveletSarima);
    CHECK(r2.future == r2.future_raw);
}

TEST_CASE("series shorter than ten cycles is rejected") {
    const TimeSeries series = seasonal_series(100, 1);
    CHECK_THROWS_AS(run_hybrid(series, test_config()), DataError);
}

TEST_CASE("component failures carry the component identity") {
    const TimeSeries series = seasonal_series(150, 2);
    HybridConfig cfg = test_config();
    cfg.level = 2;
    cfg.sarima_spec = sarima::Spec{};
    cfg.sarima_spec->p = 3;
    cfg.sarima_spec->q = 3;
    cfg.sarima_spec->P = 2;
    cfg.sarima_spec->Q = 2; // needs 10*(11) = 110 < 120 ok; force failure by D
    cfg.sarima_spec->D = 1;
    cfg.sarima_spec->d = 1;
    // differenced length 120 - 1 - 12 = 107 < 110 -> every component fails
    try {
        run_variant(series, cfg, Variant::WaveletSarima);
        FAIL("expected ModelError");
    } catch (const ModelError& e) {
        const std::string what = e.what();
        CHECK(what.find("component") != std::string::npos);
    }
}

TEST_CASE("variant names round-trip") {
    for (const char* name :
         {"sarima", "transformer", "wavelet-sarima", "wavelet-transformer",
          "wavelet-sarima-transformer"}) {
        CHECK(std::string(to_string(variant_from_string(name))) == name);
    }
    CHECK_THROWS_AS(variant_from_string("nope"), ConfigError);
}
