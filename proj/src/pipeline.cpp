#include "wst/pipeline.hpp"

#include "wst/errors.hpp"
#include "wst/kernels.hpp"

#include "json.hpp"

#include <algorithm>
#include <future>
#include <cmath>
#include <limits>

namespace wst::pipeline {
namespace {

// Near-zero-variance components are forecast as their mean; the threshold
// is relative to the training-series variance.
constexpr double kConstantVarianceRatio = 1e-10;

double population_variance(std::span<const double> x) {
    const double n = static_cast<double>(x.size());
    const double mean = kernels::sum(x.data(), x.size()) / n;
    double acc = 0.0;
    for (double v : x) acc += (v - mean) * (v - mean);
    return acc / n;
}

struct ComponentInput {
    std::string name;
    std::vector<double> values;
    // Samples at the end of the component that the circular boundary has
    // contaminated (the equivalent synthesis filter wraps onto the series
    // start there). Models condition on the clean prefix and forecast
    // through the trimmed zone.
    std::size_t seam_trim = 0;
};

// Fits one component and forecasts `test_len + horizon` values past the
// training window.
ComponentModelSummary
model_component(const ComponentInput& comp, diagnostics::Route route,
                const HybridConfig& config, double train_variance,
                std::size_t test_len, std::size_t component_index) {
    ComponentModelSummary out;
    out.name = comp.name;
    out.route = route;
    const std::size_t steps =
        comp.seam_trim + test_len + static_cast<std::size_t>(config.horizon);
    const std::span<const double> clean(comp.values.data(),
                                        comp.values.size() - comp.seam_trim);

    const double comp_var = population_variance(comp.values);
    if (comp_var < kConstantVarianceRatio * train_variance) {
        const double mean = kernels::sum(comp.values.data(), comp.values.size()) /
                            static_cast<double>(comp.values.size());
        out.constant_mean = true;
        out.model = "constant-mean";
        out.route = diagnostics::Route::Sarima;
        out.test_pred.assign(test_len, mean);
        out.future.assign(static_cast<std::size_t>(config.horizon), mean);
        return out;
    }

    std::vector<double> forecast;
    try {
        if (route == diagnostics::Route::Sarima) {
            const sarima::Spec spec =
                config.sarima_spec.has_value()
                    ? *config.sarima_spec
                    : sarima::auto_select(clean, 12, config.grid);
            const sarima::Fit fit = sarima::fit(clean, spec);
            forecast = sarima::forecast(fit, static_cast<int>(steps));
            out.model = "sarima" + spec.to_string();
            out.aic = fit.aic;
        } else {
            transformer::Config tc = config.transformer;
            tc.seed = Rng::derive(config.seed, 100 + component_index).next_u64();
            const transformer::WindowDataset windows =
                transformer::make_windows(clean, tc.window, tc.horizon);
            const transformer::Model model = transformer::train(windows, tc);
            forecast = transformer::forecast_recursive(model, clean,
                                                       static_cast<int>(steps));
            out.model = "transformer(blocks=" + std::to_string(tc.num_blocks) +
                        ",d_model=" + std::to_string(tc.d_model) +
                        ",heads=" + std::to_string(tc.num_heads) + ")";
        }
    } catch (const std::exception& e) {
        throw ModelError("component " + comp.name + ": " + e.what());
    }
    for (double v : forecast) {
        if (!std::isfinite(v)) {
            throw ModelError("component " + comp.name +
                             ": non-finite forecast value");
        }
    }
    out.test_pred.assign(
        forecast.begin() + static_cast<long>(comp.seam_trim),
        forecast.begin() + static_cast<long>(comp.seam_trim + test_len));
    out.future.assign(
        forecast.begin() + static_cast<long>(comp.seam_trim + test_len),
        forecast.end());
    return out;
}

void evaluate_result(HybridResult& result, const HybridConfig& config) {
    result.report = metrics::compute_metrics(result.test_obs, result.test_pred);
    result.taylor = metrics::taylor_stats(result.test_obs, result.test_pred);
    std::vector<double> residuals(result.test_obs.size());
    kernels::sub(result.test_obs.data(), result.test_pred.data(),
                 residuals.data(), residuals.size());
    result.ljung_box = diagnostics::ljung_box(residuals, config.ljung_box_lags,
                                              config.routing_alpha);
    result.future = result.future_raw;
    if (config.clip_negative) {
        for (double& v : result.future) v = std::max(0.0, v);
    }
}

HybridResult run_impl(const TimeSeries& series, const HybridConfig& config,
                      Variant variant) {
    if (series.size() < 10 * static_cast<std::size_t>(series.period())) {
        throw DataError("series too short: need at least 10 seasonal cycles");
    }
    if (config.horizon < 1) throw ConfigError("horizon must be >= 1");
    config.transformer.validate();

    const SplitPair split = split_train_test(series, config.split_ratio);
    const std::vector<double>& train = split.train.values();
    const double train_variance = population_variance(train);

    HybridResult result;
    result.variant = variant;
    result.family = config.family;
    result.test_obs = split.test.values();
    result.test_start = split.test.start();
    result.future_start = series.end();
    result.train_size = split.train.size();
    result.test_size = split.test.size();
    const std::size_t test_len = split.test.size();

    const bool uses_wavelet = variant != Variant::Sarima &&
                              variant != Variant::Transformer;

    std::vector<ComponentInput> components;
    if (uses_wavelet) {
        const int L = wavelet::filter_length(config.family);
        const int jmax = wavelet::max_level(train.size(), L);
        result.requested_level = config.level > 0 ? config.level : 8;
        result.level = std::min(result.requested_level, jmax);
        if (result.level < 1) {
            throw DataError("training series too short for any decomposition");
        }
        result.level_clamped = result.level < result.requested_level;

        // Decomposition sees only the training window (the circular
        // boundary must not leak test values).
        const wavelet::Decomposition decomp =
            wavelet::mra(train, config.family, result.level);

        // Synthesis at level j wraps (2^j - 1)(L - 1) samples of component
        // tail onto the series start; capped so long filters keep enough
        // data to fit.
        const auto seam = [&](int j) {
            const auto reach = static_cast<std::size_t>(
                ((std::size_t{1} << j) - 1) * static_cast<std::size_t>(L - 1));
            return std::min(reach, train.size() / 4);
        };
        for (int j = 0; j < result.level; ++j) {
            components.push_back({"D" + std::to_string(j + 1),
                                  decomp.details[static_cast<std::size_t>(j)],
                                  seam(j + 1)});
        }
        components.push_back({"S" + std::to_string(result.level), decomp.smooth,
                              seam(result.level)});

        for (const auto& comp : components) {
            diagnostics::ComponentRouting routing;
            routing.component = comp.name;
            routing.test = diagnostics::tsay_test(comp.values, 0,
                                                  config.routing_alpha);
            switch (variant) {
                case Variant::WaveletSarima:
                    routing.route = diagnostics::Route::Sarima;
                    break;
                case Variant::WaveletTransformer:
                    routing.route = diagnostics::Route::Transformer;
                    break;
                default:
                    routing.route =
                        routing.test.decision == diagnostics::Decision::Nonlinear
                            ? diagnostics::Route::Transformer
                            : diagnostics::Route::Sarima;
            }
            result.routing.push_back(routing);
        }
    } else {
        ComponentInput whole;
        whole.name = "series";
        whole.values = train;
        components.push_back(std::move(whole));
    }

    result.test_pred.assign(test_len, 0.0);
    result.future_raw.assign(static_cast<std::size_t>(config.horizon), 0.0);

    // Component fits are independent; run them concurrently and join in
    // component order so concurrency never changes the result.
    std::vector<std::future<ComponentModelSummary>> fits;
    fits.reserve(components.size());
    for (std::size_t c = 0; c < components.size(); ++c) {
        diagnostics::Route route = diagnostics::Route::Sarima;
        if (uses_wavelet) {
            route = result.routing[c].route;
        } else if (variant == Variant::Transformer) {
            route = diagnostics::Route::Transformer;
        }
        fits.push_back(std::async(std::launch::async, [&, c, route] {
            return model_component(components[c], route, config,
                                   train_variance, test_len, c);
        }));
    }
    for (auto& fit : fits) {
        ComponentModelSummary summary = fit.get();
        for (std::size_t i = 0; i < test_len; ++i)
            result.test_pred[i] += summary.test_pred[i];
        for (std::size_t i = 0; i < result.future_raw.size(); ++i)
            result.future_raw[i] += summary.future[i];
        result.components.push_back(std::move(summary));
    }

    evaluate_result(result, config);
    return result;
}

} // namespace

Variant variant_from_string(const std::string& name) {
    if (name == "sarima") return Variant::Sarima;
    if (name == "transformer") return Variant::Transformer;
    if (name == "wavelet-sarima") return Variant::WaveletSarima;
    if (name == "wavelet-transformer") return Variant::WaveletTransformer;
    if (name == "wavelet-sarima-transformer")
        return Variant::WaveletSarimaTransformer;
    throw ConfigError("unknown variant '" + name + "'");
}

const char* to_string(Variant v) {
    switch (v) {
        case Variant::Sarima: return "sarima";
        case Variant::Transformer: return "transformer";
        case Variant::WaveletSarima: return "wavelet-sarima";
        case Variant::WaveletTransformer: return "wavelet-transformer";
        case Variant::WaveletSarimaTransformer:
            return "wavelet-sarima-transformer";
    }
    return "?";
}

HybridResult run_hybrid(const TimeSeries& series, const HybridConfig& config) {
    return run_impl(series, config, Variant::WaveletSarimaTransformer);
}

HybridResult run_variant(const TimeSeries& series, const HybridConfig& config,
                         Variant variant) {
    return run_impl(series, config, variant);
}

std::vector<std::pair<MonthDate, double>>
forecast_future(const HybridResult& result, int horizon) {
    if (horizon < 1 ||
        static_cast<std::size_t>(horizon) > result.future.size()) {
        throw DataError("forecast_future: horizon must be in [1, " +
                        std::to_string(result.future.size()) + "]");
    }
    std::vector<std::pair<MonthDate, double>> out;
    out.reserve(static_cast<std::size_t>(horizon));
    for (int i = 0; i < horizon; ++i) {
        out.emplace_back(advance_months(result.future_start, i),
                         result.future[static_cast<std::size_t>(i)]);
    }
    return out;
}

std::string report_json(const HybridResult& result, const HybridConfig& config) {
    nlohmann::json j;
    j["config"] = {
        {"variant", to_string(result.variant)},
        {"family", wavelet::to_string(config.family)},
        {"level", config.level == 0 ? "auto" : std::to_string(config.level)},
        {"split_ratio", config.split_ratio},
        {"routing_alpha", config.routing_alpha},
        {"order", config.sarima_spec.has_value() ? config.sarima_spec->to_string()
                                                 : std::string("auto")},
        {"horizon", config.horizon},
        {"seed", config.seed},
        {"clip_negative", config.clip_negative},
        {"transformer",
         {{"num_blocks", config.transformer.num_blocks},
          {"d_model", config.transformer.d_model},
          {"num_heads", config.transformer.num_heads},
          {"d_ff", config.transformer.d_ff},
          {"mlp_units", config.transformer.mlp_units},
          {"dropout", config.transformer.dropout},
          {"mlp_dropout", config.transformer.mlp_dropout},
          {"window", config.transformer.window},
          {"batch_size", config.transformer.batch_size},
          {"max_epochs", config.transformer.max_epochs},
          {"early_stop_patience", config.transformer.early_stop_patience},
          {"learning_rate", config.transformer.learning_rate}}}};
    j["split"] = {{"train", result.train_size}, {"test", result.test_size}};
    if (result.level > 0) {
        j["decomposition"] = {{"family", wavelet::to_string(result.family)},
                              {"requested_level", result.requested_level},
                              {"effective_level", result.level},
                              {"clamped", result.level_clamped}};
    }
    nlohmann::json routing = nlohmann::json::array();
    for (const auto& r : result.routing) {
        routing.push_back({{"component", r.component},
                           {"statistic", r.test.statistic},
                           {"p_value", r.test.p_value},
                           {"degenerate", r.test.degenerate},
                           {"decision", diagnostics::to_string(r.test.decision)},
                           {"route", diagnostics::to_string(r.route)}});
    }
    j["routing"] = routing;
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& c : result.components) {
        nlohmann::json jc{{"name", c.name},
                          {"route", diagnostics::to_string(c.route)},
                          {"model", c.model},
                          {"constant_mean", c.constant_mean}};
        if (c.route == diagnostics::Route::Sarima && !c.constant_mean) {
            jc["aic"] = c.aic;
        }
        comps.push_back(jc);
    }
    j["components"] = comps;
    j["metrics"] = nlohmann::json::parse(metrics::to_json(result.report));
    j["taylor"] = nlohmann::json::parse(metrics::to_json(result.taylor));
    j["ljung_box"] = {{"statistic", result.ljung_box.statistic},
                      {"p_value", result.ljung_box.p_value},
                      {"df", result.ljung_box.df1},
                      {"decision",
                       diagnostics::to_string(result.ljung_box.decision)}};
    nlohmann::json forecasts = nlohmann::json::array();
    for (std::size_t i = 0; i < result.future.size(); ++i) {
        forecasts.push_back(
            {{"month",
              to_string(advance_months(result.future_start, static_cast<long long>(i)))},
             {"value", result.future[i]},
             {"raw", result.future_raw[i]}});
    }
    j["forecasts"] = forecasts;
    return j.dump(2);
}

ComparisonMatrix run_comparison(const TimeSeries& series,
                                const HybridConfig& config) {
    ComparisonMatrix out;
    out.metric_names = {"RMSE",  "MAE",   "SMAPE", "Willmott_d",
                        "Skill_Score", "PBIAS", "Explained_Variance",
                        "Legates_McCabe_E1"};

    const wavelet::Family families[4] = {
        wavelet::Family::Haar, wavelet::Family::Daubechies4,
        wavelet::Family::Symlet4, wavelet::Family::Coiflet3};
    const char* family_tags[4] = {"H", "D", "S", "C"};

    struct Cell {
        std::string name;
        wavelet::Family family;
        Variant variant;
    };
    std::vector<Cell> cells;
    cells.push_back({"SARIMA", config.family, Variant::Sarima});
    cells.push_back({"Transformer", config.family, Variant::Transformer});
    for (int f = 0; f < 4; ++f) {
        cells.push_back({std::string("W(") + family_tags[f] + ")-S",
                         families[f], Variant::WaveletSarima});
    }
    for (int f = 0; f < 4; ++f) {
        cells.push_back({std::string("W(") + family_tags[f] + ")-T",
                         families[f], Variant::WaveletTransformer});
    }
    for (int f = 0; f < 4; ++f) {
        cells.push_back({std::string("W(") + family_tags[f] + ")-ST",
                         families[f], Variant::WaveletSarimaTransformer});
    }

    out.values.assign(out.metric_names.size(),
                      std::vector<double>(cells.size(), 0.0));
    for (std::size_t c = 0; c < cells.size(); ++c) {
        out.model_names.push_back(cells[c].name);
        HybridConfig cell_config = config;
        cell_config.family = cells[c].family;
        const HybridResult r = run_variant(series, cell_config, cells[c].variant);
        out.values[0][c] = r.report.rmse;
        out.values[1][c] = r.report.mae;
        out.values[2][c] = r.report.smape;
        out.values[3][c] = r.report.willmott_d;
        out.values[4][c] = r.report.skill_score;
        out.values[5][c] = r.report.pbias;
        out.values[6][c] = r.report.explained_variance;
        out.values[7][c] = r.report.legates_mccabe_e1;
    }
    return out;
}

} // namespace wst::pipeline
