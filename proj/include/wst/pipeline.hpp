#pragma once

#include "wst/diagnostics.hpp"
#include "wst/metrics.hpp"
#include "wst/sarima.hpp"
#include "wst/timeseries.hpp"
#include "wst/transformer.hpp"
#include "wst/wavelet.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wst::pipeline {

enum class Variant {
    Sarima,
    Transformer,
    WaveletSarima,
    WaveletTransformer,
    WaveletSarimaTransformer,
};

Variant variant_from_string(const std::string& name);
const char* to_string(Variant v);

struct HybridConfig {
    wavelet::Family family = wavelet::Family::Haar;
    int level = 0; // 0 = auto: min(8, max_level), clamped either way
    double split_ratio = 0.8;
    double routing_alpha = 0.05;
    std::optional<sarima::Spec> sarima_spec; // nullopt = auto per component
    sarima::GridBounds grid;
    transformer::Config transformer;
    int horizon = 24;
    std::uint64_t seed = 0;
    bool clip_negative = true;
    int ljung_box_lags = 12;
};

struct ComponentModelSummary {
    std::string name; // "D1".."DJ", "SJ", or "series"
    diagnostics::Route route = diagnostics::Route::Sarima;
    std::string model; // human-readable fitted-model description
    bool constant_mean = false;
    double aic = 0.0;              // SARIMA only
    std::vector<double> test_pred; // per-component test-window forecast
    std::vector<double> future;    // per-component h-step extension
};

struct HybridResult {
    Variant variant = Variant::WaveletSarimaTransformer;
    wavelet::Family family = wavelet::Family::Haar;
    int requested_level = 0;
    int level = 0; // effective after clamping; 0 when no decomposition
    bool level_clamped = false;

    std::vector<diagnostics::ComponentRouting> routing;
    std::vector<ComponentModelSummary> components;

    std::vector<double> test_obs;
    std::vector<double> test_pred;   // reconstructed, unclipped (additive)
    std::vector<double> future_raw;  // reconstructed, unclipped
    std::vector<double> future;      // emitted (clipped at 0 when configured)

    metrics::MetricReport report;
    metrics::TaylorStats taylor;
    diagnostics::TestResult ljung_box;

    MonthDate test_start{};
    MonthDate future_start{};
    std::size_t train_size = 0;
    std::size_t test_size = 0;
};

/// The full decompose -> classify -> route-fit -> forecast -> reconstruct
/// -> evaluate pipeline. Deterministic for a given config/seed/data.
HybridResult run_hybrid(const TimeSeries& series, const HybridConfig& config);

/// Degenerate pipelines sharing the report schema: standalone models skip
/// the decomposition; two-stage hybrids force a single route.
HybridResult run_variant(const TimeSeries& series, const HybridConfig& config,
                         Variant variant);

/// Month-labelled slice of the reconstructed beyond-sample forecast.
std::vector<std::pair<MonthDate, double>>
forecast_future(const HybridResult& result, int horizon = 24);

std::string report_json(const HybridResult& result, const HybridConfig& config);

/// The Table-2 shaped matrix: 2 standalone variants plus 4 families x 3
/// hybrid stages, in a fixed column order.
struct ComparisonMatrix {
    std::vector<std::string> model_names; // 14 columns
    std::vector<std::string> metric_names; // 8 rows
    std::vector<std::vector<double>> values; // [metric][model]
};

ComparisonMatrix run_comparison(const TimeSeries& series,
                                const HybridConfig& config);

} // namespace wst::pipeline
