#include "wst/cli.hpp"

#include "wst/config.hpp"
#include "wst/csv.hpp"
#include "wst/diagnostics.hpp"
#include "wst/errors.hpp"
#include "wst/metrics.hpp"
#include "wst/pipeline.hpp"
#include "wst/sarima.hpp"
#include "wst/timeseries.hpp"
#include "wst/transformer.hpp"
#include "wst/wavelet.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

namespace wst::cli {
namespace {

struct CommonFlags {
    std::string data;
    std::string config_path;
    std::string out;
    std::string family;
    int level = -1;
    double ratio = -1.0;
    int horizon = -1;
    long long seed = -1;
    std::string order;
    std::string variant;
};

config::RunSettings resolve_settings(const CommonFlags& f) {
    config::RunSettings settings;
    if (!f.config_path.empty()) {
        settings = config::load_run_config(f.config_path);
    }
    if (!f.family.empty())
        config::apply_setting(settings, "pipeline", "family", f.family);
    if (f.level >= 0)
        config::apply_setting(settings, "pipeline", "level",
                              f.level == 0 ? "auto" : std::to_string(f.level));
    if (f.ratio > 0.0) settings.hybrid.split_ratio = f.ratio;
    if (f.horizon > 0) settings.hybrid.horizon = f.horizon;
    if (f.seed >= 0)
        settings.hybrid.seed = static_cast<std::uint64_t>(f.seed);
    if (!f.order.empty())
        config::apply_setting(settings, "sarima", "order", f.order);
    if (!f.variant.empty())
        settings.variant = pipeline::variant_from_string(f.variant);
    return settings;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << text << "\n";
    if (!out) throw DataError("write failed: " + path);
}

void write_month_value_csv(const std::string& path,
                           const std::vector<std::pair<MonthDate, double>>& rows) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << "month,value\n";
    out.precision(17);
    for (const auto& [month, value] : rows) {
        out << to_string(month) << "," << value << "\n";
    }
    if (!out) throw DataError("write failed: " + path);
}

std::string sibling_path(const std::string& anchor, const std::string& name) {
    const std::filesystem::path p(anchor);
    return (p.has_parent_path() ? p.parent_path() / name
                                : std::filesystem::path(name))
        .string();
}

void cmd_decompose(const CommonFlags& f) {
    const TimeSeries series = csv::load_monthly_csv(f.data);
    const wavelet::Family family = f.family.empty()
                                       ? wavelet::Family::Haar
                                       : wavelet::family_from_string(f.family);
    const int jmax =
        wavelet::max_level(series.size(), wavelet::filter_length(family));
    const int level = f.level > 0 ? f.level : std::min(8, jmax);
    const wavelet::Decomposition decomp =
        wavelet::mra(series.view(), family, level);

    std::vector<std::string> header{"t"};
    std::vector<std::vector<double>> columns;
    std::vector<double> t(series.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i);
    columns.push_back(std::move(t));
    for (int j = 1; j <= level; ++j) {
        header.push_back("D" + std::to_string(j));
        columns.push_back(decomp.details[static_cast<std::size_t>(j - 1)]);
    }
    header.push_back("S" + std::to_string(level));
    columns.push_back(decomp.smooth);
    header.push_back("reconstruction_error");
    const std::vector<double> recon = decomp.reconstruct();
    std::vector<double> err(series.size());
    for (std::size_t i = 0; i < err.size(); ++i) err[i] = series[i] - recon[i];
    columns.push_back(std::move(err));
    csv::write_csv(f.out, header, columns);
    std::cerr << "wrote " << f.out << " (" << level << " levels, "
              << wavelet::to_string(family) << ")\n";
}

void cmd_fit_sarima(const CommonFlags& f) {
    const TimeSeries series = csv::load_monthly_csv(f.data);
    const config::RunSettings settings = resolve_settings(f);
    sarima::Spec spec;
    if (settings.hybrid.sarima_spec.has_value()) {
        spec = *settings.hybrid.sarima_spec;
    } else {
        spec = sarima::auto_select(series.view(), series.period(),
                                   settings.hybrid.grid);
    }
    const sarima::Fit fit = sarima::fit(series.view(), spec);
    const std::string json = sarima::fit_to_json(fit);
    std::cout << json << "\n";
    if (!f.out.empty()) write_text(f.out, json);
}

void cmd_fit_transformer(const CommonFlags& f) {
    const TimeSeries series = csv::load_monthly_csv(f.data);
    config::RunSettings settings = resolve_settings(f);
    transformer::Config tc = settings.hybrid.transformer;
    if (f.seed >= 0) tc.seed = static_cast<std::uint64_t>(f.seed);
    const transformer::WindowDataset windows =
        transformer::make_windows(series.view(), tc.window, tc.horizon);
    transformer::TrainHistory history;
    const transformer::Model model = transformer::train(windows, tc, &history);
    transformer::save_checkpoint(model, f.out);
    std::cerr << "trained " << history.epochs_run << " epochs (best epoch "
              << history.best_epoch << "), checkpoint: " << f.out << "\n";
}

void cmd_diagnose(const CommonFlags& f, const std::string& column, int lags,
                  double alpha) {
    const std::vector<double> residuals = csv::read_column(f.data, column);
    const diagnostics::TestResult r =
        diagnostics::ljung_box(residuals, lags, alpha);
    nlohmann::json j{{"statistic", r.statistic},
                     {"p_value", r.p_value},
                     {"df", r.df1},
                     {"alpha", r.alpha},
                     {"decision", diagnostics::to_string(r.decision)},
                     {"degenerate", r.degenerate}};
    std::cout << j.dump(2) << "\n";
    if (!f.out.empty()) write_text(f.out, j.dump(2));
}

void cmd_evaluate(const CommonFlags& f) {
    const auto [obs, pred] = csv::read_obs_pred(f.data);
    const metrics::MetricReport report = metrics::compute_metrics(obs, pred);
    const metrics::TaylorStats taylor = metrics::taylor_stats(obs, pred);
    nlohmann::json j{
        {"metrics", nlohmann::json::parse(metrics::to_json(report))},
        {"taylor", nlohmann::json::parse(metrics::to_json(taylor))}};
    std::cout << j.dump(2) << "\n";
    if (!f.out.empty()) write_text(f.out, j.dump(2));
}

void cmd_run(const CommonFlags& f, const std::string& forecast_out) {
    const TimeSeries series = csv::load_monthly_csv(f.data);
    const config::RunSettings settings = resolve_settings(f);
    const pipeline::HybridResult result =
        pipeline::run_variant(series, settings.hybrid, settings.variant);
    write_text(f.out, pipeline::report_json(result, settings.hybrid));
    const std::string fc_path = forecast_out.empty()
                                    ? sibling_path(f.out, "forecasts.csv")
                                    : forecast_out;
    write_month_value_csv(
        fc_path, pipeline::forecast_future(result, settings.hybrid.horizon));
    std::cerr << "report: " << f.out << ", forecasts: " << fc_path << "\n";
}

void cmd_compare(const CommonFlags& f) {
    const TimeSeries series = csv::load_monthly_csv(f.data);
    const config::RunSettings settings = resolve_settings(f);
    const pipeline::ComparisonMatrix matrix =
        pipeline::run_comparison(series, settings.hybrid);
    std::ofstream out(f.out);
    if (!out) throw DataError("cannot write file: " + f.out);
    out << "metric";
    for (const auto& name : matrix.model_names) out << "," << name;
    out << "\n";
    out.precision(17);
    for (std::size_t r = 0; r < matrix.metric_names.size(); ++r) {
        out << matrix.metric_names[r];
        for (double v : matrix.values[r]) out << "," << v;
        out << "\n";
    }
    if (!out) throw DataError("write failed: " + f.out);
    std::cerr << "wrote " << f.out << " (" << matrix.model_names.size()
              << " models x " << matrix.metric_names.size() << " metrics)\n";
}

void cmd_forecast(const CommonFlags& f, const std::string& model_path) {
    if (!model_path.empty()) {
        const transformer::Model model = transformer::load_checkpoint(model_path);
        const TimeSeries series = csv::load_monthly_csv(f.data);
        const int horizon = f.horizon > 0 ? f.horizon : 24;
        const std::vector<double> values =
            transformer::forecast_recursive(model, series.view(), horizon);
        std::vector<std::pair<MonthDate, double>> rows;
        for (std::size_t i = 0; i < values.size(); ++i) {
            rows.emplace_back(
                advance_months(series.end(), static_cast<long long>(i)),
                values[i]);
        }
        write_month_value_csv(f.out, rows);
        std::cerr << "forecasts: " << f.out << "\n";
        return;
    }
    const TimeSeries series = csv::load_monthly_csv(f.data);
    const config::RunSettings settings = resolve_settings(f);
    const pipeline::HybridResult result =
        pipeline::run_variant(series, settings.hybrid, settings.variant);
    write_month_value_csv(
        f.out, pipeline::forecast_future(result, settings.hybrid.horizon));
    std::cerr << "forecasts: " << f.out << "\n";
}

void cmd_taylor_export(const std::vector<std::string>& pred_specs,
                       const std::string& out_path) {
    std::ofstream out(out_path);
    if (!out) throw DataError("cannot write file: " + out_path);
    out << "model,r,std_obs,std_pred,centered_rmse\n";
    out.precision(10);
    for (const auto& spec : pred_specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
            throw ConfigError("--pred expects NAME=PATH, got '" + spec + "'");
        }
        const std::string name = spec.substr(0, eq);
        const std::string path = spec.substr(eq + 1);
        const auto [obs, pred] = csv::read_obs_pred(path);
        const metrics::TaylorStats t = metrics::taylor_stats(obs, pred);
        out << name << "," << t.correlation << "," << t.std_obs << ","
            << t.std_pred << "," << t.centered_rmse << "\n";
    }
    if (!out) throw DataError("write failed: " + out_path);
}

} // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"Hybrid wavelet/SARIMA/transformer forecasting toolkit"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string forecast_out, model_path, column = "value";
    int lags = 12;
    double alpha = 0.05;
    std::vector<std::string> pred_specs;

    auto add_common = [&](CLI::App* cmd, bool needs_data, bool needs_out) {
        auto* data = cmd->add_option("--data", flags.data, "input CSV");
        if (needs_data) data->required();
        auto* out = cmd->add_option("--out", flags.out, "output file");
        if (needs_out) out->required();
        cmd->add_option("--config", flags.config_path, "run configuration file");
        cmd->add_option("--family", flags.family, "haar|db4|sym4|coif3");
        cmd->add_option("--level", flags.level, "decomposition level (0 = auto)");
        cmd->add_option("--ratio", flags.ratio, "train fraction in (0,1)");
        cmd->add_option("--horizon", flags.horizon, "forecast horizon");
        cmd->add_option("--seed", flags.seed, "random seed");
        cmd->add_option("--order", flags.order, "auto or p,d,q,P,D,Q,s");
        cmd->add_option("--variant", flags.variant,
                        "sarima|transformer|wavelet-sarima|wavelet-transformer|"
                        "wavelet-sarima-transformer");
    };

    auto* decompose =
        app.add_subcommand("decompose", "MODWT multiresolution components");
    add_common(decompose, true, true);

    auto* fit_sarima =
        app.add_subcommand("fit-sarima", "estimate one SARIMA model");
    add_common(fit_sarima, true, false);

    auto* fit_transformer = app.add_subcommand(
        "fit-transformer", "train an encoder model, write a checkpoint");
    add_common(fit_transformer, true, true);

    auto* diagnose =
        app.add_subcommand("diagnose", "Ljung-Box test on a residual CSV");
    add_common(diagnose, true, false);
    diagnose->add_option("--column", column, "residual column name");
    diagnose->add_option("--lags", lags, "autocorrelation lags");
    diagnose->add_option("--alpha", alpha, "significance level");

    auto* evaluate =
        app.add_subcommand("evaluate", "accuracy metrics for an obs/pred CSV");
    add_common(evaluate, true, false);

    auto* run_cmd = app.add_subcommand("run", "full pipeline run with report");
    add_common(run_cmd, true, true);
    run_cmd->add_option("--forecast-out", forecast_out,
                        "forecast CSV path (default: forecasts.csv next to --out)");

    auto* compare =
        app.add_subcommand("compare", "14-variant accuracy comparison matrix");
    add_common(compare, true, true);

    auto* forecast =
        app.add_subcommand("forecast", "beyond-sample forecasts as CSV");
    add_common(forecast, true, true);
    forecast->add_option("--model", model_path, "transformer checkpoint path");

    auto* taylor =
        app.add_subcommand("taylor-export", "Taylor-diagram statistics table");
    taylor->add_option("--pred", pred_specs, "NAME=PATH obs/pred CSV")
        ->required();
    taylor->add_option("--out", flags.out, "output CSV")->required();

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (decompose->parsed()) {
            cmd_decompose(flags);
        } else if (fit_sarima->parsed()) {
            cmd_fit_sarima(flags);
        } else if (fit_transformer->parsed()) {
            cmd_fit_transformer(flags);
        } else if (diagnose->parsed()) {
            cmd_diagnose(flags, column, lags, alpha);
        } else if (evaluate->parsed()) {
            cmd_evaluate(flags);
        } else if (run_cmd->parsed()) {
            cmd_run(flags, forecast_out);
        } else if (compare->parsed()) {
            cmd_compare(flags);
        } else if (forecast->parsed()) {
            cmd_forecast(flags, model_path);
        } else if (taylor->parsed()) {
            cmd_taylor_export(pred_specs, flags.out);
        }
    } catch (const ConfigError& e) {
        std::cerr << "error(config): " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "error(data): " << e.what() << "\n";
        return 3;
    } catch (const ModelError& e) {
        std::cerr << "error(model): " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error(model): " << e.what() << "\n";
        return 4;
    }
    return 0;
}

} // namespace wst::cli
