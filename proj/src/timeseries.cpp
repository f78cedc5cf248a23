#include "wst/timeseries.hpp"

#include "wst/errors.hpp"
#include "wst/kernels.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace wst {

MonthDate advance_months(MonthDate d, long long months) {
    long long idx = static_cast<long long>(d.year) * 12 + (d.month - 1) + months;
    MonthDate out;
    out.year = static_cast<int>(idx >= 0 ? idx / 12 : (idx - 11) / 12);
    out.month = static_cast<int>(idx - static_cast<long long>(out.year) * 12) + 1;
    return out;
}

long long months_between(MonthDate from, MonthDate to) {
    return (static_cast<long long>(to.year) * 12 + to.month) -
           (static_cast<long long>(from.year) * 12 + from.month);
}

std::string to_string(MonthDate d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d", d.year, d.month);
    return buf;
}

MonthDate parse_month(const std::string& text) {
    int year = 0, month = 0;
    char extra = 0;
    if (std::sscanf(text.c_str(), "%d-%d%c", &year, &month, &extra) != 2 ||
        month < 1 || month > 12) {
        throw DataError("invalid month '" + text + "', expected YYYY-MM");
    }
    return {year, month};
}

TimeSeries::TimeSeries(std::vector<double> values, MonthDate start, int period)
    : values_(std::move(values)), start_(start), period_(period) {
    if (values_.empty()) throw DataError("time series must be non-empty");
    if (period_ < 1) throw DataError("period must be >= 1");
    if (start_.month < 1 || start_.month > 12)
        throw DataError("start month out of range");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw DataError("non-finite value at index " + std::to_string(i));
        }
    }
}

DescriptiveStats describe(std::span<const double> values) {
    if (values.empty()) throw DataError("describe: empty series");
    const std::size_t n = values.size();
    const double nd = static_cast<double>(n);

    DescriptiveStats s;
    s.count = static_cast<long long>(n);
    s.mean = kernels::sum(values.data(), n) / nd;

    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    s.min = sorted.front();
    s.max = sorted.back();
    s.median = (n % 2 == 1) ? sorted[n / 2]
                            : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : values) {
        const double d = v - s.mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= nd;
    m3 /= nd;
    m4 /= nd;

    s.std_dev = (n > 1) ? std::sqrt(m2 * nd / (nd - 1.0)) : 0.0;

    if (m2 <= 0.0 || n < 3) {
        s.skewness = 0.0;
        s.kurtosis = 0.0;
        s.degenerate = true;
        return s;
    }
    const double g1 = m3 / std::pow(m2, 1.5);
    s.skewness = g1 * std::sqrt(nd * (nd - 1.0)) / (nd - 2.0);
    if (n < 4) {
        s.kurtosis = 0.0;
        s.degenerate = true;
    } else {
        const double g2 = m4 / (m2 * m2) - 3.0;
        s.kurtosis = ((nd + 1.0) * g2 + 6.0) * (nd - 1.0) /
                     ((nd - 2.0) * (nd - 3.0));
    }
    return s;
}

DescriptiveStats describe(const TimeSeries& series) {
    return describe(series.view());
}

SplitPair split_train_test(const TimeSeries& series, double ratio) {
    if (!(ratio > 0.0 && ratio < 1.0))
        throw DataError("split ratio must lie in (0, 1)");
    const std::size_t n = series.size();
    if (n < 2) throw DataError("series too short to split");

    const auto train_len = static_cast<std::size_t>(
        std::llround(ratio * static_cast<double>(n)));
    if (train_len < 1) throw DataError("split leaves an empty training set");
    if (train_len >= n) throw DataError("split leaves an empty test set");

    const auto& v = series.values();
    std::vector<double> train(v.begin(), v.begin() + static_cast<long>(train_len));
    std::vector<double> test(v.begin() + static_cast<long>(train_len), v.end());
    return SplitPair{
        TimeSeries(std::move(train), series.start(), series.period()),
        TimeSeries(std::move(test), series.date_at(train_len), series.period()),
        ratio};
}

TimeSeries standardize(const TimeSeries& series, const DescriptiveStats& stats) {
    if (!(stats.std_dev > 0.0))
        throw DataError("cannot standardize: zero standard deviation");
    std::vector<double> out(series.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = (series[i] - stats.mean) / stats.std_dev;
    return TimeSeries(std::move(out), series.start(), series.period());
}

TimeSeries destandardize(const TimeSeries& series, const DescriptiveStats& stats) {
    if (!(stats.std_dev > 0.0))
        throw DataError("cannot destandardize: zero standard deviation");
    std::vector<double> out(series.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = series[i] * stats.std_dev + stats.mean;
    return TimeSeries(std::move(out), series.start(), series.period());
}

std::string stats_to_json(const DescriptiveStats& s) {
    nlohmann::json j{{"count", s.count},       {"mean", s.mean},
                     {"std_dev", s.std_dev},   {"min", s.min},
                     {"median", s.median},     {"max", s.max},
                     {"skewness", s.skewness}, {"kurtosis", s.kurtosis},
                     {"degenerate", s.degenerate}};
    return j.dump(2);
}

} // namespace wst
