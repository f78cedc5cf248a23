#pragma once

#include <span>
#include <string>
#include <vector>

namespace wst {

/// Calendar month, 1-based.
struct MonthDate {
    int year = 1970;
    int month = 1;

    bool operator==(const MonthDate&) const = default;
};

MonthDate advance_months(MonthDate d, long long months);
long long months_between(MonthDate from, MonthDate to); // to - from
std::string to_string(MonthDate d);                     // "YYYY-MM"
MonthDate parse_month(const std::string& text);         // throws DataError

/// Contiguous monthly series of finite observations.
class TimeSeries {
public:
    TimeSeries(std::vector<double> values, MonthDate start, int period = 12);

    const std::vector<double>& values() const { return values_; }
    std::span<const double> view() const { return values_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    MonthDate start() const { return start_; }
    MonthDate date_at(std::size_t i) const {
        return advance_months(start_, static_cast<long long>(i));
    }
    /// First month after the last observation.
    MonthDate end() const { return date_at(values_.size()); }
    int period() const { return period_; }

private:
    std::vector<double> values_;
    MonthDate start_;
    int period_;
};

struct DescriptiveStats {
    long long count = 0;
    double mean = 0.0;
    double std_dev = 0.0; // sample (n-1) convention
    double min = 0.0;
    double median = 0.0;
    double max = 0.0;
    double skewness = 0.0; // adjusted Fisher-Pearson (G1)
    double kurtosis = 0.0; // sample-adjusted excess (G2)
    bool degenerate = false; // constant series, or n too small for G1/G2
};

struct SplitPair {
    TimeSeries train;
    TimeSeries test;
    double ratio;
};

DescriptiveStats describe(std::span<const double> values);
DescriptiveStats describe(const TimeSeries& series);

/// Chronological split with train length = round(ratio * N).
SplitPair split_train_test(const TimeSeries& series, double ratio);

/// (x - mean) / std_dev elementwise. Requires stats.std_dev > 0.
TimeSeries standardize(const TimeSeries& series, const DescriptiveStats& stats);
TimeSeries destandardize(const TimeSeries& series, const DescriptiveStats& stats);

std::string stats_to_json(const DescriptiveStats& stats);

} // namespace wst
