#pragma once

#include "wst/timeseries.hpp"

#include <optional>
#include <string>
#include <vector>

namespace wst::csv {

/// Header names for the two accepted monthly layouts. Long format uses
/// `date` + `value` columns (date as YYYY-MM); wide format uses `year`
/// followed by one column per calendar month, flattened January..December.
struct ColumnSpec {
    std::string date = "date";
    std::string value = "value";
    std::string year = "Year";
};

/// Reads a monthly rainfall CSV in either layout (detected from the header).
/// Rejects gaps, negative values and unparseable cells with the offending
/// row/column in the message.
TimeSeries load_monthly_csv(const std::string& path, const ColumnSpec& spec = {});

/// One named numeric column from a headered CSV. Used for residual and
/// prediction files, which may be negative (no rainfall constraints).
std::vector<double> read_column(const std::string& path, const std::string& column);

/// Two-column observation/prediction file with header `obs,pred`.
std::pair<std::vector<double>, std::vector<double>> read_obs_pred(const std::string& path);

/// Low-level single-record parser (RFC-4180 quoting, comma separator).
std::vector<std::string> split_record(const std::string& line);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

} // namespace wst::csv
