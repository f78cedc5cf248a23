#include "wst/csv.hpp"

#include "wst/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace wst::csv {
namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool iequals(const std::string& a, const std::string& b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) ==
                      std::tolower(static_cast<unsigned char>(y));
           });
}

double parse_cell(const std::string& text, std::size_t row, const std::string& col) {
    const std::string t = trim(text);
    double v = 0.0;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
        throw DataError("unparseable cell at row " + std::to_string(row) +
                        ", column '" + col + "': '" + text + "'");
    }
    return v;
}

std::vector<std::vector<std::string>> read_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    std::vector<std::vector<std::string>> records;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        records.push_back(split_record(line));
    }
    if (records.empty()) throw DataError("empty CSV file: " + path);
    return records;
}

int find_column(const std::vector<std::string>& header, const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (iequals(trim(header[i]), name)) return static_cast<int>(i);
    }
    return -1;
}

const char* kMonthNames[12] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                               "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};

} // namespace

std::vector<std::string> split_record(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

TimeSeries load_monthly_csv(const std::string& path, const ColumnSpec& spec) {
    const auto records = read_records(path);
    const auto& header = records.front();

    const int date_col = find_column(header, spec.date);
    const int value_col = find_column(header, spec.value);
    const int year_col = find_column(header, spec.year);

    std::vector<double> values;
    MonthDate start{};

    if (date_col >= 0 && value_col >= 0) {
        // Long format: one row per month, chronological.
        bool first = true;
        MonthDate expected{};
        for (std::size_t r = 1; r < records.size(); ++r) {
            const auto& rec = records[r];
            if (static_cast<int>(rec.size()) <= std::max(date_col, value_col)) {
                throw DataError("row " + std::to_string(r + 1) +
                                " has too few fields");
            }
            const MonthDate d = parse_month(trim(rec[date_col]));
            if (first) {
                start = d;
                expected = d;
                first = false;
            } else if (!(d == expected)) {
                if (months_between(expected, d) > 0) {
                    throw DataError("month gap: missing " + to_string(expected) +
                                    " before row " + std::to_string(r + 1));
                }
                throw DataError("out-of-order month " + to_string(d) +
                                " at row " + std::to_string(r + 1));
            }
            const double v = parse_cell(rec[value_col], r + 1, spec.value);
            if (v < 0.0) {
                throw DataError("negative rainfall value at row " +
                                std::to_string(r + 1) + ", column '" +
                                spec.value + "'");
            }
            values.push_back(v);
            expected = advance_months(expected, 1);
        }
    } else if (year_col >= 0) {
        // Wide format: Year,Jan..Dec. Flatten row-major. Trailing blanks in
        // the final year end the series; blanks anywhere else are gaps.
        int month_cols[12];
        for (int m = 0; m < 12; ++m) {
            month_cols[m] = find_column(header, kMonthNames[m]);
            if (month_cols[m] < 0) {
                throw DataError(std::string("wide format header lacks column '") +
                                kMonthNames[m] + "'");
            }
        }
        bool first = true;
        int prev_year = 0;
        bool series_ended = false;
        for (std::size_t r = 1; r < records.size(); ++r) {
            const auto& rec = records[r];
            const int year = static_cast<int>(
                parse_cell(rec.at(static_cast<std::size_t>(year_col)), r + 1, spec.year));
            if (first) {
                start = MonthDate{year, 1};
                first = false;
            } else if (year != prev_year + 1) {
                throw DataError("month gap: missing " +
                                to_string(MonthDate{prev_year + 1, 1}) +
                                " before row " + std::to_string(r + 1));
            }
            prev_year = year;
            const bool last_row = (r + 1 == records.size());
            for (int m = 0; m < 12; ++m) {
                const auto ci = static_cast<std::size_t>(month_cols[m]);
                const std::string cell = ci < rec.size() ? trim(rec[ci]) : "";
                if (cell.empty()) {
                    if (last_row) {
                        series_ended = true;
                        continue;
                    }
                    throw DataError("month gap: missing " +
                                    to_string(MonthDate{year, m + 1}));
                }
                if (series_ended) {
                    throw DataError("month gap: missing " +
                                    to_string(MonthDate{year, m}) +
                                    " (blank cell before " +
                                    to_string(MonthDate{year, m + 1}) + ")");
                }
                const double v = parse_cell(cell, r + 1, kMonthNames[m]);
                if (v < 0.0) {
                    throw DataError("negative rainfall value at row " +
                                    std::to_string(r + 1) + ", column '" +
                                    kMonthNames[m] + "'");
                }
                values.push_back(v);
            }
        }
    } else {
        throw DataError("header must contain either '" + spec.date + "," +
                        spec.value + "' (long) or '" + spec.year +
                        ",Jan..Dec' (wide) columns: " + path);
    }

    if (values.empty()) throw DataError("no observations in " + path);
    return TimeSeries(std::move(values), start, 12);
}

std::vector<double> read_column(const std::string& path, const std::string& column) {
    const auto records = read_records(path);
    const int col = find_column(records.front(), column);
    if (col < 0) throw DataError("column '" + column + "' not found in " + path);
    std::vector<double> out;
    out.reserve(records.size() - 1);
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (static_cast<int>(rec.size()) <= col) {
            throw DataError("row " + std::to_string(r + 1) + " has too few fields");
        }
        out.push_back(parse_cell(rec[static_cast<std::size_t>(col)], r + 1, column));
    }
    if (out.empty()) throw DataError("no data rows in " + path);
    return out;
}

std::pair<std::vector<double>, std::vector<double>>
read_obs_pred(const std::string& path) {
    return {read_column(path, "obs"), read_column(path, "pred")};
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
    if (columns.size() != header.size()) {
        throw DataError("write_csv: header/column count mismatch");
    }
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    for (std::size_t i = 0; i < header.size(); ++i) {
        out << (i ? "," : "") << header[i];
    }
    out << "\n";
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    out.precision(17);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (columns[c].size() != rows) {
                throw DataError("write_csv: ragged columns");
            }
            out << (c ? "," : "") << columns[c][r];
        }
        out << "\n";
    }
    if (!out) throw DataError("write failed: " + path);
}

} // namespace wst::csv
