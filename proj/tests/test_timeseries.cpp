#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "wst/csv.hpp"
#include "wst/errors.hpp"
#include "wst/timeseries.hpp"

#include "support/helpers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace wst;
using testsupport::TempDir;
using testsupport::write_file;

namespace {

// Direct-summation reference for the moment statistics.
double brute_mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double brute_sample_std(const std::vector<double>& v) {
    const double m = brute_mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string wide_csv(int first_year, int years) {
    std::ostringstream out;
    out << "Year,Jan,Feb,Mar,Apr,May,Jun,Jul,Aug,Sep,Oct,Nov,Dec\n";
    for (int y = 0; y < years; ++y) {
        out << (first_year + y);
        for (int m = 0; m < 12; ++m) out << "," << (10.0 + y + 0.5 * m);
        out << "\n";
    }
    return out.str();
}

} // namespace

TEST_CASE("month arithmetic") {
    CHECK(advance_months({1971, 1}, 0) == MonthDate{1971, 1});
    CHECK(advance_months({1971, 1}, 11) == MonthDate{1971, 12});
    CHECK(advance_months({1971, 1}, 12) == MonthDate{1972, 1});
    CHECK(advance_months({1971, 6}, -6) == MonthDate{1970, 12});
    CHECK(months_between({1971, 1}, {1972, 3}) == 14);
    CHECK(to_string({1971, 1}) == "1971-01");
    CHECK(parse_month("2023-12") == MonthDate{2023, 12});
    CHECK_THROWS_AS(parse_month("2023-13"), DataError);
    CHECK_THROWS_AS(parse_month("garbage"), DataError);
}

TEST_CASE("wide CSV 1971..2023 flattens to 636 monthly values") {
    TempDir dir;
    const auto path = dir.file("wide.csv");
    write_file(path, wide_csv(1971, 53));
    const TimeSeries ts = csv::load_monthly_csv(path);
    CHECK(ts.size() == 636);
    CHECK(ts.start() == MonthDate{1971, 1});
    CHECK(ts.date_at(635) == MonthDate{2023, 12});
    CHECK(ts[0] == doctest::Approx(10.0));
    CHECK(ts[13] == doctest::Approx(11.5)); // 1972 Feb
}

TEST_CASE("long CSV with a single row") {
    TempDir dir;
    const auto path = dir.file("long.csv");
    write_file(path, "date,value\n1971-01,5.0\n");
    const TimeSeries ts = csv::load_monthly_csv(path);
    CHECK(ts.size() == 1);
    CHECK(ts.start() == MonthDate{1971, 1});
    CHECK(ts[0] == doctest::Approx(5.0));
}

TEST_CASE("loader rejects gaps, negatives and bad cells with locations") {
    TempDir dir;

    const auto gap = dir.file("gap.csv");
    write_file(gap, "date,value\n1971-01,1\n1971-03,2\n");
    CHECK_THROWS_WITH_AS(csv::load_monthly_csv(gap),
                         doctest::Contains("1971-02"), DataError);

    const auto neg = dir.file("neg.csv");
    write_file(neg, "date,value\n1971-01,1\n1971-02,-3\n");
    CHECK_THROWS_WITH_AS(csv::load_monthly_csv(neg),
                         doctest::Contains("row 3"), DataError);

    const auto bad = dir.file("bad.csv");
    write_file(bad, "date,value\n1971-01,1\n1971-02,oops\n");
    CHECK_THROWS_WITH_AS(csv::load_monthly_csv(bad),
                         doctest::Contains("oops"), DataError);

    CHECK_THROWS_AS(csv::load_monthly_csv(dir.file("missing.csv")), DataError);

    const auto wide_gap = dir.file("wide_gap.csv");
    std::string content = wide_csv(1971, 2);
    content += "1974,1,2,3,4,5,6,7,8,9,10,11,12\n"; // skips 1973
    write_file(wide_gap, content);
    CHECK_THROWS_WITH_AS(csv::load_monthly_csv(wide_gap),
                         doctest::Contains("1973"), DataError);
}

TEST_CASE("wide CSV allows a partial final year only") {
    TempDir dir;
    const auto path = dir.file("partial.csv");
    std::string content = wide_csv(1971, 1);
    content += "1972,1,2,3,,,,,,,,,\n";
    write_file(path, content);
    const TimeSeries ts = csv::load_monthly_csv(path);
    CHECK(ts.size() == 15);

    const auto mid = dir.file("midblank.csv");
    std::string bad = "Year,Jan,Feb,Mar,Apr,May,Jun,Jul,Aug,Sep,Oct,Nov,Dec\n";
    bad += "1971,1,,3,4,5,6,7,8,9,10,11,12\n";
    bad += "1972,1,2,3,4,5,6,7,8,9,10,11,12\n";
    write_file(mid, bad);
    CHECK_THROWS_AS(csv::load_monthly_csv(mid), DataError);
}

TEST_CASE("split keeps the paper's 509/127 counts and partitions exactly") {
    Rng rng(1);
    std::vector<double> values(636);
    for (double& v : values) v = std::abs(rng.gaussian());
    const TimeSeries ts(values, {1971, 1});

    const SplitPair split = split_train_test(ts, 0.8);
    CHECK(split.train.size() == 509);
    CHECK(split.test.size() == 127);
    CHECK(split.test.start() == ts.date_at(509));

    std::vector<double> joined = split.train.values();
    joined.insert(joined.end(), split.test.values().begin(),
                  split.test.values().end());
    CHECK(joined == ts.values()); // bit-exact partition

    const TimeSeries small(std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10},
                           {2000, 1});
    const SplitPair half = split_train_test(small, 0.5);
    CHECK(half.train.size() == 5);
    CHECK(half.test.size() == 5);

    const TimeSeries two(std::vector<double>{1, 2}, {2000, 1});
    CHECK_THROWS_AS(split_train_test(two, 0.99), DataError);
    CHECK_THROWS_AS(split_train_test(two, 1.5), DataError);
    CHECK_THROWS_AS(split_train_test(two, 0.0), DataError);
}

TEST_CASE("describe matches a direct-summation reference") {
    const std::vector<double> v{1, 2, 3, 4, 5};
    const DescriptiveStats s = describe(v);
    CHECK(s.count == 5);
    CHECK(s.mean == doctest::Approx(3.0));
    CHECK(s.median == doctest::Approx(3.0));
    CHECK(s.min == 1.0);
    CHECK(s.max == 5.0);
    CHECK(s.std_dev == doctest::Approx(brute_sample_std(v)));
    CHECK(s.skewness == doctest::Approx(0.0));
    CHECK_FALSE(s.degenerate);
}

TEST_CASE("describe on a constant series is degenerate, not NaN") {
    const DescriptiveStats s = describe(std::vector<double>{5, 5, 5, 5});
    CHECK(s.mean == doctest::Approx(5.0));
    CHECK(s.std_dev == doctest::Approx(0.0));
    CHECK(s.skewness == 0.0);
    CHECK(s.kurtosis == 0.0);
    CHECK(s.degenerate);
}

TEST_CASE("describe is order-free") {
    Rng rng(9);
    std::vector<double> v = testsupport::random_series(101, rng);
    const DescriptiveStats base = describe(v);
    for (int rep = 0; rep < 20; ++rep) {
        rng.shuffle(v);
        const DescriptiveStats s = describe(v);
        CHECK(s.mean == doctest::Approx(base.mean).epsilon(1e-12));
        CHECK(s.std_dev == doctest::Approx(base.std_dev).epsilon(1e-12));
        CHECK(s.median == doctest::Approx(base.median).epsilon(1e-12));
        CHECK(s.skewness == doctest::Approx(base.skewness).epsilon(1e-12));
        CHECK(s.kurtosis == doctest::Approx(base.kurtosis).epsilon(1e-12));
        CHECK(s.min == base.min);
        CHECK(s.max == base.max);
    }
}

TEST_CASE("standardize centers, scales and inverts") {
    const TimeSeries ts(std::vector<double>{0.0, 10.0}, {2000, 1});
    DescriptiveStats stats;
    stats.mean = 5.0;
    stats.std_dev = 5.0;
    const TimeSeries z = standardize(ts, stats);
    CHECK(z[0] == doctest::Approx(-1.0));
    CHECK(z[1] == doctest::Approx(1.0));

    const TimeSeries constant(std::vector<double>{3, 3, 3}, {2000, 1});
    const DescriptiveStats cs = describe(constant);
    CHECK_THROWS_AS(standardize(constant, cs), DataError);

    Rng rng(3);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<double> v = testsupport::random_series(64, rng, 100.0);
        const TimeSeries x(v, {1990, 6});
        const DescriptiveStats s = describe(x);
        if (!(s.std_dev > 1e-6)) continue;
        const TimeSeries round = destandardize(standardize(x, s), s);
        for (std::size_t i = 0; i < x.size(); ++i) {
            CHECK(round[i] ==
                  doctest::Approx(x[i]).epsilon(1e-12).scale(std::abs(x[i]) + 1));
        }
    }

    // centering: values equal to the mean map to zero
    const TimeSeries at_mean(std::vector<double>{5.0, 5.0}, {2000, 1});
    const TimeSeries zeroed = standardize(at_mean, stats);
    CHECK(zeroed[0] == 0.0);
    CHECK(zeroed[1] == 0.0);
}

TEST_CASE("stats serialize with the documented field names") {
    const DescriptiveStats s = describe(std::vector<double>{1, 2, 3, 4, 5});
    const std::string json = stats_to_json(s);
    for (const char* key : {"count", "mean", "std_dev", "min", "median", "max",
                            "skewness", "kurtosis"}) {
        CHECK(json.find(key) != std::string::npos);
    }
}

TEST_CASE("time series invariants are enforced") {
    CHECK_THROWS_AS(TimeSeries({}, {2000, 1}), DataError);
    CHECK_THROWS_AS(TimeSeries({1.0, std::nan("")}, {2000, 1}), DataError);
    CHECK_THROWS_AS(TimeSeries({1.0}, {2000, 1}, 0), DataError);
    CHECK_THROWS_AS(TimeSeries({1.0}, {2000, 13}), DataError);
}
