#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace entropy_cpd::io {

// Days since 1970-01-01 plus seconds within the day.
struct Timestamp {
  std::int64_t days = 0;
  int seconds = 0;

  auto operator<=>(const Timestamp&) const = default;
};

std::int64_t days_from_civil(int year, int month, int day);
void civil_from_days(std::int64_t days, int& year, int& month, int& day);

// Monday of the ISO-8601 week containing `days`.
std::int64_t iso_week_monday(std::int64_t days);

// ISO-8601 date, optional time part ("T" or space separated HH:MM[:SS]).
Timestamp parse_timestamp(std::string_view text);

std::string format_date(std::int64_t days);

// Shortest round-trip decimal representation (locale independent).
std::string format_double(double value);

struct Series {
  std::vector<Timestamp> timestamps;  // empty when has_dates == false
  std::vector<double> values;
  bool has_dates = false;
};

// CSV with either a single `value` column or `date,value` columns.
// A header line is auto-detected.
Series read_series_csv(const std::string& path);
Series parse_series_csv(std::istream& in, const std::string& origin);

}  // namespace entropy_cpd::io
