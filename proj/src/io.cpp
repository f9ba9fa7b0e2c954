#include "entropy_cpd/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "entropy_cpd/errors.hpp"

namespace entropy_cpd::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

}  // namespace

std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy =
      static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return static_cast<std::int64_t>(era) * 146097 +
         static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& year, int& month, int& day) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  day = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  month = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
  year = static_cast<int>(y + (month <= 2));
}

std::int64_t iso_week_monday(std::int64_t days) {
  // 1970-01-01 was a Thursday; weekday with Monday = 0
  const std::int64_t wd = ((days % 7) + 7 + 3) % 7;
  return days - wd;
}

Timestamp parse_timestamp(std::string_view text) {
  text = trim(text);
  if (text.size() < 10 || text[4] != '-' || text[7] != '-') {
    throw DataError("bad timestamp: '" + std::string(text) + "'");
  }
  int y = 0, m = 0, d = 0;
  if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), m) ||
      !parse_int(text.substr(8, 2), d) || m < 1 || m > 12 || d < 1 || d > 31) {
    throw DataError("bad timestamp: '" + std::string(text) + "'");
  }
  Timestamp ts;
  ts.days = days_from_civil(y, m, d);
  if (text.size() > 10) {
    if ((text[10] != 'T' && text[10] != ' ') || text.size() < 16 ||
        text[13] != ':') {
      throw DataError("bad timestamp: '" + std::string(text) + "'");
    }
    int hh = 0, mm = 0, ss = 0;
    if (!parse_int(text.substr(11, 2), hh) ||
        !parse_int(text.substr(14, 2), mm) || hh > 23 || mm > 59) {
      throw DataError("bad timestamp: '" + std::string(text) + "'");
    }
    if (text.size() >= 19 && text[16] == ':') {
      if (!parse_int(text.substr(17, 2), ss) || ss > 60) {
        throw DataError("bad timestamp: '" + std::string(text) + "'");
      }
    }
    ts.seconds = hh * 3600 + mm * 60 + ss;
  }
  return ts;
}

std::string format_date(std::int64_t days) {
  int y, m, d;
  civil_from_days(days, y, m, d);
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
  return buf;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  return std::string(buf, ptr);
}

Series parse_series_csv(std::istream& in, const std::string& origin) {
  Series out;
  std::string line;
  bool first = true;
  bool decided = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty()) continue;

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    const std::string_view whole = view;
    for (std::size_t i = 0; i <= whole.size(); ++i) {
      if (i == whole.size() || whole[i] == ',') {
        fields.push_back(trim(whole.substr(start, i - start)));
        start = i + 1;
      }
    }
    if (fields.size() > 2) {
      throw DataError(origin + ": expected 1 or 2 columns at line " +
                      std::to_string(line_no));
    }

    double value = 0.0;
    const bool numeric_last = parse_double(fields.back(), value);
    if (first) {
      first = false;
      if (!numeric_last) continue;  // header line
    }
    if (!numeric_last) {
      throw DataError(origin + ": bad numeric value at line " +
                      std::to_string(line_no));
    }
    const bool with_date = fields.size() == 2;
    if (!decided) {
      out.has_dates = with_date;
      decided = true;
    } else if (with_date != out.has_dates) {
      throw DataError(origin + ": inconsistent column count at line " +
                      std::to_string(line_no));
    }
    if (with_date) out.timestamps.push_back(parse_timestamp(fields[0]));
    out.values.push_back(value);
  }
  if (out.values.empty()) throw DataError(origin + ": no data rows");
  return out;
}

Series read_series_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return parse_series_csv(in, path);
}

}  // namespace entropy_cpd::io
