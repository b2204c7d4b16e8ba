#pragma once

#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace evload {

/// Calendar date as days since 1970-01-01 (proleptic Gregorian).
struct Date {
  std::int32_t days = 0;

  friend auto operator<=>(const Date&, const Date&) = default;
};

struct CivilDate {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31
};

// Howard Hinnant's days_from_civil / civil_from_days.
constexpr std::int32_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const int yoe = y - era * 400;
  const int doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const int doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + doe - 719468;
}

constexpr CivilDate civil_from_days(std::int32_t z) {
  z += 719468;
  const int era = (z >= 0 ? z : z - 146096) / 146097;
  const int doe = z - era * 146097;
  const int yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const int y = yoe + era * 400;
  const int doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const int mp = (5 * doy + 2) / 153;
  const int d = doy - (153 * mp + 2) / 5 + 1;
  const int m = mp + (mp < 10 ? 3 : -9);
  return {y + (m <= 2), m, d};
}

constexpr int days_in_month(int y, int m) {
  constexpr int table[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  return m == 2 && leap ? 29 : table[m - 1];
}

constexpr Date make_date(int y, int m, int d) {
  return Date{days_from_civil(y, m, d)};
}

constexpr CivilDate to_civil(Date d) { return civil_from_days(d.days); }

// 0 = Monday ... 6 = Sunday.
constexpr int weekday(Date d) {
  const int w = (d.days + 3) % 7;  // 1970-01-01 was a Thursday
  return w < 0 ? w + 7 : w;
}

constexpr bool is_weekend(Date d) { return weekday(d) >= 5; }

constexpr int month_of(Date d) { return to_civil(d).month; }

/// Month index counted from year 0 (year * 12 + month - 1).
struct MonthKey {
  std::int32_t index = 0;

  constexpr int year() const { return index / 12; }
  constexpr int month() const { return index % 12 + 1; }
  friend auto operator<=>(const MonthKey&, const MonthKey&) = default;
};

constexpr MonthKey month_key(Date d) {
  const auto c = to_civil(d);
  return MonthKey{c.year * 12 + c.month - 1};
}

constexpr Date last_day_of(MonthKey m) {
  return make_date(m.year(), m.month(), days_in_month(m.year(), m.month()));
}

/// Local civil timestamp at minute resolution, minutes since 1970-01-01T00:00.
/// No time-zone or DST interpretation is applied.
struct Timestamp {
  std::int64_t minutes = 0;

  Date date() const {
    std::int64_t d = minutes >= 0 ? minutes / 1440 : (minutes - 1439) / 1440;
    return Date{static_cast<std::int32_t>(d)};
  }
  int minute_of_day() const {
    auto r = static_cast<int>(minutes % 1440);
    return r < 0 ? r + 1440 : r;
  }
  friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

namespace detail {
inline bool parse_fixed_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{};
}

inline void append_padded(std::string& out, int value, int width) {
  std::string digits = std::to_string(value);
  if (static_cast<int>(digits.size()) < width)
    out.append(width - digits.size(), '0');
  out += digits;
}
}  // namespace detail

// "YYYY-MM-DD"
inline std::optional<Date> parse_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  int y = 0, m = 0, d = 0;
  if (!detail::parse_fixed_int(s.substr(0, 4), y) ||
      !detail::parse_fixed_int(s.substr(5, 2), m) ||
      !detail::parse_fixed_int(s.substr(8, 2), d))
    return std::nullopt;
  if (m < 1 || m > 12 || d < 1 || d > days_in_month(y, m)) return std::nullopt;
  return make_date(y, m, d);
}

// "YYYY-MM-DDTHH:MM"
inline std::optional<Timestamp> parse_timestamp(std::string_view s) {
  if (s.size() != 16 || s[10] != 'T' || s[13] != ':') return std::nullopt;
  auto date = parse_date(s.substr(0, 10));
  int hh = 0, mm = 0;
  if (!date || !detail::parse_fixed_int(s.substr(11, 2), hh) ||
      !detail::parse_fixed_int(s.substr(14, 2), mm))
    return std::nullopt;
  if (hh > 23 || mm > 59) return std::nullopt;
  return Timestamp{static_cast<std::int64_t>(date->days) * 1440 + hh * 60 + mm};
}

inline std::string format_date(Date d) {
  const auto c = to_civil(d);
  std::string out;
  detail::append_padded(out, c.year, 4);
  out += '-';
  detail::append_padded(out, c.month, 2);
  out += '-';
  detail::append_padded(out, c.day, 2);
  return out;
}

inline std::string format_timestamp(Timestamp t) {
  std::string out = format_date(t.date());
  const int mod = t.minute_of_day();
  out += 'T';
  detail::append_padded(out, mod / 60, 2);
  out += ':';
  detail::append_padded(out, mod % 60, 2);
  return out;
}

inline std::string format_month(MonthKey m) {
  std::string out;
  detail::append_padded(out, m.year(), 4);
  out += '-';
  detail::append_padded(out, m.month(), 2);
  return out;
}

/// Inclusive date range.
struct DateRange {
  Date first;
  Date last;

  bool contains(Date d) const { return first <= d && d <= last; }
  bool empty() const { return last < first; }
  std::int32_t length() const { return empty() ? 0 : last.days - first.days + 1; }
};

// "YYYY-MM-DD:YYYY-MM-DD"
inline std::optional<DateRange> parse_date_range(std::string_view s) {
  const auto colon = s.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  auto a = parse_date(s.substr(0, colon));
  auto b = parse_date(s.substr(colon + 1));
  if (!a || !b) return std::nullopt;
  return DateRange{*a, *b};
}

}  // namespace evload
