#pragma once

// Parsing of session logs and location tables, hourly binning, and dataset
// construction.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "evload/categories.hpp"
#include "evload/civil_time.hpp"
#include "evload/csv.hpp"
#include "evload/dataset.hpp"
#include "evload/error.hpp"
#include "evload/model.hpp"
#include "evload/numeric.hpp"

namespace evload::ingest {

using HourlyCurve = std::array<double, kHoursPerDay>;

inline constexpr std::int64_t kMaxSessionMinutes = 7 * 24 * 60;

inline constexpr std::string_view kSessionsHeader = "charger_id,start,end,energy_kwh";
inline constexpr std::string_view kSitesHeader =
    "charger_id,zsj_id,rated_power_kw,commissioned";
inline constexpr std::string_view kZsjHeader =
    "zsj_id,category,population_density,address_count,commuter_inflow";

struct ChargingSession {
  std::string charger_id;
  Timestamp start;
  Timestamp end;
  double energy_kwh = 0.0;

  std::int64_t duration_minutes() const { return end.minutes - start.minutes; }
  friend bool operator==(const ChargingSession&, const ChargingSession&) = default;
};

struct ChargerSite {
  std::string charger_id;
  std::string zsj_id;
  std::optional<double> rated_power_kw;
  Date commissioned;
};

struct ZsjUnit {
  std::string zsj_id;
  ZsjCategory category = ZsjCategory::CompactResidential;
  double population_density = 0.0;
  double address_count = 0.0;
  double commuter_inflow = 0.0;
};

struct Reject {
  std::size_t line = 0;  // 1-based; 0 when not tied to an input line
  std::string reason;
};

template <class Row>
struct ParseResult {
  std::vector<Row> rows;
  std::vector<Reject> rejects;
};

namespace detail {

inline std::string read_all(std::istream& in) {
  return std::string(std::istreambuf_iterator<char>(in), {});
}

inline void check_header(csv::LineReader& reader, std::string_view expected,
                         std::string_view file) {
  std::string_view header;
  require(reader.next(header), ErrorKind::Format,
          std::string(file) + ": missing header, expected '" + std::string(expected) + "'");
  require(csv::trim(header) == expected, ErrorKind::Format,
          std::string(file) + ": bad header '" + std::string(header) + "', expected '" +
              std::string(expected) + "'");
}

struct RowRejected {
  std::string reason;
};

[[noreturn]] inline void reject_row(std::string reason) { throw RowRejected{std::move(reason)}; }

template <class Row, class RowParser>
ParseResult<Row> parse_table(std::string_view text, std::string_view header,
                             std::string_view file, RowParser&& parse_row) {
  ParseResult<Row> out;
  csv::LineReader reader(text);
  check_header(reader, header, file);
  const std::size_t columns = csv::split(header).size();
  std::string_view line;
  while (reader.next(line)) {
    if (csv::trim(line).empty()) continue;
    auto fields = csv::split(line);
    for (auto& f : fields) f = csv::trim(f);
    if (fields.size() != columns) {
      out.rejects.push_back({reader.line_number(),
                             "expected " + std::to_string(columns) + " fields, got " +
                                 std::to_string(fields.size())});
      continue;
    }
    try {
      out.rows.push_back(parse_row(fields));
    } catch (const RowRejected& r) {
      out.rejects.push_back({reader.line_number(), r.reason});
    }
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Parsers

inline ParseResult<ChargingSession> parse_sessions(std::string_view text) {
  return detail::parse_table<ChargingSession>(
      text, kSessionsHeader, "sessions.csv",
      [](const std::vector<std::string_view>& f) -> ChargingSession {
        if (f[0].empty()) detail::reject_row("empty charger_id");
        auto start = parse_timestamp(f[1]);
        if (!start) detail::reject_row("bad start timestamp");
        auto end = parse_timestamp(f[2]);
        if (!end) detail::reject_row("bad end timestamp");
        auto energy = parse_double(f[3]);
        if (!energy) detail::reject_row("bad energy_kwh");
        if (end->minutes <= start->minutes)
          detail::reject_row("non-positive duration");
        if (end->minutes - start->minutes > kMaxSessionMinutes)
          detail::reject_row("duration exceeds 7 days");
        if (!std::isfinite(*energy)) detail::reject_row("non-finite energy");
        if (*energy < 0.0) detail::reject_row("negative energy");
        return ChargingSession{std::string(f[0]), *start, *end, *energy};
      });
}

inline ParseResult<ChargingSession> parse_sessions(std::istream& in) {
  return parse_sessions(detail::read_all(in));
}

inline ParseResult<ChargerSite> parse_sites(std::string_view text) {
  auto result = detail::parse_table<ChargerSite>(
      text, kSitesHeader, "sites.csv",
      [](const std::vector<std::string_view>& f) -> ChargerSite {
        if (f[0].empty()) detail::reject_row("empty charger_id");
        if (f[1].empty()) detail::reject_row("empty zsj_id");
        std::optional<double> power;
        if (!f[2].empty()) {
          power = parse_double(f[2]);
          if (!power || !std::isfinite(*power) || *power <= 0.0)
            detail::reject_row("rated_power_kw must be a positive number");
        }
        auto date = parse_date(f[3]);
        if (!date) detail::reject_row("bad commissioned date");
        return ChargerSite{std::string(f[0]), std::string(f[1]), power, *date};
      });
  // charger_id is unique within a registry; later duplicates are rejected.
  std::map<std::string, bool> seen;
  std::vector<ChargerSite> unique;
  for (auto& s : result.rows) {
    if (seen.emplace(s.charger_id, true).second) {
      unique.push_back(std::move(s));
    } else {
      result.rejects.push_back({0, "duplicate charger_id '" + s.charger_id + "'"});
    }
  }
  result.rows = std::move(unique);
  return result;
}

inline ParseResult<ChargerSite> parse_sites(std::istream& in) {
  return parse_sites(detail::read_all(in));
}

inline ParseResult<ZsjUnit> parse_zsj(std::string_view text) {
  auto result = detail::parse_table<ZsjUnit>(
      text, kZsjHeader, "zsj.csv",
      [](const std::vector<std::string_view>& f) -> ZsjUnit {
        if (f[0].empty()) detail::reject_row("empty zsj_id");
        auto category = parse_category(f[1]);
        if (!category)
          detail::reject_row("unknown category '" + std::string(f[1]) + "'");
        std::array<double, 3> scalars{};
        constexpr const char* names[] = {"population_density", "address_count",
                                         "commuter_inflow"};
        for (int i = 0; i < 3; ++i) {
          auto v = parse_double(f[2 + i]);
          if (!v || !std::isfinite(*v))
            detail::reject_row(std::string("bad ") + names[i]);
          if (*v < 0.0) detail::reject_row(std::string(names[i]) + " is negative");
          scalars[i] = *v;
        }
        return ZsjUnit{std::string(f[0]), *category, scalars[0], scalars[1], scalars[2]};
      });
  std::map<std::string, bool> seen;
  std::vector<ZsjUnit> unique;
  for (auto& u : result.rows) {
    if (seen.emplace(u.zsj_id, true).second) {
      unique.push_back(std::move(u));
    } else {
      result.rejects.push_back({0, "duplicate zsj_id '" + u.zsj_id + "'"});
    }
  }
  result.rows = std::move(unique);
  return result;
}

inline ParseResult<ZsjUnit> parse_zsj(std::istream& in) {
  return parse_zsj(detail::read_all(in));
}

// ---------------------------------------------------------------------------
// Writers (the same dialects the parsers accept)

inline std::string write_sessions_csv(const std::vector<ChargingSession>& sessions) {
  std::string out(kSessionsHeader);
  out += '\n';
  for (const auto& s : sessions) {
    out += s.charger_id;
    out += ',';
    out += format_timestamp(s.start);
    out += ',';
    out += format_timestamp(s.end);
    out += ',';
    out += format_double(s.energy_kwh);
    out += '\n';
  }
  return out;
}

inline std::string write_sites_csv(const std::vector<ChargerSite>& sites) {
  std::string out(kSitesHeader);
  out += '\n';
  for (const auto& s : sites) {
    out += s.charger_id + ',' + s.zsj_id + ',';
    if (s.rated_power_kw) out += format_double(*s.rated_power_kw);
    out += ',' + format_date(s.commissioned) + '\n';
  }
  return out;
}

inline std::string write_zsj_csv(const std::vector<ZsjUnit>& units) {
  std::string out(kZsjHeader);
  out += '\n';
  for (const auto& u : units) {
    out += u.zsj_id + ',' + std::string(name_of(u.category)) + ',' +
           format_double(u.population_density) + ',' + format_double(u.address_count) +
           ',' + format_double(u.commuter_inflow) + '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Registry: charger -> site -> administrative unit

class Registry {
 public:
  Registry() = default;
  Registry(const std::vector<ChargerSite>& sites, const std::vector<ZsjUnit>& units) {
    for (const auto& s : sites) sites_.emplace(s.charger_id, s);
    for (const auto& u : units) units_.emplace(u.zsj_id, u);
  }

  const ChargerSite* site(const std::string& charger_id) const {
    auto it = sites_.find(charger_id);
    return it == sites_.end() ? nullptr : &it->second;
  }
  const ZsjUnit* unit(const std::string& zsj_id) const {
    auto it = units_.find(zsj_id);
    return it == units_.end() ? nullptr : &it->second;
  }
  const ZsjUnit* unit_of_charger(const std::string& charger_id) const {
    const auto* s = site(charger_id);
    return s ? unit(s->zsj_id) : nullptr;
  }

  const std::map<std::string, ChargerSite>& sites() const { return sites_; }
  const std::map<std::string, ZsjUnit>& units() const { return units_; }

 private:
  std::map<std::string, ChargerSite> sites_;
  std::map<std::string, ZsjUnit> units_;
};

// ---------------------------------------------------------------------------
// Binning

/// Minutes of the session falling into each hour-of-day. Sessions that cross
/// midnight wrap around the same 24-hour axis.
inline std::array<std::int64_t, kHoursPerDay> overlap_minutes(const ChargingSession& s) {
  std::array<std::int64_t, kHoursPerDay> minutes{};
  std::int64_t t = s.start.minutes;
  while (t < s.end.minutes) {
    const std::int64_t hour_index = t >= 0 ? t / 60 : (t - 59) / 60;
    const std::int64_t segment = std::min(s.end.minutes, (hour_index + 1) * 60) - t;
    auto hod = static_cast<std::size_t>(((hour_index % 24) + 24) % 24);
    minutes[hod] += segment;
    t += segment;
  }
  return minutes;
}

/// Energy per hour-of-day under constant power across the session.
inline HourlyCurve bin_session(const ChargingSession& s) {
  HourlyCurve bins{};
  const auto minutes = overlap_minutes(s);
  const auto duration = static_cast<double>(s.duration_minutes());
  for (std::size_t h = 0; h < kHoursPerDay; ++h)
    if (minutes[h] > 0) bins[h] = s.energy_kwh * static_cast<double>(minutes[h]) / duration;
  return bins;
}

/// Fraction of each hour bin during which the session was active.
inline HourlyCurve bin_session_instances(const ChargingSession& s) {
  HourlyCurve bins{};
  const auto minutes = overlap_minutes(s);
  for (std::size_t h = 0; h < kHoursPerDay; ++h)
    bins[h] = static_cast<double>(minutes[h]) / 60.0;
  return bins;
}

// ---------------------------------------------------------------------------
// Aggregation

/// Canonical order: charger, start, end, energy.
inline void canonical_sort(std::vector<ChargingSession>& sessions) {
  std::sort(sessions.begin(), sessions.end(), [](const auto& a, const auto& b) {
    return std::tie(a.charger_id, a.start, a.end, a.energy_kwh) <
           std::tie(b.charger_id, b.start, b.end, b.energy_kwh);
  });
}

/// Calendar days from the first to the last session start date.
inline DateRange observation_span(const std::vector<ChargingSession>& sessions) {
  require(!sessions.empty(), ErrorKind::Input, "no sessions");
  Date first = sessions.front().start.date(), last = first;
  for (const auto& s : sessions) {
    first = std::min(first, s.start.date());
    last = std::max(last, s.start.date());
  }
  return {first, last};
}

struct DayFilter {
  enum class Kind { All, Weekday, Weekend, Month, Range };
  Kind kind = Kind::All;
  int month = 0;  // 1..12 for Kind::Month
  DateRange range{};

  static DayFilter all() { return {}; }
  static DayFilter weekdays() { return {Kind::Weekday}; }
  static DayFilter weekends() { return {Kind::Weekend}; }
  static DayFilter in_month(int m) { return {Kind::Month, m}; }
  static DayFilter in_range(DateRange r) { return {Kind::Range, 0, r}; }

  bool matches(Date d) const {
    switch (kind) {
      case Kind::All: return true;
      case Kind::Weekday: return !is_weekend(d);
      case Kind::Weekend: return is_weekend(d);
      case Kind::Month: return month_of(d) == month;
      case Kind::Range: return range.contains(d);
    }
    return false;
  }

  std::string label() const {
    switch (kind) {
      case Kind::All: return "all";
      case Kind::Weekday: return "weekday";
      case Kind::Weekend: return "weekend";
      case Kind::Month: return "month-" + std::to_string(month);
      case Kind::Range: return format_date(range.first) + ":" + format_date(range.last);
    }
    return "";
  }
};

/// How calendar days are grouped into training buckets.
enum class BucketMode { All, DayType, Month, Day };

inline std::optional<BucketMode> parse_bucket_mode(std::string_view s) {
  if (s == "all") return BucketMode::All;
  if (s == "daytype") return BucketMode::DayType;
  if (s == "month") return BucketMode::Month;
  if (s == "day") return BucketMode::Day;
  return std::nullopt;
}

inline std::string bucket_label(Date d, BucketMode mode) {
  switch (mode) {
    case BucketMode::All: return "all";
    case BucketMode::DayType: return is_weekend(d) ? "weekend" : "weekday";
    case BucketMode::Month: return format_month(month_key(d));
    case BucketMode::Day: return format_date(d);
  }
  return "";
}

enum class GroupBy { Charger, ZsjCategory };

struct LabeledCurve {
  std::string group;   // charger id or category name
  std::string bucket;  // day filter or bucket label
  std::size_t days = 0;
  double total_energy_kwh = 0.0;
  HourlyCurve energy{};     // mean kWh per hour-of-day per day
  HourlyCurve instances{};  // mean active-session fraction per hour-of-day per day
};

struct CurveSet {
  std::vector<LabeledCurve> curves;
  std::vector<Reject> rejects;
  DateRange span{};
};

namespace detail {

template <class BucketFn>
CurveSet aggregate(std::vector<ChargingSession> sessions, const Registry& registry,
                   GroupBy group_by, BucketFn&& bucket_of) {
  CurveSet out;
  std::vector<ChargingSession> resolved;
  std::map<std::string, bool> unresolved;
  for (auto& s : sessions) {
    const bool ok = group_by == GroupBy::Charger ? registry.site(s.charger_id) != nullptr
                                                 : registry.unit_of_charger(s.charger_id) != nullptr;
    if (ok) {
      resolved.push_back(std::move(s));
    } else {
      unresolved.emplace(s.charger_id, true);
    }
  }
  for (const auto& [id, _] : unresolved)
    out.rejects.push_back({0, "unresolvable charger_id '" + id + "'"});
  if (resolved.empty()) return out;
  canonical_sort(resolved);
  out.span = observation_span(resolved);

  std::map<std::string, std::size_t> bucket_days;
  for (Date d = out.span.first; d <= out.span.last; d.days++)
    if (auto b = bucket_of(d)) ++bucket_days[*b];

  std::map<std::pair<std::string, std::string>, LabeledCurve> acc;
  for (const auto& s : resolved) {
    auto bucket = bucket_of(s.start.date());
    if (!bucket) continue;
    std::string group = group_by == GroupBy::Charger
                            ? s.charger_id
                            : std::string(name_of(registry.unit_of_charger(s.charger_id)->category));
    auto& c = acc[{group, *bucket}];
    c.group = group;
    c.bucket = *bucket;
    const auto e = bin_session(s);
    const auto n = bin_session_instances(s);
    for (std::size_t h = 0; h < kHoursPerDay; ++h) {
      c.energy[h] += e[h];
      c.instances[h] += n[h];
    }
    c.total_energy_kwh += s.energy_kwh;
  }
  for (auto& [key, c] : acc) {
    c.days = bucket_days[c.bucket];
    const auto days = static_cast<double>(c.days);
    for (std::size_t h = 0; h < kHoursPerDay; ++h) {
      c.energy[h] /= days;
      c.instances[h] /= days;
    }
    out.curves.push_back(std::move(c));
  }
  return out;
}

}  // namespace detail

/// Mean daily curve per group over all calendar days of the observation span
/// that match `filter`. A session is attributed to the day it starts on.
inline CurveSet build_curves(std::vector<ChargingSession> sessions, const Registry& registry,
                             GroupBy group_by, const DayFilter& filter = DayFilter::all()) {
  const std::string label = filter.label();
  return detail::aggregate(std::move(sessions), registry, group_by,
                           [&](Date d) -> std::optional<std::string> {
                             if (!filter.matches(d)) return std::nullopt;
                             return label;
                           });
}

/// Per-charger mean daily curves, one per bucket of calendar days.
inline CurveSet build_bucketed_curves(std::vector<ChargingSession> sessions,
                                      const Registry& registry, BucketMode mode) {
  return detail::aggregate(std::move(sessions), registry, GroupBy::Charger,
                           [mode](Date d) -> std::optional<std::string> {
                             return bucket_label(d, mode);
                           });
}

// ---------------------------------------------------------------------------
// Dataset construction

/// z-score parameters of the three scalar features.
struct Standardization {
  std::array<double, kScalarFeatureCount> means{};
  std::array<double, kScalarFeatureCount> stds{1.0, 1.0, 1.0};

  std::array<double, kScalarFeatureCount> apply(const ZsjUnit& u) const {
    const std::array<double, kScalarFeatureCount> raw = {u.population_density,
                                                         u.address_count, u.commuter_inflow};
    std::array<double, kScalarFeatureCount> z{};
    for (std::size_t i = 0; i < kScalarFeatureCount; ++i) z[i] = (raw[i] - means[i]) / stds[i];
    return z;
  }
};

inline constexpr std::array<std::string_view, kScalarFeatureCount> kScalarFeatureNames = {
    "population_density", "address_count", "commuter_inflow"};

inline nlohmann::json to_json(const Standardization& s) {
  return {{"features", kScalarFeatureNames}, {"means", s.means}, {"stds", s.stds}};
}

inline Standardization standardization_from_json(const nlohmann::json& j) {
  require(j.is_object() && j.contains("means") && j.contains("stds"), ErrorKind::Format,
          "standardization record needs 'means' and 'stds'");
  Standardization s;
  try {
    s.means = j["means"].get<std::array<double, kScalarFeatureCount>>();
    s.stds = j["stds"].get<std::array<double, kScalarFeatureCount>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, std::string("standardization: ") + e.what());
  }
  for (double sd : s.stds)
    require(sd > 0.0 && std::isfinite(sd), ErrorKind::Format,
            "standardization stds must be positive");
  return s;
}

inline model::FeatureVector features_for(const ZsjUnit& unit, const Standardization& st) {
  return model::FeatureVector::from_parts(index_of(unit.category), st.apply(unit));
}

enum class CurveMetric { Energy, Instances };

struct DatasetBuild {
  Dataset samples;
  Standardization standardization;
  std::vector<std::string> warnings;
};

/// One sample per (charger, bucket) curve, in (charger_id, bucket) order.
/// When `fixed` is empty the standardization is fitted here (population
/// mean/std over samples); a zero-variance scalar gets std 1.
inline DatasetBuild build_dataset(std::vector<LabeledCurve> curves, const Registry& registry,
                                  const std::optional<Standardization>& fixed = std::nullopt,
                                  CurveMetric metric = CurveMetric::Energy) {
  std::sort(curves.begin(), curves.end(), [](const auto& a, const auto& b) {
    return std::tie(a.group, a.bucket) < std::tie(b.group, b.bucket);
  });
  std::vector<const ZsjUnit*> units;
  for (const auto& c : curves) {
    const auto* u = registry.unit_of_charger(c.group);
    require(u != nullptr, ErrorKind::Input,
            "curve group '" + c.group + "' does not resolve to a ZSJ unit");
    units.push_back(u);
  }

  DatasetBuild out;
  if (fixed) {
    out.standardization = *fixed;
  } else if (!units.empty()) {
    const auto n = static_cast<double>(units.size());
    for (std::size_t i = 0; i < kScalarFeatureCount; ++i) {
      auto value = [i](const ZsjUnit* u) {
        return i == 0 ? u->population_density : i == 1 ? u->address_count : u->commuter_inflow;
      };
      double mean = 0.0;
      for (const auto* u : units) mean += value(u);
      mean /= n;
      double var = 0.0;
      for (const auto* u : units) var += (value(u) - mean) * (value(u) - mean);
      var /= n;
      out.standardization.means[i] = mean;
      if (var > 0.0) {
        out.standardization.stds[i] = std::sqrt(var);
      } else {
        out.standardization.stds[i] = 1.0;
        out.warnings.push_back(std::string(kScalarFeatureNames[i]) +
                               " has zero variance; standardized to 0");
      }
    }
  }

  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto& curve = metric == CurveMetric::Energy ? curves[i].energy : curves[i].instances;
    out.samples.push_back({features_for(*units[i], out.standardization),
                           std::vector<double>(curve.begin(), curve.end()), curves[i].group,
                           curves[i].bucket});
  }
  return out;
}

inline nlohmann::json dataset_to_json(const Dataset& data) {
  auto arr = nlohmann::json::array();
  for (const auto& s : data) {
    auto f = s.features.values();
    arr.push_back({{"features", std::vector<double>(f.begin(), f.end())},
                   {"target", s.target},
                   {"label", {{"charger_id", s.charger_id}, {"bucket", s.bucket}}}});
  }
  return arr;
}

inline Dataset dataset_from_json(const nlohmann::json& j) {
  require(j.is_array(), ErrorKind::Format, "dataset must be a JSON array");
  Dataset data;
  try {
    for (const auto& item : j) {
      const auto features = item.at("features").get<std::vector<double>>();
      data.push_back({model::FeatureVector::from_values(features),
                      item.at("target").get<std::vector<double>>(),
                      item.at("label").at("charger_id").get<std::string>(),
                      item.at("label").at("bucket").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, std::string("dataset: ") + e.what());
  }
  return data;
}

}  // namespace evload::ingest
