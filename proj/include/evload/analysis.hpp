#pragma once

// Demand-pattern analytics over session logs: max normalization, group
// classification, seasonality, day-type and window comparisons, total-load
// timeline and category share development.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "evload/categories.hpp"
#include "evload/civil_time.hpp"
#include "evload/error.hpp"
#include "evload/ingest.hpp"
#include "evload/numeric.hpp"

namespace evload::analysis {

using ingest::ChargingSession;
using ingest::HourlyCurve;
using ingest::Registry;

// ---------------------------------------------------------------------------
// Max normalization

struct NormalizedCurve {
  std::vector<double> bins;
  bool degenerate = false;  // source was all zeros
};

inline NormalizedCurve normalize_max(std::span<const double> series) {
  for (double v : series) {
    require(std::isfinite(v), ErrorKind::Input, "normalize_max: non-finite entry");
    require(v >= 0.0, ErrorKind::Input, "normalize_max: negative entry");
  }
  NormalizedCurve out{std::vector<double>(series.begin(), series.end()), false};
  const double top = series.empty() ? 0.0 : *std::max_element(series.begin(), series.end());
  if (top == 0.0) {
    out.degenerate = true;
    return out;
  }
  for (auto& v : out.bins) v /= top;
  return out;
}

// ---------------------------------------------------------------------------
// Group classification

struct HourWindow {
  int first = 0;
  int last = 0;
  bool contains(int h) const { return first <= h && h <= last; }
};

struct ClassifierConfig {
  int smoothing_width = 3;  // odd, centered, wraps around midnight
  double peak_threshold = 0.8;
  HourWindow morning{6, 10};
  HourWindow evening{15, 19};
};

struct Peak {
  int hour = 0;  // center of the (possibly flat) peak
  double height = 0.0;
};

/// Circular moving average, rescaled so the largest smoothed bin is 1.
inline std::vector<double> smooth_and_rescale(std::span<const double> curve, int width) {
  require(width >= 1 && width % 2 == 1, ErrorKind::Input, "smoothing width must be odd");
  const int n = static_cast<int>(curve.size());
  const int half = width / 2;
  std::vector<double> out(curve.size(), 0.0);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int d = -half; d <= half; ++d) acc += curve[((i + d) % n + n) % n];
    out[i] = acc / width;
  }
  const double top = out.empty() ? 0.0 : *std::max_element(out.begin(), out.end());
  if (top > 0.0)
    for (auto& v : out) v /= top;
  return out;
}

/// Local maxima on a circle. A flat run counts once, when both neighbors of
/// the run are strictly lower; a constant curve has no peaks.
inline std::vector<Peak> find_peaks(std::span<const double> curve, double threshold) {
  const int n = static_cast<int>(curve.size());
  std::vector<Peak> peaks;
  if (n < 3) return peaks;
  auto at = [&](int i) { return curve[((i % n) + n) % n]; };
  // Start scanning just after a strict change so no run is split.
  int origin = -1;
  for (int i = 0; i < n; ++i)
    if (at(i) != at(i - 1)) {
      origin = i;
      break;
    }
  if (origin < 0) return peaks;
  int i = origin;
  int visited = 0;
  while (visited < n) {
    int len = 1;
    while (len < n && at(i + len) == at(i)) ++len;
    const double v = at(i);
    if (v >= threshold && at(i - 1) < v && at(i + len) < v)
      peaks.push_back({((i + (len - 1) / 2) % n + n) % n, v});
    i += len;
    visited += len;
  }
  std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.hour < b.hour; });
  return peaks;
}

inline GroupLabel classify_group(std::span<const double> normalized,
                                 const ClassifierConfig& cfg = {}) {
  const auto smoothed = smooth_and_rescale(normalized, cfg.smoothing_width);
  bool morning = false, evening = false;
  for (const auto& p : find_peaks(smoothed, cfg.peak_threshold)) {
    morning = morning || cfg.morning.contains(p.hour);
    evening = evening || cfg.evening.contains(p.hour);
  }
  if (morning && evening) return GroupLabel::DoublePeak;
  if (morning) return GroupLabel::MorningSinglePeak;
  if (evening) return GroupLabel::EveningSinglePeak;
  return GroupLabel::SustainedSinglePeak;
}

inline GroupLabel classify_group(const NormalizedCurve& curve, const ClassifierConfig& cfg = {}) {
  return classify_group(curve.bins, cfg);
}

struct GroupAssignment {
  std::string group;  // charger id or category name
  std::size_t days = 0;
  NormalizedCurve curve;
  GroupLabel label = GroupLabel::SustainedSinglePeak;
};

inline std::vector<GroupAssignment> classify_groups(
    std::vector<ChargingSession> sessions, const Registry& registry,
    ingest::GroupBy group_by = ingest::GroupBy::Charger,
    ingest::CurveMetric metric = ingest::CurveMetric::Energy, const ClassifierConfig& cfg = {}) {
  const auto set = ingest::build_curves(std::move(sessions), registry, group_by);
  std::vector<GroupAssignment> out;
  for (const auto& c : set.curves) {
    const auto& raw = metric == ingest::CurveMetric::Energy ? c.energy : c.instances;
    auto norm = normalize_max(raw);
    const auto label = classify_group(norm, cfg);
    out.push_back({c.group, c.days, std::move(norm), label});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Daily totals: shared helper for the date-based analyses

namespace detail {

inline std::vector<ChargingSession> resolved_only(const std::vector<ChargingSession>& sessions,
                                                  const Registry* registry) {
  std::vector<ChargingSession> out;
  for (const auto& s : sessions)
    if (!registry || registry->site(s.charger_id)) out.push_back(s);
  ingest::canonical_sort(out);
  return out;
}

/// Per-date hourly energy, keyed by date, summed in canonical session order.
inline std::map<Date, HourlyCurve> daily_curves(const std::vector<ChargingSession>& sessions) {
  std::map<Date, HourlyCurve> days;
  for (const auto& s : sessions) {
    auto& day = days[s.start.date()];
    const auto bins = ingest::bin_session(s);
    for (std::size_t h = 0; h < kHoursPerDay; ++h) day[h] += bins[h];
  }
  return days;
}

inline HourlyCurve mean_over(const std::map<Date, HourlyCurve>& days,
                             const std::vector<Date>& dates) {
  HourlyCurve mean{};
  if (dates.empty()) return mean;
  for (Date d : dates) {
    auto it = days.find(d);
    if (it == days.end()) continue;
    for (std::size_t h = 0; h < kHoursPerDay; ++h) mean[h] += it->second[h];
  }
  for (auto& v : mean) v /= static_cast<double>(dates.size());
  return mean;
}

inline nlohmann::json curve_json(const HourlyCurve& c) { return std::vector<double>(c.begin(), c.end()); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Seasonality

struct SeasonalityCell {
  std::size_t n = 0;  // number of calendar days in the cell
  HourlyCurve mean{};
  std::optional<HourlyCurve> ci_half_width;  // absent when n == 1
};

/// Month (rows, January first) by weekday (columns, Monday to Friday).
struct SeasonalityMatrix {
  std::array<std::array<std::optional<SeasonalityCell>, 5>, 12> cells;

  std::size_t populated() const {
    std::size_t n = 0;
    for (const auto& row : cells)
      for (const auto& c : row) n += c.has_value();
    return n;
  }
};

/// Mean daily curve and normal-approximation 95% CI (1.96 * sd / sqrt(n),
/// sample sd) for each cell, over the calendar days of the observation span.
inline SeasonalityMatrix seasonality_matrix(const std::vector<ChargingSession>& sessions,
                                            const Registry* registry = nullptr) {
  const auto resolved = detail::resolved_only(sessions, registry);
  require(!resolved.empty(), ErrorKind::Input, "seasonality needs at least one session");
  const auto span = ingest::observation_span(resolved);
  const auto days = detail::daily_curves(resolved);

  std::array<std::array<std::vector<Date>, 5>, 12> dates;
  for (Date d = span.first; d <= span.last; d.days++)
    if (weekday(d) < 5) dates[month_of(d) - 1][weekday(d)].push_back(d);

  SeasonalityMatrix out;
  for (int m = 0; m < 12; ++m) {
    for (int w = 0; w < 5; ++w) {
      const auto& ds = dates[m][w];
      if (ds.empty()) continue;
      SeasonalityCell cell;
      cell.n = ds.size();
      cell.mean = detail::mean_over(days, ds);
      if (cell.n > 1) {
        HourlyCurve ci{};
        for (std::size_t h = 0; h < kHoursPerDay; ++h) {
          double ss = 0.0;
          for (Date d : ds) {
            auto it = days.find(d);
            const double v = it == days.end() ? 0.0 : it->second[h];
            ss += (v - cell.mean[h]) * (v - cell.mean[h]);
          }
          const double sd = std::sqrt(ss / static_cast<double>(cell.n - 1));
          ci[h] = 1.96 * sd / std::sqrt(static_cast<double>(cell.n));
        }
        cell.ci_half_width = ci;
      }
      out.cells[m][w] = cell;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Weekday vs weekend

struct DayTypeComparison {
  std::string group;  // charger id, or "all"
  std::size_t weekday_days = 0;
  std::size_t weekend_days = 0;
  HourlyCurve weekday{};
  HourlyCurve weekend{};
  /// Mean weekend daily energy over mean weekday daily energy; absent when
  /// the weekday mean is zero.
  std::optional<double> weekend_to_weekday_ratio;
};

inline std::vector<DayTypeComparison> weekday_weekend_compare(
    const std::vector<ChargingSession>& sessions, const Registry* registry = nullptr,
    bool per_charger = false) {
  const auto resolved = detail::resolved_only(sessions, registry);
  std::vector<DayTypeComparison> out;
  if (resolved.empty()) return out;
  const auto span = ingest::observation_span(resolved);
  std::vector<Date> weekdays, weekends;
  for (Date d = span.first; d <= span.last; d.days++)
    (is_weekend(d) ? weekends : weekdays).push_back(d);

  std::map<std::string, std::vector<ChargingSession>> groups;
  for (const auto& s : resolved) groups[per_charger ? s.charger_id : "all"].push_back(s);
  for (const auto& [name, group_sessions] : groups) {
    const auto days = detail::daily_curves(group_sessions);
    DayTypeComparison c;
    c.group = name;
    c.weekday_days = weekdays.size();
    c.weekend_days = weekends.size();
    c.weekday = detail::mean_over(days, weekdays);
    c.weekend = detail::mean_over(days, weekends);
    const double wd = sum(c.weekday);
    if (wd > 0.0) c.weekend_to_weekday_ratio = sum(c.weekend) / wd;
    out.push_back(c);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Window vs baseline

struct WindowComparison {
  std::size_t window_days = 0;
  std::size_t baseline_days = 0;
  HourlyCurve window{};
  HourlyCurve baseline{};
  HourlyCurve difference{};  // window - baseline
};

/// Mean daily curves over all calendar days of the window and of the baseline
/// ranges.
inline WindowComparison window_compare(const std::vector<ChargingSession>& sessions,
                                       const DateRange& window,
                                       const std::vector<DateRange>& baseline) {
  require(!window.empty(), ErrorKind::Input, "comparison window is empty");
  require(!baseline.empty(), ErrorKind::Input, "baseline needs at least one date range");
  std::vector<DateRange> all = baseline;
  all.push_back(window);
  for (const auto& r : baseline) require(!r.empty(), ErrorKind::Input, "baseline range is empty");
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j)
      require(all[i].last < all[j].first || all[j].last < all[i].first, ErrorKind::Input,
              "window and baseline ranges must not overlap");

  auto sorted = sessions;
  ingest::canonical_sort(sorted);
  const auto days = detail::daily_curves(sorted);
  std::vector<Date> wdates, bdates;
  for (Date d = window.first; d <= window.last; d.days++) wdates.push_back(d);
  for (const auto& r : baseline)
    for (Date d = r.first; d <= r.last; d.days++) bdates.push_back(d);

  WindowComparison out;
  out.window_days = wdates.size();
  out.baseline_days = bdates.size();
  out.window = detail::mean_over(days, wdates);
  out.baseline = detail::mean_over(days, bdates);
  for (std::size_t h = 0; h < kHoursPerDay; ++h) out.difference[h] = out.window[h] - out.baseline[h];
  return out;
}

// ---------------------------------------------------------------------------
// Total-load timeline

struct TimelinePoint {
  MonthKey month;
  double total_kwh = 0.0;
  std::size_t sessions = 0;
  bool interpolated = false;
};

struct MonthRange {
  MonthKey first;
  MonthKey last;
};

namespace detail {

inline MonthRange session_months(const std::vector<ChargingSession>& sessions) {
  require(!sessions.empty(), ErrorKind::Input, "timeline needs at least one session");
  MonthKey lo = month_key(sessions.front().start.date()), hi = lo;
  for (const auto& s : sessions) {
    lo = std::min(lo, month_key(s.start.date()));
    hi = std::max(hi, month_key(s.start.date()));
  }
  return {lo, hi};
}

/// Fills entries flagged `missing` that lie strictly between two present
/// entries by linear interpolation (in month index); returns which were filled.
template <class Get, class Set>
std::vector<bool> interpolate_gaps(const std::vector<bool>& missing, Get&& get, Set&& set) {
  const std::size_t n = missing.size();
  std::vector<bool> filled(n, false);
  std::optional<std::size_t> prev;
  for (std::size_t i = 0; i < n; ++i) {
    if (missing[i]) continue;
    if (prev && i - *prev > 1) {
      const double span = static_cast<double>(i - *prev);
      for (std::size_t g = *prev + 1; g < i; ++g) {
        const double t = static_cast<double>(g - *prev) / span;
        set(g, *prev, i, t);
        filled[g] = true;
      }
    }
    prev = i;
  }
  (void)get;
  return filled;
}

}  // namespace detail

/// Monthly energy totals by session start month. Months without sessions that
/// lie strictly between populated months are linearly interpolated and
/// flagged; leading and trailing empty months stay zero.
inline std::vector<TimelinePoint> total_load_timeline(const std::vector<ChargingSession>& sessions,
                                                      std::optional<MonthRange> range = std::nullopt) {
  require(!sessions.empty(), ErrorKind::Input, "timeline needs at least one session");
  const MonthRange r = range.value_or(detail::session_months(sessions));
  require(r.first <= r.last, ErrorKind::Input, "timeline month range is empty");
  auto sorted = sessions;
  ingest::canonical_sort(sorted);
  std::vector<TimelinePoint> out;
  for (auto m = r.first; m <= r.last; m.index++) out.push_back({m});
  for (const auto& s : sorted) {
    const auto m = month_key(s.start.date());
    if (m < r.first || r.last < m) continue;
    auto& p = out[m.index - r.first.index];
    p.total_kwh += s.energy_kwh;
    p.sessions += 1;
  }
  std::vector<bool> missing;
  for (const auto& p : out) missing.push_back(p.sessions == 0);
  const auto filled = detail::interpolate_gaps(
      missing, [](std::size_t) {},
      [&](std::size_t g, std::size_t a, std::size_t b, double t) {
        out[g].total_kwh = (1.0 - t) * out[a].total_kwh + t * out[b].total_kwh;
      });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].interpolated = filled[i];
  return out;
}

// ---------------------------------------------------------------------------
// Share development

using CategoryShares = std::array<double, kCategoryCount>;

struct MonthlyShareSeries {
  std::vector<MonthKey> months;
  std::vector<CategoryShares> shares;
  std::vector<bool> interpolated;
  std::vector<double> totals;  // underlying count per month (before interpolation)
};

struct ShareDevelopment {
  MonthlyShareSeries instances;  // share of charging sessions started
  MonthlyShareSeries installed;  // share of cumulative commissioned chargers
};

/// Per-month category shares of sessions and of installed chargers. Chargers
/// commissioned before the first month count from the start. Months without
/// sessions between active months get linearly interpolated instance shares.
inline ShareDevelopment share_development(const std::vector<ChargingSession>& sessions,
                                          const Registry& registry,
                                          std::optional<MonthRange> range = std::nullopt) {
  require(range.has_value() || !sessions.empty(), ErrorKind::Input,
          "share development needs sessions or an explicit month range");
  const MonthRange r = range.value_or(detail::session_months(sessions));
  require(r.first <= r.last, ErrorKind::Input, "share month range is empty");
  const std::size_t n = static_cast<std::size_t>(r.last.index - r.first.index + 1);

  ShareDevelopment out;
  for (auto* series : {&out.instances, &out.installed}) {
    for (auto m = r.first; m <= r.last; m.index++) series->months.push_back(m);
    series->shares.assign(n, CategoryShares{});
    series->interpolated.assign(n, false);
    series->totals.assign(n, 0.0);
  }

  std::vector<CategoryShares> counts(n, CategoryShares{});
  for (const auto& s : sessions) {
    const auto* unit = registry.unit_of_charger(s.charger_id);
    if (!unit) continue;
    const auto m = month_key(s.start.date());
    if (m < r.first || r.last < m) continue;
    counts[m.index - r.first.index][index_of(unit->category)] += 1.0;
  }
  std::vector<bool> missing(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double total = sum(counts[i]);
    out.instances.totals[i] = total;
    missing[i] = total == 0.0;
    if (total > 0.0)
      for (std::size_t c = 0; c < kCategoryCount; ++c) out.instances.shares[i][c] = counts[i][c] / total;
  }
  out.instances.interpolated = detail::interpolate_gaps(
      missing, [](std::size_t) {},
      [&](std::size_t g, std::size_t a, std::size_t b, double t) {
        for (std::size_t c = 0; c < kCategoryCount; ++c)
          out.instances.shares[g][c] =
              (1.0 - t) * out.instances.shares[a][c] + t * out.instances.shares[b][c];
      });

  for (std::size_t i = 0; i < n; ++i) {
    const Date month_end = last_day_of(out.installed.months[i]);
    CategoryShares installed{};
    for (const auto& [id, site] : registry.sites()) {
      const auto* unit = registry.unit(site.zsj_id);
      if (!unit || month_end < site.commissioned) continue;
      installed[index_of(unit->category)] += 1.0;
    }
    const double total = sum(installed);
    out.installed.totals[i] = total;
    if (total > 0.0)
      for (std::size_t c = 0; c < kCategoryCount; ++c) out.installed.shares[i][c] = installed[c] / total;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports: JSON documents and long-format CSV

struct Report {
  nlohmann::json json;
  std::string csv;
};

inline Report groups_report(const std::vector<GroupAssignment>& groups) {
  Report r;
  r.json = nlohmann::json::array();
  r.csv = "group,label,hour,normalized\n";
  for (const auto& g : groups) {
    r.json.push_back({{"group", g.group},
                      {"label", name_of(g.label)},
                      {"days", g.days},
                      {"degenerate", g.curve.degenerate},
                      {"normalized", g.curve.bins}});
    for (std::size_t h = 0; h < g.curve.bins.size(); ++h)
      r.csv += g.group + ',' + std::string(name_of(g.label)) + ',' + std::to_string(h) + ',' +
               format_double(g.curve.bins[h]) + '\n';
  }
  return r;
}

inline Report seasonality_report(const SeasonalityMatrix& m) {
  static constexpr const char* kWeekdays[] = {"Monday", "Tuesday", "Wednesday", "Thursday", "Friday"};
  Report r;
  r.json = nlohmann::json::array();
  r.csv = "month,weekday,hour,mean,ci_half_width,n\n";
  for (int mo = 0; mo < 12; ++mo) {
    for (int w = 0; w < 5; ++w) {
      const auto& cell = m.cells[mo][w];
      nlohmann::json item = {{"month", mo + 1}, {"weekday", kWeekdays[w]}};
      if (!cell) {
        item["absent"] = true;
        r.json.push_back(item);
        continue;
      }
      item["n"] = cell->n;
      item["mean"] = detail::curve_json(cell->mean);
      item["ci_half_width"] =
          cell->ci_half_width ? detail::curve_json(*cell->ci_half_width) : nlohmann::json(nullptr);
      r.json.push_back(item);
      for (std::size_t h = 0; h < kHoursPerDay; ++h)
        r.csv += std::to_string(mo + 1) + ',' + kWeekdays[w] + ',' + std::to_string(h) + ',' +
                 format_double(cell->mean[h]) + ',' +
                 (cell->ci_half_width ? format_double((*cell->ci_half_width)[h]) : std::string()) +
                 ',' + std::to_string(cell->n) + '\n';
    }
  }
  return r;
}

inline Report weekday_report(const std::vector<DayTypeComparison>& cmp) {
  Report r;
  r.json = nlohmann::json::array();
  r.csv = "group,day_type,hour,mean\n";
  for (const auto& c : cmp) {
    r.json.push_back({{"group", c.group},
                      {"weekday_days", c.weekday_days},
                      {"weekend_days", c.weekend_days},
                      {"weekday", detail::curve_json(c.weekday)},
                      {"weekend", detail::curve_json(c.weekend)},
                      {"weekend_to_weekday_ratio", c.weekend_to_weekday_ratio
                                                       ? nlohmann::json(*c.weekend_to_weekday_ratio)
                                                       : nlohmann::json(nullptr)}});
    for (std::size_t h = 0; h < kHoursPerDay; ++h) {
      r.csv += c.group + ",weekday," + std::to_string(h) + ',' + format_double(c.weekday[h]) + '\n';
      r.csv += c.group + ",weekend," + std::to_string(h) + ',' + format_double(c.weekend[h]) + '\n';
    }
  }
  return r;
}

inline Report window_report(const WindowComparison& w) {
  Report r;
  r.json = {{"window_days", w.window_days},
            {"baseline_days", w.baseline_days},
            {"window", detail::curve_json(w.window)},
            {"baseline", detail::curve_json(w.baseline)},
            {"difference", detail::curve_json(w.difference)}};
  r.csv = "hour,window,baseline,difference\n";
  for (std::size_t h = 0; h < kHoursPerDay; ++h)
    r.csv += std::to_string(h) + ',' + format_double(w.window[h]) + ',' +
             format_double(w.baseline[h]) + ',' + format_double(w.difference[h]) + '\n';
  return r;
}

inline Report timeline_report(const std::vector<TimelinePoint>& points) {
  Report r;
  r.json = nlohmann::json::array();
  r.csv = "month,total_kwh,sessions,interpolated\n";
  for (const auto& p : points) {
    r.json.push_back({{"month", format_month(p.month)},
                      {"total_kwh", p.total_kwh},
                      {"sessions", p.sessions},
                      {"interpolated", p.interpolated}});
    r.csv += format_month(p.month) + ',' + format_double(p.total_kwh) + ',' +
             std::to_string(p.sessions) + ',' + (p.interpolated ? "true" : "false") + '\n';
  }
  return r;
}

inline Report shares_report(const ShareDevelopment& d) {
  Report r;
  r.json = nlohmann::json::object();
  r.csv = "series,month,category,share,interpolated\n";
  auto emit = [&](const char* name, const MonthlyShareSeries& s) {
    auto arr = nlohmann::json::array();
    for (std::size_t i = 0; i < s.months.size(); ++i) {
      nlohmann::json shares = nlohmann::json::object();
      for (std::size_t c = 0; c < kCategoryCount; ++c) {
        shares[std::string(kCategoryNames[c])] = s.shares[i][c];
        r.csv += std::string(name) + ',' + format_month(s.months[i]) + ',' +
                 std::string(kCategoryNames[c]) + ',' + format_double(s.shares[i][c]) + ',' +
                 (s.interpolated[i] ? "true" : "false") + '\n';
      }
      arr.push_back({{"month", format_month(s.months[i])},
                     {"total", s.totals[i]},
                     {"interpolated", s.interpolated[i]},
                     {"shares", shares}});
    }
    r.json[name] = arr;
  };
  emit("instances", d.instances);
  emit("installed", d.installed);
  return r;
}

}  // namespace evload::analysis
