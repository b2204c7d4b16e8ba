#pragma once

// Synthetic stations, administrative units and session logs generated from
// four archetypal daily demand shapes.

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "evload/categories.hpp"
#include "evload/civil_time.hpp"
#include "evload/error.hpp"
#include "evload/ingest.hpp"
#include "evload/numeric.hpp"
#include "evload/rng.hpp"

namespace evload::synth {

using ingest::HourlyCurve;

struct ArchetypeSpec {
  GroupLabel name = GroupLabel::SustainedSinglePeak;
  HourlyCurve base_shape{};
  double weekday_energy_kwh = 1.0;
  double weekend_multiplier = 1.0;
  std::array<double, 12> monthly_multipliers{1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
  double noise_cv = 0.0;
};

/// Sum of weighted Gaussian bumps evaluated at integer hours on a 24-hour circle,
/// scaled to a maximum of 1, plus a constant floor, normalized to sum 1.
struct Bump {
  double center = 0.0;
  double sigma = 1.0;
  double height = 1.0;
};

inline HourlyCurve wrapped_bumps(std::initializer_list<Bump> bumps, double floor) {
  HourlyCurve raw{};
  for (std::size_t h = 0; h < kHoursPerDay; ++h) {
    for (const auto& b : bumps) {
      for (int wrap = -1; wrap <= 1; ++wrap) {
        const double d = static_cast<double>(h) - b.center + 24.0 * wrap;
        raw[h] += b.height * std::exp(-d * d / (2.0 * b.sigma * b.sigma));
      }
    }
  }
  const double top = *std::max_element(raw.begin(), raw.end());
  double total = 0.0;
  for (auto& v : raw) {
    v = v / top + floor;
    total += v;
  }
  for (auto& v : raw) v /= total;
  return raw;
}

inline constexpr std::array<double, 12> kDefaultMonthly = {1.00, 1.00, 0.97, 0.93, 0.88, 0.82,
                                                           0.78, 0.78, 0.88, 0.95, 1.00, 1.02};

/// Gradual daytime hump, morning peak at 08:00, evening peak at 17:00, and a
/// narrow two-peak shape at 08:00 and 17:00 with a smaller late-evening bump.
/// The two-peak shape is kept outside the convex hull of the other three so
/// that a mixture of them cannot reproduce it.
inline std::vector<ArchetypeSpec> default_archetypes() {
  return {
      {GroupLabel::SustainedSinglePeak, wrapped_bumps({{13.0, 3.5}}, 0.03), 40.0, 0.75,
       kDefaultMonthly, 0.1},
      {GroupLabel::MorningSinglePeak, wrapped_bumps({{8.0, 1.6}}, 0.04), 25.0, 0.6,
       kDefaultMonthly, 0.1},
      {GroupLabel::EveningSinglePeak, wrapped_bumps({{17.0, 2.0}}, 0.04), 30.0, 0.8,
       kDefaultMonthly, 0.1},
      {GroupLabel::DoublePeak, wrapped_bumps({{8.0, 0.8}, {17.0, 0.8}, {21.5, 1.2, 0.4}}, 0.02), 20.0, 0.5,
       kDefaultMonthly, 0.1},
  };
}

struct DemandShock {
  DateRange window;
  double multiplier = 1.0;
};

using MixingRow = std::vector<double>;

struct ScenarioConfig {
  std::array<std::size_t, kCategoryCount> stations_per_category{};
  DateRange dates{};
  std::array<MixingRow, kCategoryCount> mixing;
  std::vector<DemandShock> shocks;
  std::vector<ArchetypeSpec> archetypes;
  std::optional<double> noise_cv;  // overrides every archetype's noise_cv
  std::uint64_t seed = 0;

  void validate() const {
    require(!dates.empty(), ErrorKind::Input, "scenario date range is empty");
    require(!archetypes.empty(), ErrorKind::Input, "scenario needs at least one archetype");
    for (const auto& a : archetypes) {
      require(std::abs(sum(a.base_shape) - 1.0) <= 1e-9, ErrorKind::Input,
              "archetype " + std::string(name_of(a.name)) + " shape does not sum to 1");
      for (double v : a.base_shape)
        require(v >= 0.0 && std::isfinite(v), ErrorKind::Input,
                "archetype shape entries must be non-negative");
      require(a.weekday_energy_kwh > 0.0, ErrorKind::Input,
              "archetype weekday_energy_kwh must be positive");
      require(a.weekend_multiplier >= 0.0 && a.weekend_multiplier <= 1.0, ErrorKind::Input,
              "archetype weekend_multiplier must lie in [0, 1]");
      for (double m : a.monthly_multipliers)
        require(m > 0.0, ErrorKind::Input, "monthly multipliers must be positive");
      require(a.noise_cv >= 0.0, ErrorKind::Input, "noise_cv must be >= 0");
    }
    if (noise_cv) require(*noise_cv >= 0.0, ErrorKind::Input, "noise_cv must be >= 0");
    for (std::size_t c = 0; c < kCategoryCount; ++c) {
      const std::string row = "mixing row '" + std::string(kCategoryNames[c]) + "'";
      require(mixing[c].size() == archetypes.size(), ErrorKind::Input,
              row + " must have " + std::to_string(archetypes.size()) + " entries");
      for (double w : mixing[c])
        require(w >= 0.0 && std::isfinite(w), ErrorKind::Input, row + " has a negative entry");
      const double s = sum(mixing[c]);
      require(std::abs(s - 1.0) <= 1e-9, ErrorKind::Input,
              row + " does not sum to 1 (sum = " + format_double(s) + ")");
    }
    for (const auto& shock : shocks) {
      require(!shock.window.empty(), ErrorKind::Input, "shock window is empty");
      require(shock.multiplier >= 0.0, ErrorKind::Input, "shock multiplier must be >= 0");
    }
  }
};

namespace detail {
inline MixingRow pure(std::size_t k) {
  MixingRow row(4, 0.0);
  row[k] = 1.0;
  return row;
}
}  // namespace detail

/// 4 stations per category over 180 days from 2022-01-03. Categories with a
/// characteristic demand group draw purely from that archetype; the remaining
/// three are fixed blends.
inline ScenarioConfig default_scenario(std::uint64_t seed = 0) {
  ScenarioConfig c;
  c.stations_per_category.fill(4);
  c.dates = {make_date(2022, 1, 3), Date{make_date(2022, 1, 3).days + 179}};
  using detail::pure;
  c.mixing = {
      pure(0),                       // compact residential
      pure(0),                       // urban and suburban mixed
      MixingRow{0.4, 0.3, 0.2, 0.1},  // residential and recreational
      pure(2),                       // separated residential
      pure(1),                       // transportation
      pure(0),                       // civic amenities
      pure(1),                       // recreational
      MixingRow{0.25, 0.25, 0.25, 0.25},  // other purpose
      pure(3),                       // industrial
      pure(3),                       // reserve
      pure(2),                       // agricultural
      MixingRow{0.2, 0.2, 0.3, 0.3},  // forest
  };
  c.archetypes = default_archetypes();
  c.seed = seed;
  return c;
}

/// Every category draws purely from one archetype.
inline ScenarioConfig single_archetype_scenario(GroupLabel label, std::uint64_t seed = 0) {
  ScenarioConfig c = default_scenario(seed);
  for (auto& row : c.mixing) {
    row.assign(c.archetypes.size(), 0.0);
    row[static_cast<std::size_t>(label)] = 1.0;
  }
  return c;
}

struct StationTruth {
  std::string station_id;
  ZsjCategory category = ZsjCategory::CompactResidential;
  std::vector<double> mixing;
  HourlyCurve shape{};
  double daily_kwh = 0.0;  // weekday base energy before monthly and shock factors
  GroupLabel label = GroupLabel::SustainedSinglePeak;
};

struct Scenario {
  std::vector<ingest::ChargingSession> sessions;
  std::vector<ingest::ChargerSite> sites;
  std::vector<ingest::ZsjUnit> units;
  std::vector<StationTruth> truth;
  double expected_total_kwh = 0.0;  // analytic product of multipliers, noise-free
};

namespace detail {
// Typical (density per km2, address count, commuter inflow) per category.
inline constexpr std::array<std::array<double, 3>, kCategoryCount> kDemographics = {{
    {{12000, 420, 900}},
    {{7000, 310, 1500}},
    {{2500, 160, 300}},
    {{1500, 90, 150}},
    {{400, 40, 4000}},
    {{3000, 120, 2500}},
    {{300, 30, 600}},
    {{800, 60, 700}},
    {{600, 80, 3000}},
    {{200, 20, 200}},
    {{150, 25, 100}},
    {{50, 5, 50}},
}};

inline std::string numbered(char prefix, std::size_t n) {
  std::string digits = std::to_string(n);
  if (digits.size() < 4) digits.insert(0, 4 - digits.size(), '0');
  return std::string(1, prefix) + digits;
}
}  // namespace detail

/// Draws the session log. For every station-day the expected energy is the
/// station's mixed base energy times weekday/weekend, monthly and shock
/// factors; each hour's share of it is split into 1-4 sessions inside that
/// hour, each carrying multiplicative lognormal noise with mean 1. The number
/// of random draws does not depend on any multiplier, so paired runs with the
/// same seed differ only by those factors.
inline Scenario generate(const ScenarioConfig& config) {
  config.validate();
  Scenario out;
  const std::size_t K = config.archetypes.size();
  std::size_t station_index = 0;

  for (std::size_t c = 0; c < kCategoryCount; ++c) {
    const auto& w = config.mixing[c];
    HourlyCurve shape{};
    double energy = 0.0, weekend = 0.0, cv = 0.0;
    std::array<double, 12> monthly{};
    for (std::size_t k = 0; k < K; ++k) {
      const auto& a = config.archetypes[k];
      for (std::size_t h = 0; h < kHoursPerDay; ++h) shape[h] += w[k] * a.base_shape[h];
      energy += w[k] * a.weekday_energy_kwh;
      weekend += w[k] * a.weekend_multiplier;
      cv += w[k] * config.noise_cv.value_or(a.noise_cv);
      for (int m = 0; m < 12; ++m) monthly[m] += w[k] * a.monthly_multipliers[m];
    }
    const auto top = static_cast<std::size_t>(std::max_element(w.begin(), w.end()) - w.begin());
    const double sigma = std::sqrt(std::log1p(cv * cv));

    for (std::size_t n = 0; n < config.stations_per_category[c]; ++n) {
      ++station_index;
      Rng rng(derive_seed(config.seed, station_index));
      const std::string station = detail::numbered('S', station_index);
      const std::string zsj = detail::numbered('Z', station_index);
      const auto& demo = detail::kDemographics[c];
      out.units.push_back({zsj, category_from_index(c), demo[0] * rng.uniform(0.7, 1.3),
                           std::round(demo[1] * rng.uniform(0.7, 1.3)),
                           std::round(demo[2] * rng.uniform(0.7, 1.3))});
      const auto commissioned =
          Date{config.dates.first.days - static_cast<std::int32_t>(rng.uniform_int(30, 720))};
      out.sites.push_back({station, zsj,
                           category_from_index(c) == ZsjCategory::Transportation ? 50.0 : 22.0,
                           commissioned});
      out.truth.push_back({station, category_from_index(c), w, shape, energy,
                           config.archetypes[top].name});

      for (Date d = config.dates.first; d <= config.dates.last; d.days++) {
        double factor = (is_weekend(d) ? weekend : 1.0) * monthly[month_of(d) - 1];
        for (const auto& shock : config.shocks)
          if (shock.window.contains(d)) factor *= shock.multiplier;
        const double day_energy = energy * factor;
        out.expected_total_kwh += day_energy;
        const std::int64_t day_start = static_cast<std::int64_t>(d.days) * 1440;

        for (std::size_t h = 0; h < kHoursPerDay; ++h) {
          const double hour_energy = day_energy * shape[h];
          const auto count = rng.uniform_int(1, 4);
          const std::int64_t slot = 60 / count;
          std::array<double, 4> split{};
          double split_total = 0.0;
          for (std::int64_t i = 0; i < count; ++i) {
            split[i] = rng.uniform(0.5, 1.5);
            split_total += split[i];
          }
          for (std::int64_t i = 0; i < count; ++i) {
            const std::int64_t slot_start = day_start + static_cast<std::int64_t>(h) * 60 + i * slot;
            const std::int64_t a = rng.uniform_int(0, slot - 2);
            const std::int64_t b = rng.uniform_int(a + 1, slot);
            const double noise = std::exp(sigma * rng.normal() - 0.5 * sigma * sigma);
            out.sessions.push_back({station, Timestamp{slot_start + a}, Timestamp{slot_start + b},
                                    hour_energy * split[i] / split_total * noise});
          }
        }
      }
    }
  }
  return out;
}

inline nlohmann::json truth_to_json(const Scenario& s) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& t : s.truth) {
    j[t.station_id] = {{"mixing", t.mixing},
                       {"shape", t.shape},
                       {"daily_kwh", t.daily_kwh},
                       {"category", name_of(t.category)},
                       {"label", name_of(t.label)}};
  }
  return j;
}

struct ScenarioFiles {
  std::string sessions_csv;
  std::string sites_csv;
  std::string zsj_csv;
  std::string ground_truth_json;
};

inline ScenarioFiles render(const Scenario& s) {
  return {ingest::write_sessions_csv(s.sessions), ingest::write_sites_csv(s.sites),
          ingest::write_zsj_csv(s.units), truth_to_json(s).dump(2) + "\n"};
}

// ---------------------------------------------------------------------------
// Scenario config files

/// Keys: seed, start, end | days, noise_cv, stations_per_category (number or
/// 12-array), mixing (object keyed by category name, overriding defaults),
/// shocks [{from, to, multiplier}], archetypes [{name, weekday_energy_kwh,
/// weekend_multiplier, monthly_multipliers, noise_cv, base_shape}].
inline ScenarioConfig scenario_from_json(const nlohmann::json& j) {
  require(j.is_object(), ErrorKind::Format, "scenario config must be a JSON object");
  ScenarioConfig c = default_scenario();
  auto date_field = [&](const char* key) {
    auto d = parse_date(j.at(key).get<std::string>());
    require(d.has_value(), ErrorKind::Input, std::string("scenario: bad date in '") + key + "'");
    return *d;
  };
  try {
    for (const auto& [key, _] : j.items()) {
      static const char* known[] = {"seed", "start", "end", "days", "noise_cv",
                                    "stations_per_category", "mixing", "shocks", "archetypes"};
      require(std::find_if(std::begin(known), std::end(known),
                           [&](const char* k) { return key == k; }) != std::end(known),
              ErrorKind::Input, "unknown scenario key '" + key + "'");
    }
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("start")) {
      const auto length = c.dates.length();
      c.dates.first = date_field("start");
      c.dates.last = Date{c.dates.first.days + length - 1};
    }
    if (j.contains("days")) {
      const auto days = j["days"].get<std::int64_t>();
      c.dates.last = Date{c.dates.first.days + static_cast<std::int32_t>(days) - 1};
    }
    if (j.contains("end")) c.dates.last = date_field("end");
    if (j.contains("noise_cv")) c.noise_cv = j["noise_cv"].get<double>();
    if (j.contains("stations_per_category")) {
      const auto& s = j["stations_per_category"];
      if (s.is_number()) {
        c.stations_per_category.fill(s.get<std::size_t>());
      } else {
        c.stations_per_category = s.get<std::array<std::size_t, kCategoryCount>>();
      }
    }
    if (j.contains("archetypes")) {
      c.archetypes.clear();
      const auto defaults = default_archetypes();
      for (const auto& a : j["archetypes"]) {
        auto label = parse_group(a.at("name").get<std::string>());
        require(label.has_value(), ErrorKind::Input,
                "unknown archetype name '" + a.at("name").get<std::string>() + "'");
        ArchetypeSpec spec = defaults[static_cast<std::size_t>(*label)];
        if (a.contains("base_shape")) spec.base_shape = a["base_shape"].get<HourlyCurve>();
        if (a.contains("weekday_energy_kwh"))
          spec.weekday_energy_kwh = a["weekday_energy_kwh"].get<double>();
        if (a.contains("weekend_multiplier"))
          spec.weekend_multiplier = a["weekend_multiplier"].get<double>();
        if (a.contains("monthly_multipliers"))
          spec.monthly_multipliers = a["monthly_multipliers"].get<std::array<double, 12>>();
        if (a.contains("noise_cv")) spec.noise_cv = a["noise_cv"].get<double>();
        c.archetypes.push_back(spec);
      }
    }
    if (j.contains("mixing")) {
      for (const auto& [name, row] : j["mixing"].items()) {
        auto cat = parse_category(name);
        require(cat.has_value(), ErrorKind::Input, "mixing: unknown category '" + name + "'");
        c.mixing[index_of(*cat)] = row.get<MixingRow>();
      }
    }
    if (j.contains("shocks")) {
      for (const auto& s : j["shocks"]) {
        auto from = parse_date(s.at("from").get<std::string>());
        auto to = parse_date(s.at("to").get<std::string>());
        require(from && to, ErrorKind::Input, "shock: bad date");
        c.shocks.push_back({{*from, *to}, s.at("multiplier").get<double>()});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, std::string("scenario config: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace evload::synth
