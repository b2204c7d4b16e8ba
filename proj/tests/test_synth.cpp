#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "evload/ingest.hpp"
#include "evload/synth.hpp"

using namespace evload;
using namespace evload::synth;

namespace {

ScenarioConfig one_station(GroupLabel label, double noise, int days = 20) {
  auto c = single_archetype_scenario(label, 3);
  c.stations_per_category.fill(0);
  c.stations_per_category[index_of(ZsjCategory::CivicAmenities)] = 1;
  c.dates = {make_date(2022, 5, 2), Date{make_date(2022, 5, 2).days + days - 1}};
  c.noise_cv = noise;
  return c;
}

ScenarioConfig small_default(std::uint64_t seed, double noise) {
  auto c = default_scenario(seed);
  c.stations_per_category.fill(1);
  c.dates = {make_date(2022, 1, 3), make_date(2022, 2, 27)};
  c.noise_cv = noise;
  return c;
}

std::size_t argmax(const ingest::HourlyCurve& c) {
  return static_cast<std::size_t>(std::max_element(c.begin(), c.end()) - c.begin());
}

}  // namespace

TEST(WrappedBumps, NormalizedAndWrapped) {
  const auto a = wrapped_bumps({{23.5, 1.0}}, 0.0);
  EXPECT_NEAR(sum(a), 1.0, 1e-12);
  EXPECT_NEAR(a[23], a[0], 1e-12);
  const auto b = wrapped_bumps({{12, 2.0}}, 0.05);
  EXPECT_EQ(argmax(b), 12u);
  EXPECT_GT(*std::min_element(b.begin(), b.end()), 0.0);
}

TEST(DefaultArchetypes, ShapesAndPeakHours) {
  const auto a = default_archetypes();
  ASSERT_EQ(a.size(), 4u);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(a[k].name, static_cast<GroupLabel>(k));
    EXPECT_NEAR(sum(a[k].base_shape), 1.0, 1e-12);
  }
  EXPECT_EQ(argmax(a[1].base_shape), 8u);
  EXPECT_EQ(argmax(a[2].base_shape), 17u);
  EXPECT_NEAR(a[3].base_shape[8], a[3].base_shape[17], 1e-3);
  EXPECT_GT(a[3].base_shape[8], 3 * a[3].base_shape[12]);
}

TEST(Generate, NoiselessDaysReproduceShapeExactly) {
  for (auto label : {GroupLabel::MorningSinglePeak, GroupLabel::DoublePeak}) {
    const auto s = generate(one_station(label, 0.0));
    ASSERT_EQ(s.truth.size(), 1u);
    std::map<Date, ingest::HourlyCurve> days;
    std::map<Date, double> energy;
    for (const auto& x : s.sessions) {
      const auto b = ingest::bin_session(x);
      for (std::size_t h = 0; h < 24; ++h) days[x.start.date()][h] += b[h];
      energy[x.start.date()] += x.energy_kwh;
    }
    EXPECT_EQ(days.size(), 20u);
    const auto& shape = default_archetypes()[static_cast<std::size_t>(label)].base_shape;
    for (const auto& [d, curve] : days)
      for (std::size_t h = 0; h < 24; ++h) EXPECT_NEAR(curve[h], energy[d] * shape[h], 1e-9);
  }
}

TEST(Generate, SessionsStayInsideTheirHour) {
  const auto s = generate(small_default(1, 0.1));
  for (const auto& x : s.sessions) {
    ASSERT_GT(x.duration_minutes(), 0);
    EXPECT_EQ(x.start.minutes / 60, (x.end.minutes - 1) / 60);
    EXPECT_GE(x.energy_kwh, 0.0);
  }
}

TEST(Generate, SameSeedByteIdentical) {
  const auto a = render(generate(small_default(5, 0.1)));
  const auto b = render(generate(small_default(5, 0.1)));
  EXPECT_EQ(a.sessions_csv, b.sessions_csv);
  EXPECT_EQ(a.sites_csv, b.sites_csv);
  EXPECT_EQ(a.zsj_csv, b.zsj_csv);
  EXPECT_EQ(a.ground_truth_json, b.ground_truth_json);
  EXPECT_NE(a.sessions_csv, render(generate(small_default(6, 0.1))).sessions_csv);
}

TEST(Generate, ShockScalesMonthlyTotals) {
  for (double noise : {0.0, 0.1}) {
    auto base = small_default(8, noise);
    auto shocked = base;
    shocked.shocks.push_back({{make_date(2022, 2, 1), make_date(2022, 2, 28)}, 0.4});
    auto total_by_month = [](const Scenario& s) {
      std::map<int, double> m;
      for (const auto& x : s.sessions) m[month_of(x.start.date())] += x.energy_kwh;
      return m;
    };
    const auto a = total_by_month(generate(base));
    const auto b = total_by_month(generate(shocked));
    EXPECT_NEAR(b.at(1), a.at(1), 1e-9 * a.at(1));
    // The draw sequence is independent of the multiplier, so noise cancels too.
    EXPECT_NEAR(b.at(2), 0.4 * a.at(2), 1e-9 * a.at(2));
  }
}

TEST(Generate, ExpectedTotalMatchesAtZeroNoise) {
  auto c = small_default(9, 0.0);
  c.shocks.push_back({{make_date(2022, 1, 10), make_date(2022, 1, 16)}, 0.5});
  const auto s = generate(c);
  double total = 0;
  for (const auto& x : s.sessions) total += x.energy_kwh;
  EXPECT_NEAR(total, s.expected_total_kwh, 1e-9 * total);
}

TEST(Generate, NoiseHasUnitMean) {
  const auto clean = generate(small_default(10, 0.0));
  const auto noisy = generate(small_default(10, 0.3));
  double a = 0, b = 0;
  for (const auto& x : clean.sessions) a += x.energy_kwh;
  for (const auto& x : noisy.sessions) b += x.energy_kwh;
  EXPECT_NEAR(b / a, 1.0, 0.01);
}

TEST(Generate, RoundTripsWithZeroRejects) {
  const auto s = generate(small_default(11, 0.1));
  const auto f = render(s);
  const auto sessions = ingest::parse_sessions(f.sessions_csv);
  const auto sites = ingest::parse_sites(f.sites_csv);
  const auto units = ingest::parse_zsj(f.zsj_csv);
  EXPECT_TRUE(sessions.rejects.empty());
  EXPECT_TRUE(sites.rejects.empty());
  EXPECT_TRUE(units.rejects.empty());
  EXPECT_EQ(sessions.rows, s.sessions);
  const ingest::Registry reg(sites.rows, units.rows);
  EXPECT_TRUE(ingest::build_curves(sessions.rows, reg, ingest::GroupBy::Charger).rejects.empty());
}

TEST(Generate, NoiselessCurvesRecoverMixedShapes) {
  const auto s = generate(small_default(12, 0.0));
  const ingest::Registry reg(s.sites, s.units);
  const auto set = ingest::build_curves(s.sessions, reg, ingest::GroupBy::Charger);
  std::map<std::string, ingest::HourlyCurve> truth;
  for (const auto& t : s.truth) truth[t.station_id] = t.shape;
  ASSERT_EQ(set.curves.size(), s.truth.size());
  for (const auto& c : set.curves) EXPECT_GE(cosine_similarity(c.energy, truth.at(c.group)), 0.999) << c.group;
}

TEST(Generate, TruthLabelIsDominantArchetype) {
  const auto s = generate(default_scenario(13));
  ASSERT_EQ(s.truth.size(), 48u);
  for (const auto& t : s.truth) {
    const auto k = static_cast<std::size_t>(std::max_element(t.mixing.begin(), t.mixing.end()) - t.mixing.begin());
    EXPECT_EQ(static_cast<std::size_t>(t.label), k);
    EXPECT_NEAR(sum(t.shape), 1.0, 1e-12);
  }
}

TEST(ScenarioConfig, ValidationNamesTheRow) {
  auto c = default_scenario();
  c.mixing[3] = {0.5, 0.4, 0.0, 0.0};
  try {
    c.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Input);
    EXPECT_NE(std::string(e.what()).find("Separated residential area"), std::string::npos) << e.what();
  }
  c = default_scenario();
  c.dates = {make_date(2022, 1, 2), make_date(2022, 1, 1)};
  EXPECT_THROW(generate(c), Error);
}

TEST(ScenarioConfig, FromJson) {
  const auto c = scenario_from_json(nlohmann::json::parse(R"({
    "seed": 7, "start": "2021-06-01", "days": 30, "noise_cv": 0.0,
    "stations_per_category": 2,
    "mixing": {"Forest area": [0, 0, 1, 0]},
    "shocks": [{"from": "2021-06-10", "to": "2021-06-12", "multiplier": 0.5}],
    "archetypes": [{"name": "SustainedSinglePeak"}, {"name": "MorningSinglePeak"},
                   {"name": "EveningSinglePeak"}, {"name": "DoublePeak", "weekday_energy_kwh": 5}]
  })"));
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.dates.length(), 30);
  EXPECT_EQ(c.stations_per_category[0], 2u);
  EXPECT_EQ(c.mixing[index_of(ZsjCategory::Forest)], (MixingRow{0, 0, 1, 0}));
  EXPECT_EQ(c.shocks.size(), 1u);
  EXPECT_EQ(c.archetypes[3].weekday_energy_kwh, 5.0);
  EXPECT_THROW(scenario_from_json({{"sede", 1}}), Error);
  EXPECT_THROW(scenario_from_json({{"mixing", {{"Forest area", {0.5, 0.6, 0, 0}}}}}), Error);
}
