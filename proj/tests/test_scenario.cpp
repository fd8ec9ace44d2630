#include "evprice/scenario.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace evprice;

namespace {

const char* kMinimal = R"({
  "horizon_hours": 1,
  "seed": 5,
  "stations": [{"id": 7, "level": "L3", "poles": 2, "capacity": 3, "service_rate": 1.5, "power": 50,
                "grid_price": 0.2, "price_cap": 0.8, "location": [1, 1]}],
  "demand": {"hourly_counts": [4]},
  "ev_distributions": {},
  "travel": {"mode": "euclidean", "speed_kmh": 60},
  "econ": {}
})";

std::string with(const std::string& from, const std::string& to)
{
  std::string text = kMinimal;
  text.replace(text.find(from), from.size(), to);
  return text;
}

std::string field_of(const std::string& text)
{
  try {
    parse_scenario(text);
  } catch (const ScenarioError& e) {
    return e.field();
  }
  return "<none>";
}

}  // namespace

TEST(Load, MinimalFile)
{
  const Scenario s = parse_scenario(kMinimal);
  ASSERT_EQ(s.stations.size(), 1u);
  EXPECT_EQ(s.stations[0].id, 7);
  EXPECT_EQ(s.stations[0].grid_price.size(), 1);
  EXPECT_EQ(s.econ.rejection_penalty, 30.0);
  EXPECT_EQ(s.choice.mode, ChoiceMode::MnlMsa);
}

TEST(Load, ValidationNamesTheField)
{
  EXPECT_EQ(field_of(with("\"capacity\": 3", "\"capacity\": 1")), "stations[0].capacity");
  EXPECT_EQ(field_of(with("\"poles\": 2", "\"poles\": 0")), "stations[0].poles");
  EXPECT_EQ(field_of(with("\"price_cap\": 0.8", "\"price_cap\": 0.1")), "stations[0].price_cap");
  EXPECT_EQ(field_of(with("\"hourly_counts\": [4]", "\"hourly_counts\": [4, 2]")), "demand.hourly_counts");
  EXPECT_EQ(field_of(with("\"horizon_hours\": 1,", "")), "horizon_hours");
}

TEST(Load, ParseErrorReportsLine)
{
  try {
    parse_scenario("{\n  \"horizon_hours\": 1,\n  oops\n}");
    FAIL() << "expected a parse error";
  } catch (const ScenarioError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Load, BundledSyntheticNetwork)
{
  const Scenario s = load_scenario(fixtures::scenario_path("suburban.json"));
  ASSERT_EQ(s.stations.size(), 22u);
  int l3 = 0;
  for (const auto& st : s.stations) l3 += st.level == ChargerLevel::L3;
  EXPECT_EQ(l3, 19);
  EXPECT_EQ(s.horizon_hours, 24);
  EXPECT_EQ(s.benchmarks.peak_hours.front(), 8);
  EXPECT_EQ(s.benchmarks.peak_hours.back(), 17);
}

TEST(Load, BundledDesk)
{
  const Scenario s = load_scenario(fixtures::scenario_path("desk.json"));
  EXPECT_GE(s.stations.size(), 5u);
  EXPECT_LE(s.stations.size(), 22u);
  int total = 0;
  for (int c : s.demand.hourly_counts) total += c;
  EXPECT_LE(total, 500);
  EXPECT_EQ(s.horizon_hours, 24);
}

TEST(Spawn, CountsAndDeterminism)
{
  Scenario s = fixtures::small_scenario(2, 12, 0);
  s.demand.hourly_counts[3] = 0;
  s.demand.hourly_counts[9] = 50;
  EXPECT_TRUE(spawn_evs(s, 3, 11).empty());
  const auto a = spawn_evs(s, 9, 11);
  const auto b = spawn_evs(s, 9, 11);
  ASSERT_EQ(a.size(), 50u);
  const std::set<double> allowed{0.0, 0.05, 0.15};
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].location, b[k].location);
    EXPECT_EQ(a[k].initial_soc, b[k].initial_soc);
    EXPECT_EQ(a[k].age_years, b[k].age_years);
    EXPECT_TRUE(allowed.count(a[k].risk_aversion));
    EXPECT_EQ(a[k].spawn_hour, 9);
    EXPECT_GE(a[k].initial_soc, s.ev_distributions.soc_min);
    EXPECT_LE(a[k].initial_soc, s.ev_distributions.soc_max);
  }
  EXPECT_NE(spawn_evs(s, 9, 12)[0].location, a[0].location);
}

TEST(Spawn, HotspotsStayInsideArea)
{
  Scenario s = fixtures::small_scenario(2, 1, 200);
  s.demand.hotspots.push_back({Point(9.5, 9.5), 1.0, 3.0});
  for (const auto& ev : spawn_evs(s, 0, 3)) {
    EXPECT_GE(ev.location.minCoeff(), 0.0);
    EXPECT_LE(ev.location.maxCoeff(), 10.0);
  }
}

TEST(Travel, Euclidean)
{
  const auto provider = TravelTimeProvider::euclidean(60.0);
  Station st = fixtures::make_station(1, ChargerLevel::L3, 1, 1, Point(30.0, 0.0), 1);
  EvAgent ev;
  ev.location = Point(0.0, 0.0);
  EXPECT_NEAR(travel_time(provider, ev, st, 0, 0), 0.5, 1e-15);
  ev.location = st.location;
  EXPECT_EQ(travel_time(provider, ev, st, 0, 0), 0.0);
  // Symmetric in endpoints.
  EXPECT_EQ(provider.hours(Point(1, 2), Point(4, 6), 0, 0), provider.hours(Point(4, 6), Point(1, 2), 0, 0));
}

TEST(Travel, MatrixLookup)
{
  Mat table = Mat::Constant(3, 9, 0.5);
  table(2, 7) = 0.25;
  table(0, 4) = std::numeric_limits<double>::quiet_NaN();
  const auto provider = TravelTimeProvider::matrix(30.0, Point(0, 0), 1.0, 3, 3, {table});
  Station st = fixtures::make_station(3, ChargerLevel::L3, 1, 1, Point(0, 0), 1);
  EvAgent ev;
  ev.location = Point(1.5, 2.5);  // column 1, row 2 -> cell 7
  EXPECT_EQ(provider.cell_of(ev.location), 7);
  EXPECT_EQ(travel_time(provider, ev, st, 2, 0), 0.25);
  ev.location = Point(1.5, 1.5);
  EXPECT_THROW(travel_time(provider, ev, st, 0, 0), LookupError);
  EXPECT_THROW(travel_time(provider, ev, st, 5, 0), LookupError);
}

TEST(Travel, MatrixFromFilePerHour)
{
  std::string text = kMinimal;
  const std::string from = R"("travel": {"mode": "euclidean", "speed_kmh": 60})";
  text.replace(text.find(from), from.size(),
               R"("travel": {"mode": "matrix", "speed_kmh": 60,
                  "grid": {"origin": [0, 0], "cell_size": 5, "cols": 2, "rows": 2},
                  "table": [[[0.1, 0.2, null, 0.4]]]})");
  const Scenario s = parse_scenario(text);
  EvAgent ev;
  ev.location = Point(6.0, 1.0);
  EXPECT_EQ(travel_time(s.travel, ev, s.stations[0], 0, 0), 0.2);
  ev.location = Point(1.0, 6.0);
  EXPECT_THROW(travel_time(s.travel, ev, s.stations[0], 0, 0), LookupError);
}
