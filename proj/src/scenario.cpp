#include "evprice/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace evprice {

using nlohmann::json;

namespace {

std::string join(const std::string& base, const std::string& key)
{
  return base.empty() ? key : base + "." + key;
}

std::string join(const std::string& base, std::size_t index)
{
  return base + "[" + std::to_string(index) + "]";
}

const json& require(const json& node, const std::string& key, const std::string& path)
{
  if (!node.is_object()) throw ScenarioError(path, "expected an object");
  auto it = node.find(key);
  if (it == node.end()) throw ScenarioError(join(path, key), "missing required field");
  return *it;
}

double as_number(const json& node, const std::string& path)
{
  if (!node.is_number()) throw ScenarioError(path, "expected a number");
  return node.get<double>();
}

int as_int(const json& node, const std::string& path)
{
  if (!node.is_number_integer()) throw ScenarioError(path, "expected an integer");
  return node.get<int>();
}

double number_or(const json& node, const std::string& key, const std::string& path, double fallback)
{
  auto it = node.find(key);
  return it == node.end() ? fallback : as_number(*it, join(path, key));
}

int int_or(const json& node, const std::string& key, const std::string& path, int fallback)
{
  auto it = node.find(key);
  return it == node.end() ? fallback : as_int(*it, join(path, key));
}

Point as_point(const json& node, const std::string& path)
{
  if (!node.is_array() || node.size() != 2) throw ScenarioError(path, "expected [x, y]");
  return Point(as_number(node[0], join(path, 0)), as_number(node[1], join(path, 1)));
}

std::pair<double, double> as_range(const json& node, const std::string& path)
{
  if (!node.is_array() || node.size() != 2) throw ScenarioError(path, "expected [low, high]");
  return {as_number(node[0], join(path, 0)), as_number(node[1], join(path, 1))};
}

// A scalar broadcasts over the horizon; an array must match it.
Vec as_hourly(const json& node, int horizon, const std::string& path)
{
  if (node.is_number()) return Vec::Constant(horizon, node.get<double>());
  if (!node.is_array()) throw ScenarioError(path, "expected a number or an array of numbers");
  if (static_cast<int>(node.size()) != horizon)
    throw ScenarioError(path, "length " + std::to_string(node.size()) + " != horizon_hours " +
                                  std::to_string(horizon));
  Vec out(horizon);
  for (int h = 0; h < horizon; ++h) out(h) = as_number(node[h], join(path, h));
  return out;
}

ChargerLevel as_level(const json& node, const std::string& path)
{
  if (node == "L2") return ChargerLevel::L2;
  if (node == "L3") return ChargerLevel::L3;
  throw ScenarioError(path, "expected \"L2\" or \"L3\"");
}

ChoiceMode as_mode(const json& node, const std::string& path)
{
  if (node == "dc") return ChoiceMode::DeterministicDc;
  if (node == "mnl") return ChoiceMode::MnlStandard;
  if (node == "msa") return ChoiceMode::MnlMsa;
  throw ScenarioError(path, "expected \"dc\", \"mnl\" or \"msa\"");
}

Mat as_table(const json& node, std::size_t stations, const std::string& path)
{
  if (!node.is_array() || node.size() != stations)
    throw ScenarioError(path, "expected one row per station");
  std::size_t cells = 0;
  for (const auto& row : node) cells = std::max(cells, row.size());
  Mat table = Mat::Constant(static_cast<Eigen::Index>(stations), static_cast<Eigen::Index>(cells),
                            std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < stations; ++i) {
    const auto row_path = join(path, i);
    if (!node[i].is_array()) throw ScenarioError(row_path, "expected an array");
    for (std::size_t k = 0; k < node[i].size(); ++k) {
      if (node[i][k].is_null()) continue;
      table(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          as_number(node[i][k], join(row_path, k));
    }
  }
  return table;
}

Station parse_station(const json& node, int horizon, const std::string& path)
{
  Station s;
  s.id = as_int(require(node, "id", path), join(path, "id"));
  s.level = as_level(require(node, "level", path), join(path, "level"));
  s.poles = as_int(require(node, "poles", path), join(path, "poles"));
  s.capacity = as_int(require(node, "capacity", path), join(path, "capacity"));
  s.service_rate = as_number(require(node, "service_rate", path), join(path, "service_rate"));
  s.power = as_number(require(node, "power", path), join(path, "power"));
  s.grid_price = as_hourly(require(node, "grid_price", path), horizon, join(path, "grid_price"));
  s.price_cap = as_hourly(require(node, "price_cap", path), horizon, join(path, "price_cap"));
  s.location = as_point(require(node, "location", path), join(path, "location"));
  return s;
}

void parse_distributions(const json& node, EvDistributions& d, const std::string& path)
{
  if (auto it = node.find("initial_soc"); it != node.end())
    std::tie(d.soc_min, d.soc_max) = as_range(*it, join(path, "initial_soc"));
  d.battery_capacity = number_or(node, "battery_capacity", path, d.battery_capacity);
  d.consumption_rate = number_or(node, "consumption_rate", path, d.consumption_rate);
  if (auto it = node.find("age_years"); it != node.end())
    std::tie(d.age_min, d.age_max) = as_range(*it, join(path, "age_years"));
  if (auto it = node.find("risk_aversion"); it != node.end()) {
    const auto p = join(path, "risk_aversion");
    if (!it->is_array() || it->empty()) throw ScenarioError(p, "expected a non-empty array");
    d.risk_aversion.clear();
    for (std::size_t k = 0; k < it->size(); ++k) d.risk_aversion.push_back(as_number((*it)[k], join(p, k)));
  }
  d.degradation_rate = number_or(node, "degradation_rate", path, d.degradation_rate);
  if (auto it = node.find("charging"); it != node.end()) {
    const auto p = join(path, "charging");
    if (auto l3 = it->find("l3"); l3 != it->end()) {
      const auto lp = join(p, "l3");
      d.l3 = ChargingCurve<double>::l3(number_or(*l3, "a", lp, d.l3.a), number_or(*l3, "b", lp, d.l3.b),
                                       number_or(*l3, "c", lp, d.l3.c));
    }
    d.l2 = ChargingCurve<double>::l2(number_or(*it, "l2_rate", p, d.l2.rate));
    d.target_soc_l3 = number_or(*it, "target_soc_l3", p, d.target_soc_l3);
    d.target_soc_l2 = number_or(*it, "target_soc_l2", p, d.target_soc_l2);
  }
}

TravelTimeProvider parse_travel(const json& node, std::size_t stations, const std::string& path)
{
  const auto mode = require(node, "mode", path);
  const double speed = as_number(require(node, "speed_kmh", path), join(path, "speed_kmh"));
  if (mode == "euclidean") return TravelTimeProvider::euclidean(speed);
  if (mode != "matrix") throw ScenarioError(join(path, "mode"), "expected \"euclidean\" or \"matrix\"");

  const auto gp = join(path, "grid");
  const auto& grid = require(node, "grid", path);
  const Point origin = as_point(require(grid, "origin", gp), join(gp, "origin"));
  const double cell = as_number(require(grid, "cell_size", gp), join(gp, "cell_size"));
  const int cols = as_int(require(grid, "cols", gp), join(gp, "cols"));
  const int rows = as_int(require(grid, "rows", gp), join(gp, "rows"));

  const auto tp = join(path, "table");
  const auto& table = require(node, "table", path);
  std::vector<Mat> tables;
  // [station][cell] or [hour][station][cell]
  const bool per_hour = table.is_array() && !table.empty() && table[0].is_array() &&
                        !table[0].empty() && table[0][0].is_array();
  if (per_hour) {
    for (std::size_t h = 0; h < table.size(); ++h) tables.push_back(as_table(table[h], stations, join(tp, h)));
  } else {
    tables.push_back(as_table(table, stations, tp));
  }
  return TravelTimeProvider::matrix(speed, origin, cell, cols, rows, std::move(tables));
}

void parse_econ(const json& node, EconParams& e, const std::string& path)
{
  e.kappa = number_or(node, "kappa", path, e.kappa);
  e.vot = number_or(node, "vot", path, e.vot);
  e.rejection_penalty = number_or(node, "rejection_penalty", path, e.rejection_penalty);
  e.omega = number_or(node, "omega", path, e.omega);
  e.price_floor = number_or(node, "price_floor", path, e.price_floor);
  e.price_ceiling = number_or(node, "price_ceiling", path, e.price_ceiling);
}

void parse_choice(const json& node, ChoiceConfig& c, const std::string& path)
{
  if (auto it = node.find("mode"); it != node.end()) c.mode = as_mode(*it, join(path, "mode"));
  c.theta = number_or(node, "theta", path, c.theta);
  c.gumbel_scale = number_or(node, "gumbel_scale", path, c.gumbel_scale);
  c.msa_max_iters = int_or(node, "msa_max_iters", path, c.msa_max_iters);
  c.msa_tol = number_or(node, "msa_tol", path, c.msa_tol);
}

void parse_cem(const json& node, CemConfig& c, const std::string& path)
{
  c.population = int_or(node, "population", path, c.population);
  c.elite_ratio = number_or(node, "elite_ratio", path, c.elite_ratio);
  c.smoothing = number_or(node, "smoothing", path, c.smoothing);
  c.tolerance = number_or(node, "tolerance", path, c.tolerance);
  c.max_iters = int_or(node, "max_iters", path, c.max_iters);
  c.psa_threshold = number_or(node, "psa_threshold", path, c.psa_threshold);
  c.psa_frequency = int_or(node, "psa_frequency", path, c.psa_frequency);
  if (auto it = node.find("seed"); it != node.end()) c.seed = it->get<std::uint64_t>();
  c.sigma_max = number_or(node, "sigma_max", path, c.sigma_max);
  c.sigma_min = number_or(node, "sigma_min", path, c.sigma_min);
  c.window_hours = int_or(node, "window_hours", path, c.window_hours);
  if (auto it = node.find("warm_start"); it != node.end()) c.warm_start = it->get<bool>();
  if (auto it = node.find("psa_exact"); it != node.end()) c.psa_exact = it->get<bool>();
}

void parse_benchmarks(const json& node, BenchmarkConfig& b, const std::string& path)
{
  b.fixed_level = number_or(node, "fixed_level", path, b.fixed_level);
  b.tou_peak = number_or(node, "tou_peak", path, b.tou_peak);
  b.tou_offpeak = number_or(node, "tou_offpeak", path, b.tou_offpeak);
  if (auto it = node.find("peak_hours"); it != node.end()) {
    const auto p = join(path, "peak_hours");
    if (!it->is_array()) throw ScenarioError(p, "expected an array");
    b.peak_hours.clear();
    for (std::size_t k = 0; k < it->size(); ++k) b.peak_hours.push_back(as_int((*it)[k], join(p, k)));
  }
}

int line_of(const std::string& text, std::size_t byte)
{
  const auto end = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(end), '\n'));
}

}  // namespace

TravelTimeProvider TravelTimeProvider::euclidean(double speed_kmh)
{
  TravelTimeProvider p;
  p.mode_ = Mode::Euclidean;
  p.speed_kmh_ = speed_kmh;
  return p;
}

TravelTimeProvider TravelTimeProvider::matrix(double speed_kmh, Point origin, double cell_size, int cols,
                                              int rows, std::vector<Mat> tables)
{
  TravelTimeProvider p;
  p.mode_ = Mode::Matrix;
  p.speed_kmh_ = speed_kmh;
  p.origin_ = origin;
  p.cell_size_ = cell_size;
  p.cols_ = cols;
  p.rows_ = rows;
  p.tables_ = std::move(tables);
  return p;
}

int TravelTimeProvider::cell_of(const Point& location) const
{
  const Point rel = (location - origin_) / cell_size_;
  const int col = std::clamp(static_cast<int>(std::floor(rel.x())), 0, std::max(cols_ - 1, 0));
  const int row = std::clamp(static_cast<int>(std::floor(rel.y())), 0, std::max(rows_ - 1, 0));
  return row * cols_ + col;
}

double TravelTimeProvider::hours(const Point& from, const Point& station_location, std::size_t station_index,
                                 int hour) const
{
  if (mode_ == Mode::Euclidean) return (from - station_location).norm() / speed_kmh_;
  const Mat& table = tables_.size() == 1 ? tables_.front()
                                         : tables_.at(static_cast<std::size_t>(hour) % tables_.size());
  const int cell = cell_of(from);
  if (station_index >= static_cast<std::size_t>(table.rows()) || cell >= table.cols())
    throw LookupError("travel table has no entry for station " + std::to_string(station_index) + ", cell " +
                      std::to_string(cell));
  const double value = table(static_cast<Eigen::Index>(station_index), cell);
  if (std::isnan(value))
    throw LookupError("travel table cell missing for station " + std::to_string(station_index) + ", cell " +
                      std::to_string(cell));
  return value;
}

std::optional<std::size_t> Scenario::index_of(int station_id) const
{
  for (std::size_t i = 0; i < stations.size(); ++i)
    if (stations[i].id == station_id) return i;
  return std::nullopt;
}

Scenario parse_scenario(const std::string& text)
{
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError("", "parse error at line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
  }

  Scenario s;
  try {
    s.horizon_hours = as_int(require(doc, "horizon_hours", ""), "horizon_hours");
    if (s.horizon_hours < 1) throw ScenarioError("horizon_hours", "must be >= 1");
    s.seed = require(doc, "seed", "").get<std::uint64_t>();

    const auto& econ = require(doc, "econ", "");
    parse_econ(econ, s.econ, "econ");

    const auto& stations = require(doc, "stations", "");
    if (!stations.is_array()) throw ScenarioError("stations", "expected an array");
    for (std::size_t i = 0; i < stations.size(); ++i)
      s.stations.push_back(parse_station(stations[i], s.horizon_hours, join("stations", i)));

    const auto& demand = require(doc, "demand", "");
    const auto& counts = require(demand, "hourly_counts", "demand");
    if (!counts.is_array()) throw ScenarioError("demand.hourly_counts", "expected an array");
    for (std::size_t h = 0; h < counts.size(); ++h)
      s.demand.hourly_counts.push_back(as_int(counts[h], join("demand.hourly_counts", h)));
    if (auto it = demand.find("area"); it != demand.end()) {
      s.demand.area_min = as_point(require(*it, "min", "demand.area"), "demand.area.min");
      s.demand.area_max = as_point(require(*it, "max", "demand.area"), "demand.area.max");
    }
    if (auto it = demand.find("hotspots"); it != demand.end()) {
      for (std::size_t k = 0; k < it->size(); ++k) {
        const auto p = join("demand.hotspots", k);
        Hotspot spot;
        spot.center = as_point(require((*it)[k], "location", p), join(p, "location"));
        spot.weight = number_or((*it)[k], "weight", p, 1.0);
        spot.radius = number_or((*it)[k], "radius", p, 1.0);
        s.demand.hotspots.push_back(spot);
      }
    }

    parse_distributions(require(doc, "ev_distributions", ""), s.ev_distributions, "ev_distributions");
    s.travel = parse_travel(require(doc, "travel", ""), s.stations.size(), "travel");

    if (auto it = doc.find("choice"); it != doc.end()) parse_choice(*it, s.choice, "choice");
    if (auto it = doc.find("cem"); it != doc.end()) parse_cem(*it, s.cem, "cem");
    if (auto it = doc.find("benchmarks"); it != doc.end()) parse_benchmarks(*it, s.benchmarks, "benchmarks");
  } catch (const json::exception& e) {
    throw ScenarioError("", std::string("malformed scenario: ") + e.what());
  }

  validate(s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) throw ScenarioError("", "cannot open scenario file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

void validate(const Scenario& s)
{
  if (s.horizon_hours < 1) throw ScenarioError("horizon_hours", "must be >= 1");
  if (s.stations.empty()) throw ScenarioError("stations", "at least one station is required");

  std::set<int> ids;
  for (std::size_t i = 0; i < s.stations.size(); ++i) {
    const Station& st = s.stations[i];
    const auto p = join("stations", i);
    if (!ids.insert(st.id).second) throw ScenarioError(join(p, "id"), "duplicate station id");
    if (st.poles < 1) throw ScenarioError(join(p, "poles"), "must be >= 1");
    if (st.capacity < st.poles) throw ScenarioError(join(p, "capacity"), "must be >= poles");
    if (!(st.service_rate > 0)) throw ScenarioError(join(p, "service_rate"), "must be > 0");
    if (!(st.power > 0)) throw ScenarioError(join(p, "power"), "must be > 0");
    if (st.grid_price.size() != s.horizon_hours || st.price_cap.size() != s.horizon_hours)
      throw ScenarioError(join(p, "grid_price"), "must cover horizon_hours");
    for (int h = 0; h < s.horizon_hours; ++h) {
      if (!(st.grid_price(h) >= 0)) throw ScenarioError(join(p, "grid_price"), "must be >= 0");
      if (!(st.price_cap(h) > st.grid_price(h)))
        throw ScenarioError(join(p, "price_cap"), "must exceed grid_price at hour " + std::to_string(h));
      if (std::max(st.grid_price(h), s.econ.price_floor) > std::min(st.price_cap(h), s.econ.price_ceiling))
        throw ScenarioError(join(p, "price_cap"), "empty price interval at hour " + std::to_string(h));
    }
  }

  if (static_cast<int>(s.demand.hourly_counts.size()) != s.horizon_hours)
    throw ScenarioError("demand.hourly_counts", "length must equal horizon_hours");
  for (int c : s.demand.hourly_counts)
    if (c < 0) throw ScenarioError("demand.hourly_counts", "counts must be >= 0");
  if ((s.demand.area_max.array() < s.demand.area_min.array()).any())
    throw ScenarioError("demand.area", "max must be >= min");
  for (const auto& spot : s.demand.hotspots)
    if (!(spot.weight >= 0) || !(spot.radius >= 0))
      throw ScenarioError("demand.hotspots", "weight and radius must be >= 0");

  const auto& d = s.ev_distributions;
  if (!(0 <= d.soc_min && d.soc_min <= d.soc_max && d.soc_max <= 1))
    throw ScenarioError("ev_distributions.initial_soc", "must satisfy 0 <= low <= high <= 1");
  if (!(d.battery_capacity > 0)) throw ScenarioError("ev_distributions.battery_capacity", "must be > 0");
  if (!(d.consumption_rate > 0)) throw ScenarioError("ev_distributions.consumption_rate", "must be > 0");
  if (!(0 <= d.age_min && d.age_min <= d.age_max))
    throw ScenarioError("ev_distributions.age_years", "must satisfy 0 <= low <= high");
  for (double r : d.risk_aversion)
    if (!(0 <= r && r < 1)) throw ScenarioError("ev_distributions.risk_aversion", "values must lie in [0, 1)");
  if (!(d.degradation_rate >= 0)) throw ScenarioError("ev_distributions.degradation_rate", "must be >= 0");
  if (!d.l3.valid()) throw ScenarioError("ev_distributions.charging.l3", "coefficients must give a monotone curve");
  if (!d.l2.valid()) throw ScenarioError("ev_distributions.charging.l2_rate", "must be > 0");
  if (!(0 < d.target_soc_l3 && d.target_soc_l3 < 1))
    throw ScenarioError("ev_distributions.charging.target_soc_l3", "must lie in (0, 1)");
  if (!(0 < d.target_soc_l2 && d.target_soc_l2 <= 1))
    throw ScenarioError("ev_distributions.charging.target_soc_l2", "must lie in (0, 1]");

  if (!(s.travel.speed_kmh() > 0)) throw ScenarioError("travel.speed_kmh", "must be > 0");

  const auto& e = s.econ;
  if (!(0 <= e.omega && e.omega <= 1)) throw ScenarioError("econ.omega", "must lie in [0, 1]");
  if (!(e.price_floor <= e.price_ceiling)) throw ScenarioError("econ.price_floor", "must be <= price_ceiling");

  const auto& c = s.choice;
  if (!(c.theta > 0)) throw ScenarioError("choice.theta", "must be > 0");
  if (!(c.gumbel_scale >= 0)) throw ScenarioError("choice.gumbel_scale", "must be >= 0");
  if (!(c.msa_tol > 0)) throw ScenarioError("choice.msa_tol", "must be > 0");
  if (c.msa_max_iters < 1) throw ScenarioError("choice.msa_max_iters", "must be >= 1");

  const auto& m = s.cem;
  if (!(0 < m.elite_ratio && m.elite_ratio < 1)) throw ScenarioError("cem.elite_ratio", "must lie in (0, 1)");
  if (m.population < 1) throw ScenarioError("cem.population", "must be >= 1");
  if (!(0 <= m.smoothing && m.smoothing <= 1)) throw ScenarioError("cem.smoothing", "must lie in [0, 1]");
  if (m.max_iters < 1) throw ScenarioError("cem.max_iters", "must be >= 1");
  if (m.psa_frequency < 1) throw ScenarioError("cem.psa_frequency", "must be >= 1");
  if (m.window_hours < 1) throw ScenarioError("cem.window_hours", "must be >= 1");
  if (!(m.sigma_min > 0)) throw ScenarioError("cem.sigma_min", "must be > 0");
}

std::vector<EvAgent> spawn_evs(const Scenario& scenario, int hour, std::uint64_t rng_seed)
{
  if (hour < 0 || hour >= scenario.horizon_hours) throw std::out_of_range("hour outside the horizon");
  const int count = scenario.demand.hourly_counts[static_cast<std::size_t>(hour)];
  int first_id = 0;
  for (int h = 0; h < hour; ++h) first_id += scenario.demand.hourly_counts[static_cast<std::size_t>(h)];

  const auto& d = scenario.ev_distributions;
  const auto& demand = scenario.demand;
  std::mt19937_64 rng(mix_seed(rng_seed, 0x5ba3ULL, static_cast<std::uint64_t>(hour)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  std::vector<double> weights;
  for (const auto& spot : demand.hotspots) weights.push_back(spot.weight);
  const bool clustered =
      !weights.empty() && std::accumulate(weights.begin(), weights.end(), 0.0) > 0.0;

  std::vector<EvAgent> evs;
  evs.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    EvAgent ev;
    ev.id = first_id + k;
    ev.spawn_hour = hour;
    if (clustered) {
      std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
      const Hotspot& spot = demand.hotspots[pick(rng)];
      std::normal_distribution<double> scatter(0.0, 1.0);
      const Point offset(scatter(rng), scatter(rng));
      ev.location = (spot.center + spot.radius * offset).cwiseMax(demand.area_min).cwiseMin(demand.area_max);
    } else {
      ev.location = Point(uniform(demand.area_min.x(), demand.area_max.x()),
                          uniform(demand.area_min.y(), demand.area_max.y()));
    }
    ev.initial_soc = uniform(d.soc_min, d.soc_max);
    ev.battery_capacity = d.battery_capacity;
    ev.consumption_rate = d.consumption_rate;
    ev.age_years = uniform(d.age_min, d.age_max);
    std::uniform_int_distribution<std::size_t> risk(0, d.risk_aversion.size() - 1);
    ev.risk_aversion = d.risk_aversion[risk(rng)];
    ev.degradation_rate = d.degradation_rate;
    evs.push_back(ev);
  }
  return evs;
}

double travel_time(const TravelTimeProvider& provider, const EvAgent& ev, const Station& station,
                   std::size_t station_index, int hour)
{
  return provider.hours(ev.location, station.location, station_index, hour);
}

}  // namespace evprice
