#include "evprice/report.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace evprice::report {

using nlohmann::json;

std::string format_number(double value)
{
  if (!std::isfinite(value)) throw std::invalid_argument("cannot format a non-finite value");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  std::string s(buf);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

double rounded(double value)
{
  return std::stod(format_number(value));
}

std::size_t CsvTable::column(const std::string& name) const
{
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw std::out_of_range("no column " + name);
  return static_cast<std::size_t>(it - header.begin());
}

bool CsvTable::has_column(const std::string& name) const
{
  return std::find(header.begin(), header.end(), name) != header.end();
}

Vec CsvTable::numeric(const std::string& name) const
{
  const std::size_t c = column(name);
  Vec v(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) v(static_cast<Eigen::Index>(r)) = std::stod(rows[r].at(c));
  return v;
}

double CsvTable::sum(const std::string& name) const
{
  // Sequential left fold: the order matches the writer's.
  const Vec v = numeric(name);
  double total = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) total += v(i);
  return total;
}

std::string to_csv(const CsvTable& table)
{
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(table.header);
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) throw std::logic_error("csv row width differs from header");
    line(row);
  }
  return out;
}

CsvTable parse_csv(const std::string& text)
{
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    if (first) {
      table.header = std::move(cells);
      first = false;
    } else {
      if (cells.size() != table.header.size()) throw std::runtime_error("csv row width differs from header");
      table.rows.push_back(std::move(cells));
    }
  }
  if (first) throw std::runtime_error("csv has no header");
  return table;
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table)
{
  write_text(path, to_csv(table));
}

CsvTable read_csv(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

CsvTable hourly_table(const Scenario& scenario, const std::vector<HourOutcome>& hours)
{
  CsvTable t;
  t.header.push_back("hour");
  for (const char* field : {"price_", "lambda_", "wait_", "rejected_"})
    for (const auto& s : scenario.stations) t.header.push_back(field + std::to_string(s.id));
  for (const char* field : {"queue_penalty", "wait_loss", "rejection_loss", "rejected", "unserved", "arrivals",
                            "ev_utility", "cs_revenue", "pi"})
    t.header.push_back(field);

  for (const auto& h : hours) {
    std::vector<std::string> row{std::to_string(h.hour)};
    for (const Vec* v : {&h.prices, &h.equilibrium.arrival_rates, &h.equilibrium.waits, &h.equilibrium.rejected})
      for (Eigen::Index i = 0; i < v->size(); ++i) row.push_back(format_number((*v)(i)));
    const auto& e = h.economics;
    for (double x : {e.queue_penalty, e.wait_loss, e.rejection_loss, e.rejected, static_cast<double>(e.unserved),
                     h.equilibrium.arrival_rates.sum(), e.ev_utility_total, e.cs_revenue, e.performance_index})
      row.push_back(format_number(x));
    t.rows.push_back(std::move(row));
  }
  return t;
}

RunTotals totals_from(const CsvTable& hourly)
{
  RunTotals r;
  r.queue_penalty = hourly.sum("queue_penalty");
  r.wait_loss = hourly.sum("wait_loss");
  r.rejection_loss = hourly.sum("rejection_loss");
  r.ev_utility = hourly.sum("ev_utility");
  r.cs_revenue = hourly.sum("cs_revenue");
  r.pi = hourly.sum("pi");
  r.rejected = hourly.sum("rejected");
  r.unserved = hourly.sum("unserved");
  r.arrivals = hourly.sum("arrivals");
  return r;
}

std::vector<double> sampled_arrivals(const std::vector<HourOutcome>& hours, std::uint64_t seed)
{
  std::vector<double> counts;
  for (const auto& h : hours) {
    if (counts.empty()) counts.assign(static_cast<std::size_t>(h.equilibrium.probs.cols()), 0.0);
    const auto picks = sample_choices(h.equilibrium.probs, mix_seed(seed, 0x73616d70ULL, static_cast<std::uint64_t>(h.hour)));
    for (int p : picks)
      if (p >= 0) counts[static_cast<std::size_t>(p)] += 1.0;
  }
  return counts;
}

void write_totals(const std::filesystem::path& path, const Scenario& scenario, const TotalsDocument& doc)
{
  const auto& t = doc.totals;
  json j;
  j["metadata"] = {{"command", doc.metadata.command},
                   {"strategy", doc.metadata.strategy},
                   {"mode", doc.metadata.mode},
                   {"seed", doc.metadata.seed},
                   {"omega", doc.metadata.omega},
                   {"horizon_hours", scenario.horizon_hours},
                   {"stations", scenario.stations.size()}};
  j["totals"] = {{"queue_penalty", t.queue_penalty}, {"wait_loss", t.wait_loss},
                 {"rejection_loss", t.rejection_loss}, {"rejected", t.rejected},
                 {"unserved", t.unserved},           {"arrivals", t.arrivals},
                 {"ev_utility", t.ev_utility},       {"cs_revenue", t.cs_revenue},
                 {"pi", t.pi}};
  json sampled = json::object();
  for (std::size_t i = 0; i < doc.sampled_arrivals.size() && i < scenario.stations.size(); ++i)
    sampled[std::to_string(scenario.stations[i].id)] = doc.sampled_arrivals[i];
  j["sampled_arrivals"] = sampled;
  if (doc.optimized) {
    j["non_converged_windows"] = doc.non_converged_windows;
    j["price_audit"] = {{"evaluated", doc.audit.evaluated}, {"violations", doc.audit.violations}};
  }
  write_text(path, j.dump(2) + "\n");
}

void write_prices(const std::filesystem::path& path, const Scenario& scenario, const PriceSchedule& schedule)
{
  json j;
  j["hours"] = schedule.hours();
  j["stations"] = json::array();
  for (Eigen::Index i = 0; i < schedule.stations(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(schedule.hours()));
    for (Eigen::Index h = 0; h < schedule.hours(); ++h) row[static_cast<std::size_t>(h)] = schedule.prices(i, h);
    j["stations"].push_back({{"id", scenario.stations[static_cast<std::size_t>(i)].id}, {"prices", row}});
  }
  write_text(path, j.dump(2) + "\n");
}

PriceSchedule read_prices(const std::filesystem::path& path, const Scenario& scenario)
{
  std::ifstream in(path);
  if (!in) throw ScenarioError("prices", "cannot read " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ScenarioError("prices", e.what());
  }
  const auto n = static_cast<Eigen::Index>(scenario.stations.size());
  PriceSchedule s{Mat::Zero(n, scenario.horizon_hours)};
  if (!j.contains("stations") || !j["stations"].is_array() || j["stations"].size() != scenario.stations.size())
    throw ScenarioError("prices.stations", "expected one entry per scenario station");
  for (const auto& entry : j["stations"]) {
    const auto idx = scenario.index_of(entry.at("id").get<int>());
    if (!idx) throw ScenarioError("prices.stations", "unknown station id");
    const auto row = entry.at("prices").get<std::vector<double>>();
    if (static_cast<int>(row.size()) != scenario.horizon_hours)
      throw ScenarioError("prices.stations", "expected horizon_hours prices per station");
    for (std::size_t h = 0; h < row.size(); ++h)
      s.prices(static_cast<Eigen::Index>(*idx), static_cast<Eigen::Index>(h)) = row[h];
  }
  if (!within_bounds(s, scenario, 1e-9)) throw ScenarioError("prices", "schedule violates the price bounds");
  return s;
}

CsvTable trace_table(const std::vector<WindowResult>& windows)
{
  CsvTable t;
  t.header = {"window", "iteration", "best", "mean", "elite_min", "elite_max", "mean_sigma", "active_count"};
  for (const auto& w : windows)
    for (const auto& r : w.trace)
      t.rows.push_back({std::to_string(w.index), std::to_string(r.iteration), format_number(r.best),
                        format_number(r.mean), format_number(r.elite_min), format_number(r.elite_max),
                        format_number(r.mean_sigma), std::to_string(r.active_count)});
  return t;
}

std::string convergence_svg(const std::vector<WindowResult>& windows)
{
  const double width = 640, height = 360, pad = 48;
  double lo = 0.0, hi = 1.0;
  if (!windows.empty()) {
    lo = hi = windows.front().best_score;
    for (const auto& w : windows) {
      lo = std::min(lo, w.best_score);
      hi = std::max(hi, w.best_score);
    }
  }
  if (hi - lo < 1e-9) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double span_x = std::max<std::size_t>(windows.size(), 2) - 1;
  auto px = [&](std::size_t i) { return pad + (width - 2 * pad) * static_cast<double>(i) / span_x; };
  auto py = [&](double v) { return height - pad - (height - 2 * pad) * (v - lo) / (hi - lo); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << pad << "\" y1=\"" << height - pad << "\" x2=\"" << width - pad << "\" y2=\""
      << height - pad << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\"" << height - pad
      << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\">window</text>\n";
  svg << "<text x=\"12\" y=\"" << pad - 16 << "\">best F</text>\n";
  svg << "<text x=\"" << pad - 4 << "\" y=\"" << py(hi) << "\" text-anchor=\"end\" font-size=\"10\">"
      << format_number(hi) << "</text>\n";
  svg << "<text x=\"" << pad - 4 << "\" y=\"" << py(lo) << "\" text-anchor=\"end\" font-size=\"10\">"
      << format_number(lo) << "</text>\n";
  svg << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < windows.size(); ++i)
    svg << (i ? " " : "") << format_number(px(i)) << ',' << format_number(py(windows[i].best_score));
  svg << "\"/>\n</svg>\n";
  return svg.str();
}

std::string mode_name(ChoiceMode mode)
{
  switch (mode) {
    case ChoiceMode::DeterministicDc: return "dc";
    case ChoiceMode::MnlStandard: return "mnl";
    case ChoiceMode::MnlMsa: return "msa";
  }
  return "msa";
}

ChoiceMode parse_mode(const std::string& name)
{
  if (name == "dc") return ChoiceMode::DeterministicDc;
  if (name == "mnl") return ChoiceMode::MnlStandard;
  if (name == "msa") return ChoiceMode::MnlMsa;
  throw std::invalid_argument("unknown choice mode " + name);
}

}  // namespace evprice::report
