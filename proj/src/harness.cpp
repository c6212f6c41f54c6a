#include "antwsn/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "antwsn/simulation.hpp"

namespace antwsn {

RunMetrics compute_metrics(const RunLog& log) {
  RunMetrics m;
  m.generated = log.generated;
  m.delivered = log.deliveries.size();
  m.latencies.reserve(log.deliveries.size());
  for (const auto& d : log.deliveries) {
    const double latency = d.delivered - d.generated;
    m.latencies.push_back(latency);
    m.latency_sum += latency;
  }
  if (m.delivered > 0) m.latency_s = m.latency_sum / static_cast<double>(m.delivered);
  m.success_rate_pct = m.generated == 0 ? 0.0 : 100.0 * static_cast<double>(m.delivered) / static_cast<double>(m.generated);
  for (const auto& l : log.ledgers) {
    m.energy_total += l.spent();
    m.per_node_residual.push_back(l.residual);
    if (!l.dead()) ++m.alive_nodes;
  }
  m.delivered_bits = m.delivered * log.data_bits;
  m.efficiency_kbit_per_J =
      m.energy_total > 0.0 ? (static_cast<double>(m.delivered_bits) / 1000.0) / m.energy_total : 0.0;
  return m;
}

double conservation_error(const RunLog& log) {
  double drawn = 0.0;
  double booked = 0.0;
  for (const auto& l : log.ledgers) {
    if (l.unlimited) continue;
    drawn += l.initial - l.residual;
    booked += l.spent_tx + l.spent_rx + l.spent_idle;
  }
  const double scale = std::max({std::abs(drawn), std::abs(booked), 1e-300});
  return std::abs(drawn - booked) / scale;
}

std::string cell_label(const CellKey& key) {
  return std::string(to_string(key.protocol)) + "-" + std::to_string(key.nodes) + "-" +
         std::string(to_string(key.scenario));
}

std::uint64_t cell_seed(std::uint64_t base_seed, std::uint32_t nodes, ScenarioKind scenario,
                        std::uint32_t replicate) {
  std::uint64_t h = splitmix64(base_seed);
  h = splitmix64(h ^ nodes);
  h = splitmix64(h ^ (static_cast<std::uint64_t>(scenario) + 1));
  return splitmix64(h ^ (static_cast<std::uint64_t>(replicate) << 20));
}

void ExperimentPlan::validate() const {
  if (protocols.empty()) throw ConfigError("plan needs at least one protocol");
  if (node_counts.empty()) throw ConfigError("plan needs at least one node count");
  if (scenarios.empty()) throw ConfigError("plan needs at least one scenario");
  if (replicates < 1) throw ConfigError("replicates must be >= 1");
  for (std::uint32_t n : node_counts) {
    ScenarioConfig cfg = base;
    cfg.node_count = n;
    for (ScenarioKind s : scenarios) {
      cfg.scenario = s;
      cfg.validate();
    }
  }
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_list(std::string_view value) {
  std::vector<std::string_view> out;
  while (!value.empty()) {
    const auto comma = value.find(',');
    const auto item = trim(value.substr(0, comma));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    value.remove_prefix(comma + 1);
  }
  return out;
}

template <typename T>
T parse_unsigned(std::string_view key, std::string_view text) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw ConfigError(std::string(key) + ": expected a non-negative integer, got '" + std::string(text) + "'");
  return v;
}

}  // namespace

void apply_plan_key(ExperimentPlan& plan, std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "protocols" || key == "protocol") {
    plan.protocols.clear();
    for (auto item : split_list(value)) {
      if (item == "all") {
        plan.protocols.assign(std::begin(kAllProtocols), std::end(kAllProtocols));
        continue;
      }
      const auto p = parse_protocol(item);
      if (!p) throw ConfigError(std::string(key) + ": unknown protocol '" + std::string(item) + "'");
      plan.protocols.push_back(*p);
    }
  } else if (key == "nodes") {
    plan.node_counts.clear();
    for (auto item : split_list(value)) plan.node_counts.push_back(parse_unsigned<std::uint32_t>(key, item));
  } else if (key == "scenarios" || key == "scenario") {
    plan.scenarios.clear();
    for (auto item : split_list(value)) {
      const auto s = parse_scenario_kind(item);
      if (!s) throw ConfigError(std::string(key) + ": unknown scenario '" + std::string(item) + "'");
      plan.scenarios.push_back(*s);
    }
  } else if (key == "replicates") {
    plan.replicates = parse_unsigned<std::uint32_t>(key, value);
  } else if (key == "seed") {
    plan.base_seed = parse_unsigned<std::uint64_t>(key, value);
  } else if (key == "threads") {
    plan.threads = parse_unsigned<std::uint32_t>(key, value);
  } else {
    apply_config_key(plan.base, key, value);
  }
}

ExperimentPlan load_plan(std::istream& in, const std::string& origin) {
  ExperimentPlan plan;
  parse_key_values(in, origin, [&](std::string_view k, std::string_view v) { apply_plan_key(plan, k, v); });
  return plan;
}

ExperimentPlan load_plan_file(const std::string& path) {
  ExperimentPlan plan;
  apply_plan_file(plan, path);
  return plan;
}

void apply_plan_file(ExperimentPlan& plan, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open plan file '" + path + "'");
  parse_key_values(in, path, [&](std::string_view k, std::string_view v) { apply_plan_key(plan, k, v); });
}

RunRecord execute_run(const ScenarioConfig& cfg, const CellKey& key, std::uint32_t replicate) {
  RunRecord rec;
  rec.key = key;
  rec.replicate = replicate;
  rec.seed = cfg.seed;
  try {
    Simulation sim(cfg);
    sim.run();
    rec.metrics = compute_metrics(sim.log());
    rec.samples = sim.log().samples;
    rec.conservation_error = conservation_error(sim.log());
    rec.live_forward_peak = sim.log().live_forward_peak;
  } catch (const std::exception& e) {
    rec.failed = true;
    rec.error = e.what();
  }
  return rec;
}

ExperimentResults run_experiment(const ExperimentPlan& plan) { return run_experiment(plan, execute_run); }

ExperimentResults run_experiment(const ExperimentPlan& plan, const RunFunction& run) {
  plan.validate();
  struct Job {
    CellKey key;
    std::uint32_t replicate;
  };
  std::set<CellKey> cells;
  for (ProtocolKind p : plan.protocols)
    for (std::uint32_t n : plan.node_counts)
      for (ScenarioKind s : plan.scenarios) cells.insert({p, n, s});
  std::vector<Job> jobs;
  for (const CellKey& key : cells)
    for (std::uint32_t r = 0; r < plan.replicates; ++r) jobs.push_back({key, r});

  std::vector<RunRecord> records(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const Job& job = jobs[i];
      ScenarioConfig cfg = plan.base;
      cfg.protocol = job.key.protocol;
      cfg.node_count = job.key.nodes;
      cfg.scenario = job.key.scenario;
      cfg.seed = cell_seed(plan.base_seed, job.key.nodes, job.key.scenario, job.replicate);
      records[i] = run(cfg, job.key, job.replicate);
    }
  };
  unsigned threads = plan.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : plan.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(jobs.size(), 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return assemble_results(std::move(records));
}

MetricStats stats_of(const std::vector<double>& values) {
  MetricStats s;
  s.count = values.size();
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

std::size_t ExperimentResults::failure_count() const {
  return static_cast<std::size_t>(std::count_if(runs.begin(), runs.end(), [](const RunRecord& r) { return r.failed; }));
}

const CellSummary* ExperimentResults::summary(const CellKey& key) const {
  const auto it = std::find_if(summaries.begin(), summaries.end(), [&](const CellSummary& s) { return s.key == key; });
  return it == summaries.end() ? nullptr : &*it;
}

ExperimentResults assemble_results(std::vector<RunRecord> runs) {
  ExperimentResults out;
  out.runs = std::move(runs);
  std::size_t i = 0;
  while (i < out.runs.size()) {
    const CellKey key = out.runs[i].key;
    CellSummary summary;
    summary.key = key;
    std::vector<double> latency, success, energy, efficiency;
    const std::string label = cell_label(key);
    for (; i < out.runs.size() && out.runs[i].key == key; ++i) {
      const RunRecord& rec = out.runs[i];
      ++summary.runs;
      if (rec.failed) {
        ++summary.failed;
        continue;
      }
      const RunMetrics& m = rec.metrics;
      ResultRow row;
      row.run_id = label + "-r" + std::to_string(rec.replicate);
      row.protocol = std::string(to_string(key.protocol));
      row.nodes = key.nodes;
      row.scenario = std::string(to_string(key.scenario));
      row.replicate = std::to_string(rec.replicate);
      row.latency_s = m.latency_s;
      row.success_rate_pct = m.success_rate_pct;
      row.energy_J = m.energy_total;
      row.efficiency_kbit_per_J = m.efficiency_kbit_per_J;
      out.rows.push_back(row);
      if (m.latency_s) latency.push_back(*m.latency_s);
      success.push_back(m.success_rate_pct);
      energy.push_back(m.energy_total);
      efficiency.push_back(m.efficiency_kbit_per_J);
    }
    summary.latency_s = stats_of(latency);
    summary.success_rate_pct = stats_of(success);
    summary.energy_J = stats_of(energy);
    summary.efficiency_kbit_per_J = stats_of(efficiency);
    if (summary.success_rate_pct.count > 0) {
      ResultRow mean;
      mean.run_id = label + "-mean";
      mean.protocol = std::string(to_string(key.protocol));
      mean.nodes = key.nodes;
      mean.scenario = std::string(to_string(key.scenario));
      mean.replicate = "mean";
      if (summary.latency_s.count > 0) mean.latency_s = summary.latency_s.mean;
      mean.success_rate_pct = summary.success_rate_pct.mean;
      mean.energy_J = summary.energy_J.mean;
      mean.efficiency_kbit_per_J = summary.efficiency_kbit_per_J.mean;
      out.rows.push_back(mean);
    }
    out.summaries.push_back(summary);
  }
  return out;
}

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

namespace {

constexpr const char* kColumns[] = {"run_id",   "protocol",         "nodes",    "scenario",
                                    "replicate", "latency_s",        "success_rate_pct",
                                    "energy_J", "efficiency_kbit_per_J"};

}  // namespace

std::string results_to_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  for (std::size_t i = 0; i < std::size(kColumns); ++i) out << (i ? "," : "") << kColumns[i];
  out << "\n";
  for (const auto& r : rows) {
    out << csv_escape(r.run_id) << ',' << csv_escape(r.protocol) << ',' << r.nodes << ',' << csv_escape(r.scenario)
        << ',' << csv_escape(r.replicate) << ',' << (r.latency_s ? format_number(*r.latency_s) : "") << ','
        << format_number(r.success_rate_pct) << ',' << format_number(r.energy_J) << ','
        << format_number(r.efficiency_kbit_per_J) << "\n";
  }
  return out.str();
}

std::string results_to_json(const std::vector<ResultRow>& rows) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json o;
    o["run_id"] = r.run_id;
    o["protocol"] = r.protocol;
    o["nodes"] = r.nodes;
    o["scenario"] = r.scenario;
    o["replicate"] = r.replicate;
    o["latency_s"] = r.latency_s ? nlohmann::ordered_json(*r.latency_s) : nlohmann::ordered_json(nullptr);
    o["success_rate_pct"] = r.success_rate_pct;
    o["energy_J"] = r.energy_J;
    o["efficiency_kbit_per_J"] = r.efficiency_kbit_per_J;
    doc.push_back(std::move(o));
  }
  return doc.dump(2) + "\n";
}

std::vector<ResultRow> results_from_json(std::string_view json) {
  const auto doc = nlohmann::json::parse(json);
  std::vector<ResultRow> rows;
  for (const auto& o : doc) {
    ResultRow r;
    r.run_id = o.at("run_id").get<std::string>();
    r.protocol = o.at("protocol").get<std::string>();
    r.nodes = o.at("nodes").get<std::uint32_t>();
    r.scenario = o.at("scenario").get<std::string>();
    r.replicate = o.at("replicate").get<std::string>();
    if (!o.at("latency_s").is_null()) r.latency_s = o.at("latency_s").get<double>();
    r.success_rate_pct = o.at("success_rate_pct").get<double>();
    r.energy_J = o.at("energy_J").get<double>();
    r.efficiency_kbit_per_J = o.at("efficiency_kbit_per_J").get<double>();
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string summary_to_csv(const std::vector<CellSummary>& summaries) {
  std::ostringstream out;
  out << "protocol,nodes,scenario,runs,failed,latency_s_mean,latency_s_stddev,success_rate_pct_mean,"
         "success_rate_pct_stddev,energy_J_mean,energy_J_stddev,efficiency_kbit_per_J_mean,"
         "efficiency_kbit_per_J_stddev\n";
  for (const auto& s : summaries) {
    out << to_string(s.key.protocol) << ',' << s.key.nodes << ',' << to_string(s.key.scenario) << ',' << s.runs << ','
        << s.failed << ',';
    if (s.latency_s.count > 0) {
      out << format_number(s.latency_s.mean) << ',' << format_number(s.latency_s.stddev);
    } else {
      out << ',';
    }
    for (const MetricStats* m : {&s.success_rate_pct, &s.energy_J, &s.efficiency_kbit_per_J})
      out << ',' << format_number(m->mean) << ',' << format_number(m->stddev);
    out << "\n";
  }
  return out.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void export_results(const ExperimentResults& results, ResultFormat format, const std::filesystem::path& path) {
  write_text_file(path, format == ResultFormat::Csv ? results_to_csv(results.rows) : results_to_json(results.rows));
}

namespace {

struct Series {
  std::string figure;
  std::string protocol;
  std::vector<std::pair<double, double>> points;
};

void write_series(const std::filesystem::path& dir, const Series& s, std::vector<std::filesystem::path>& written) {
  if (s.points.empty()) return;
  std::ostringstream out;
  for (const auto& [x, y] : s.points) out << format_number(x) << ' ' << format_number(y) << "\n";
  const auto path = dir / (s.figure + "_" + s.protocol + ".dat");
  write_text_file(path, out.str());
  written.push_back(path);
}

}  // namespace

std::vector<std::filesystem::path> emit_plotdata(const ExperimentResults& results, const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;

  // Metric vs node count, one panel per scenario and metric.
  std::map<std::pair<ScenarioKind, ProtocolKind>, std::vector<const CellSummary*>> by_series;
  for (const auto& s : results.summaries) by_series[{s.key.scenario, s.key.protocol}].push_back(&s);
  for (const auto& [sp, cells] : by_series) {
    const std::string scenario(to_string(sp.first));
    const std::string protocol(to_string(sp.second));
    Series latency{scenario + "_latency_vs_nodes", protocol, {}};
    Series success{scenario + "_success_vs_nodes", protocol, {}};
    Series energy{scenario + "_energy_vs_nodes", protocol, {}};
    Series efficiency{scenario + "_efficiency_vs_nodes", protocol, {}};
    for (const CellSummary* c : cells) {
      const double x = c->key.nodes;
      if (c->latency_s.count > 0) latency.points.emplace_back(x, c->latency_s.mean);
      if (c->success_rate_pct.count > 0) {
        success.points.emplace_back(x, c->success_rate_pct.mean);
        energy.points.emplace_back(x, c->energy_J.mean);
        efficiency.points.emplace_back(x, c->efficiency_kbit_per_J.mean);
      }
    }
    for (const Series* s : {&latency, &success, &energy, &efficiency}) write_series(dir, *s, written);
  }

  // Metric vs time, averaged over replicates sample by sample.
  std::map<CellKey, std::vector<const RunRecord*>> by_cell;
  for (const auto& r : results.runs) {
    if (!r.failed && !r.samples.empty()) by_cell[r.key].push_back(&r);
  }
  for (const auto& [key, runs] : by_cell) {
    const std::string prefix = std::string(to_string(key.scenario)) + "_n" + std::to_string(key.nodes);
    const std::string protocol(to_string(key.protocol));
    Series energy{prefix + "_energy_vs_time", protocol, {}};
    Series success{prefix + "_success_vs_time", protocol, {}};
    Series latency{prefix + "_latency_vs_time", protocol, {}};
    std::size_t len = runs.front()->samples.size();
    for (const RunRecord* r : runs) len = std::min(len, r->samples.size());
    for (std::size_t i = 0; i < len; ++i) {
      const double t = runs.front()->samples[i].time;
      double e = 0.0;
      double sr = 0.0;
      double lat = 0.0;
      std::size_t lat_n = 0;
      for (const RunRecord* r : runs) {
        const MetricSample& s = r->samples[i];
        e += s.energy;
        sr += s.generated == 0 ? 0.0 : 100.0 * static_cast<double>(s.delivered) / static_cast<double>(s.generated);
        if (s.delivered > 0) {
          lat += s.latency_sum / static_cast<double>(s.delivered);
          ++lat_n;
        }
      }
      const double n = static_cast<double>(runs.size());
      energy.points.emplace_back(t, e / n);
      success.points.emplace_back(t, sr / n);
      if (lat_n > 0) latency.points.emplace_back(t, lat / static_cast<double>(lat_n));
    }
    for (const Series* s : {&energy, &success, &latency}) write_series(dir, *s, written);
  }
  return written;
}

}  // namespace antwsn
