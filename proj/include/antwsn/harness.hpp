#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "antwsn/protocol_params.hpp"
#include "antwsn/run_log.hpp"
#include "antwsn/scenario.hpp"

namespace antwsn {

struct RunMetrics {
  std::uint64_t generated = 0;
  std::uint64_t delivered = 0;
  double latency_sum = 0.0;
  std::vector<double> latencies;
  std::optional<double> latency_s;  // absent when nothing was delivered
  double success_rate_pct = 0.0;
  double energy_total = 0.0;  // J, spent by sensor nodes
  std::uint64_t delivered_bits = 0;
  double efficiency_kbit_per_J = 0.0;
  std::vector<double> per_node_residual;
  std::uint32_t alive_nodes = 0;
};

RunMetrics compute_metrics(const RunLog& log);

// Largest relative gap between sum(initial - residual) and the sum of the
// ledger categories over every node of the run.
double conservation_error(const RunLog& log);

struct CellKey {
  ProtocolKind protocol = ProtocolKind::IEEABR;
  std::uint32_t nodes = 0;
  ScenarioKind scenario = ScenarioKind::Static;
  auto operator<=>(const CellKey&) const = default;
};

std::string cell_label(const CellKey& key);

// Replicate seed shared by every protocol of a (nodes, scenario) cell so
// protocol comparisons see the same layouts and traffic.
std::uint64_t cell_seed(std::uint64_t base_seed, std::uint32_t nodes, ScenarioKind scenario, std::uint32_t replicate);

struct ExperimentPlan {
  std::vector<ProtocolKind> protocols{std::begin(kAllProtocols), std::end(kAllProtocols)};
  std::vector<std::uint32_t> node_counts{9, 16, 36, 49, 64, 100};
  std::vector<ScenarioKind> scenarios{ScenarioKind::Static};
  std::uint32_t replicates = 10;
  std::uint64_t base_seed = 1;
  std::uint32_t threads = 1;  // 0 uses every hardware thread
  ScenarioConfig base;        // everything not swept

  // Throws ConfigError.
  void validate() const;
};

// Plan keys (protocols, nodes, scenarios, replicates, seed, threads) plus
// any scenario config key, in the flat `key = value` format.
void apply_plan_key(ExperimentPlan& plan, std::string_view key, std::string_view value);
ExperimentPlan load_plan(std::istream& in, const std::string& origin = "<plan>");
ExperimentPlan load_plan_file(const std::string& path);
// Layers the keys of a plan or config file over `plan`.
void apply_plan_file(ExperimentPlan& plan, const std::string& path);

struct RunRecord {
  CellKey key;
  std::uint32_t replicate = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  RunMetrics metrics;
  std::vector<MetricSample> samples;
  double conservation_error = 0.0;
  std::uint64_t live_forward_peak = 0;
};

struct ResultRow {
  std::string run_id;
  std::string protocol;
  std::uint32_t nodes = 0;
  std::string scenario;
  std::string replicate;  // replicate index, or "mean" for the aggregate row
  std::optional<double> latency_s;
  double success_rate_pct = 0.0;
  double energy_J = 0.0;
  double efficiency_kbit_per_J = 0.0;

  bool operator==(const ResultRow&) const = default;
};

struct MetricStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single value
  std::size_t count = 0;
};

struct CellSummary {
  CellKey key;
  std::size_t runs = 0;
  std::size_t failed = 0;
  MetricStats latency_s;
  MetricStats success_rate_pct;
  MetricStats energy_J;
  MetricStats efficiency_kbit_per_J;
};

struct ExperimentResults {
  std::vector<RunRecord> runs;  // cell key order, then replicate
  std::vector<ResultRow> rows;  // replicate rows followed by the cell's mean row
  std::vector<CellSummary> summaries;

  std::size_t failure_count() const;
  const CellSummary* summary(const CellKey& key) const;
};

MetricStats stats_of(const std::vector<double>& values);

using RunFunction = std::function<RunRecord(const ScenarioConfig& cfg, const CellKey& key, std::uint32_t replicate)>;

// Simulates one configured scenario and collects its record; exceptions
// become a failed record.
RunRecord execute_run(const ScenarioConfig& cfg, const CellKey& key, std::uint32_t replicate);

// Every (protocol, nodes, scenario, replicate) cell, possibly in parallel;
// output order is independent of the thread count.
ExperimentResults run_experiment(const ExperimentPlan& plan);
ExperimentResults run_experiment(const ExperimentPlan& plan, const RunFunction& run);

// Builds rows and summaries from run records (already in cell order).
ExperimentResults assemble_results(std::vector<RunRecord> runs);

std::string format_number(double v);
std::string csv_escape(std::string_view field);
std::string results_to_csv(const std::vector<ResultRow>& rows);
std::string results_to_json(const std::vector<ResultRow>& rows);
std::vector<ResultRow> results_from_json(std::string_view json);
std::string summary_to_csv(const std::vector<CellSummary>& summaries);

enum class ResultFormat { Csv, Json };

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws IoError naming the file on failure.
void write_text_file(const std::filesystem::path& path, std::string_view text);
void export_results(const ExperimentResults& results, ResultFormat format, const std::filesystem::path& path);

// Two-column `<figure>_<protocol>.dat` files: metric vs node count per
// scenario, and metric vs time per (scenario, node count). Returns the
// written paths.
std::vector<std::filesystem::path> emit_plotdata(const ExperimentResults& results, const std::filesystem::path& dir);

}  // namespace antwsn
