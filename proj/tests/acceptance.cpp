// Acceptance gate: prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "antwsn/harness.hpp"
#include "antwsn/protocols.hpp"
#include "antwsn/simulation.hpp"
#include "test_support.hpp"

using namespace antwsn;
using testing_support::Gen;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (ok) return;
    pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

int g_failures = 0;

void report(int number, const std::string& name, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!out.pass) ++g_failures;
  std::printf("[%s] %d %s (%.1f s)%s%s\n", out.pass ? "PASS" : "FAIL", number, name.c_str(), secs,
              out.detail.empty() ? "" : ": ", out.detail.c_str());
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Normalization under random update sequences
// ---------------------------------------------------------------------------

Outcome normalization_suite() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  const int sequences = 10000;
  double worst = 0.0;
  std::uint64_t checks = 0;
  auto check = [&](const std::vector<double>& c) {
    const double err = std::abs(testing_support::column_sum(c) - 1.0);
    worst = std::max(worst, err);
    ++checks;
  };

  for (ProtocolKind kind : kAllProtocols) {
    Gen g(1000 + static_cast<std::uint64_t>(kind));
    for (int s = 0; s < sequences; ++s) {
      std::size_t n = 1 + g.index(12);
      std::vector<double> column;
      // Initial column as each protocol builds it.
      if (kind == ProtocolKind::SC) {
        std::vector<double> q(n);
        std::vector<double> c(n);
        for (std::size_t i = 0; i < n; ++i) {
          q[i] = g.real(0.0, 20.0);
          c[i] = g.real(0.5, 1.5);
        }
        column = sc_initialize(q, c, g.real(0.0, 4.0));
      } else if (kind == ProtocolKind::IEEABR) {
        const bool adjacent = g.integer(0, 1) == 1;
        column = ieeabr_init_tables(n, adjacent ? std::optional<std::size_t>(g.index(n)) : std::nullopt);
      } else {
        column.assign(n, 1.0 / static_cast<double>(n));
      }
      check(column);

      const int steps = static_cast<int>(g.integer(1, 30));
      for (int k = 0; k < steps; ++k) {
        const bool reinforcing = kind != ProtocolKind::EEABR && kind != ProtocolKind::IEEABR;
        if (reinforcing && g.integer(0, 4) != 0) {
          babr_reinforce(column, g.index(column.size()), g.unit());
        } else if (column.size() > 1) {
          const std::size_t lost = g.index(column.size());
          const bool ok = kind == ProtocolKind::IEEABR ? ieeabr_link_failure(column, lost)
                                                       : uniform_link_failure(column, lost);
          if (ok) column.erase(column.begin() + static_cast<std::ptrdiff_t>(lost));
        } else {
          continue;
        }
        check(column);
      }
    }
  }
  const double secs = seconds_since(t0);
  out.require(worst <= 1e-9, "max column error " + fmt(worst));
  out.require(secs < 10.0, "took " + fmt(secs) + " s, budget 10 s");
  out.detail = out.detail.empty() ? std::to_string(checks) + " column checks, max |sum-1| " + fmt(worst) : out.detail;
  return out;
}

// ---------------------------------------------------------------------------
// 2. Closed-form identities
// ---------------------------------------------------------------------------

struct Rational {
  __int128 num = 0;
  __int128 den = 1;

  static __int128 gcd(__int128 a, __int128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
      const __int128 t = a % b;
      a = b;
      b = t;
    }
    return a;
  }
  Rational reduced() const {
    const __int128 g = gcd(num, den);
    Rational r{num / g, den / g};
    if (r.den < 0) {
      r.num = -r.num;
      r.den = -r.den;
    }
    return r;
  }
  friend Rational operator+(Rational a, Rational b) { return Rational{a.num * b.den + b.num * a.den, a.den * b.den}.reduced(); }
  friend Rational operator-(Rational a, Rational b) { return Rational{a.num * b.den - b.num * a.den, a.den * b.den}.reduced(); }
  friend Rational operator*(Rational a, Rational b) { return Rational{a.num * b.num, a.den * b.den}.reduced(); }
  friend Rational operator/(Rational a, Rational b) { return Rational{a.num * b.den, a.den * b.num}.reduced(); }
  bool is_one() const { return num == den; }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

Outcome closed_form_identities() {
  Outcome out;
  for (long long n = 1; n <= 50; ++n) {
    const long long lhs = (9 * n - 5) + (n - 1) * (4 * n - 5);
    out.require(lhs == 4 * n * n, "identity fails at N=" + std::to_string(n));
  }

  Gen g(2024);
  const int columns = 1000;
  double worst_double = 0.0;
  for (int i = 0; i < columns; ++i) {
    const std::size_t n = 2 + g.index(15);
    std::vector<long long> w(n);
    for (auto& x : w) x = g.integer(0, 4) == 0 ? 0 : g.integer(1, 1000);
    const std::size_t lost = g.index(n);
    long long total = std::accumulate(w.begin(), w.end(), 0LL);
    if (total == w[lost]) {
      // Keep some mass on a surviving row.
      w[(lost + 1) % n] += 1;
      total += 1;
    }
    std::vector<Rational> p(n);
    for (std::size_t k = 0; k < n; ++k) p[k] = Rational{w[k], total}.reduced();
    const Rational one{1, 1};
    const Rational z = p[lost] / (one - p[lost]);
    Rational sum{0, 1};
    std::vector<Rational> after(n);
    for (std::size_t k = 0; k < n; ++k) {
      if (k == lost) continue;
      after[k] = p[k] * (one + z);
      sum = sum + after[k];
    }
    out.require(sum.is_one(), "rational redistribution does not sum to 1 for column " + std::to_string(i));

    std::vector<double> d(n);
    for (std::size_t k = 0; k < n; ++k) d[k] = p[k].value();
    if (!ieeabr_link_failure(d, lost)) {
      out.require(false, "implementation refused a redistributable column");
      continue;
    }
    for (std::size_t k = 0; k < n; ++k)
      if (k != lost) worst_double = std::max(worst_double, std::abs(d[k] - after[k].value()));
  }
  out.require(worst_double < 1e-12, "floating redistribution deviates by " + fmt(worst_double));
  if (out.pass) out.detail = "N in [1,50] exact; 1000 rational columns sum to 1; float deviation " + fmt(worst_double);
  return out;
}

// ---------------------------------------------------------------------------
// 3. Next-hop oracle on a small instance
// ---------------------------------------------------------------------------

Outcome oracle_equivalence() {
  Outcome out;
  // Node 0 decides among neighbors 1, 2 and 3 (the other three nodes).
  const double c = 30.0;
  ProtocolParams params;
  params.initial_energy = c;
  params.alpha = 1.0;
  params.beta = 1.0;
  RoutingTable table(TableMode::Pheromone);
  for (NodeId nb : {1u, 2u, 3u}) table.add_neighbor(nb, 0.0);
  const NodeId sink = 3;
  table.set_column(sink, {0.5, 0.3, 0.2});
  const std::map<NodeId, double> energy{{1, 12.0}, {2, 24.0}, {3, c}};

  struct Case {
    std::string name;
    std::vector<NodeId> memory;
  };
  const std::vector<Case> cases{{"fresh ant", {0}}, {"ant remembering node 2", {2, 0}}};
  double worst_tv = 0.0;
  for (const Case& k : cases) {
    Ant ant;
    ant.memory_limit = 2;
    for (NodeId m : k.memory) ant.visit(m, 0.0, 20.0);

    // Direct normalization: tau * 1/(C - e), excluding remembered nodes; the
    // full-battery sink is floored at epsilon * C.
    std::map<NodeId, double> weight;
    double total = 0.0;
    for (NodeId nb : table.neighbors()) {
      if (std::find(k.memory.begin(), k.memory.end(), nb) != k.memory.end()) continue;
      const double gap = std::max(c - energy.at(nb), params.visibility_epsilon * c);
      weight[nb] = table.value(nb, sink) * (1.0 / gap);
      total += weight[nb];
    }

    RandomStream rng(77, StreamId::Protocol);
    const int draws = 100000;
    std::map<NodeId, int> counts;
    for (int i = 0; i < draws; ++i) {
      const auto next = eeabr_select_next(table, sink, ant, [&](NodeId s) { return energy.at(s); }, params, rng);
      if (!next) {
        out.require(false, k.name + ": no next hop");
        break;
      }
      ++counts[*next];
    }
    double tv = 0.0;
    for (NodeId nb : table.neighbors()) {
      const double expected = weight.count(nb) ? weight[nb] / total : 0.0;
      const double seen = static_cast<double>(counts[nb]) / draws;
      tv += std::abs(expected - seen);
    }
    tv *= 0.5;
    worst_tv = std::max(worst_tv, tv);
    out.require(tv < 0.01, k.name + ": TV distance " + fmt(tv));
  }

  double previous = std::numeric_limits<double>::infinity();
  bool monotone = true;
  for (int nj = 1; nj <= 20; ++nj) {
    const double d = eeabr_delta_tau(c, 20.0, 25.0, nj, 1.0);
    monotone = monotone && d < previous;
    previous = d;
  }
  out.require(monotone, "delta tau not strictly decreasing over N_j = 1..20");
  if (out.pass) out.detail = "max TV " + fmt(worst_tv) + " over 1e5 draws; delta tau decreasing";
  return out;
}

// ---------------------------------------------------------------------------
// 4. Live-ant cap
// ---------------------------------------------------------------------------

Outcome congestion_cap() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  ScenarioConfig cfg;
  cfg.protocol = ProtocolKind::IEEABR;
  cfg.node_count = 49;
  Simulation sim(cfg);
  std::uint64_t peak = 0;
  std::uint64_t events = 0;
  std::uint64_t violations = 0;
  const std::uint64_t cap = 5ULL * 49;
  sim.kernel().set_trace_hook([&](const SimEvent&) {
    const std::uint64_t live = sim.protocol().live_forward_ants();
    peak = std::max(peak, live);
    ++events;
    if (live > cap) ++violations;
  });
  sim.run();
  // The state after the last event is checked as well.
  peak = std::max(peak, sim.protocol().live_forward_ants());
  const double secs = seconds_since(t0);
  out.require(violations == 0 && peak <= cap, "peak " + std::to_string(peak) + " > " + std::to_string(cap));
  out.require(secs < 60.0, "took " + fmt(secs) + " s, budget 60 s");
  if (out.pass)
    out.detail = "peak " + std::to_string(peak) + " <= " + std::to_string(cap) + " over " + std::to_string(events) +
                 " events, " + std::to_string(sim.log().deferred_launches) + " launches deferred";
  return out;
}

// ---------------------------------------------------------------------------
// 5. Loop destruction
// ---------------------------------------------------------------------------

Outcome loop_destruction() {
  Outcome out;
  int destroyed = 0;
  int trials = 0;
  for (ProtocolKind kind : {ProtocolKind::EEABR, ProtocolKind::IEEABR}) {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      ScenarioConfig cfg = testing_support::quiet_config(kind);
      cfg.seed = seed;
      cfg.duration = 10.0;
      cfg.traffic_rate = 1e-9;  // first event lands far past the end
      cfg.proto.ant_interval = 1e9;
      Simulation sim(cfg, testing_support::ring_with_isolated_sink());
      int fates = 0;
      bool within_lap = false;
      sim.protocol().set_ant_observer([&](const Ant& ant, NodeId, AntFate fate) {
        ++fates;
        within_lap = fate == AntFate::LoopDestroyed && ant.hops <= 4;
      });
      sim.protocol().launch_forward_ant(static_cast<NodeId>(seed % 4));
      sim.run();
      ++trials;
      if (fates == 1 && within_lap && sim.protocol().live_forward_ants() == 0) ++destroyed;
    }
  }
  out.require(destroyed == trials, std::to_string(destroyed) + "/" + std::to_string(trials) + " destroyed");
  if (out.pass) out.detail = std::to_string(destroyed) + "/" + std::to_string(trials) + " trials (100 per energy-aware protocol)";
  return out;
}

// ---------------------------------------------------------------------------
// 6, 7, 9. Directional comparisons and conservation
// ---------------------------------------------------------------------------

ExperimentResults g_static;
ExperimentResults g_static_large;
ExperimentResults g_dynamic;

ExperimentPlan comparison_plan(std::vector<ProtocolKind> protocols, std::uint32_t nodes, ScenarioKind scenario) {
  ExperimentPlan plan;
  plan.protocols = std::move(protocols);
  plan.node_counts = {nodes};
  plan.scenarios = {scenario};
  plan.replicates = 10;
  plan.base_seed = 1;
  plan.threads = 0;
  plan.base.duration = 100.0;
  return plan;
}

const CellSummary& cell(const ExperimentResults& r, ProtocolKind p, std::uint32_t n, ScenarioKind s) {
  const CellSummary* c = r.summary({p, n, s});
  if (c == nullptr) throw std::runtime_error("missing cell " + cell_label({p, n, s}));
  return *c;
}

Outcome static_comparison() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  g_static = run_experiment(comparison_plan({std::begin(kAllProtocols), std::end(kAllProtocols)}, 49,
                                            ScenarioKind::Static));
  g_static_large = run_experiment(comparison_plan({ProtocolKind::FP, ProtocolKind::IEEABR}, 100, ScenarioKind::Static));
  out.require(g_static.failure_count() + g_static_large.failure_count() == 0, "some runs failed");

  const auto s = ScenarioKind::Static;
  const double e_eeabr = cell(g_static, ProtocolKind::EEABR, 49, s).energy_J.mean;
  const double e_ieeabr = cell(g_static, ProtocolKind::IEEABR, 49, s).energy_J.mean;
  const double ratio_a = e_eeabr / e_ieeabr;
  out.require(ratio_a >= 1.10, "(a) EEABR/IEEABR energy " + fmt(ratio_a) + " < 1.10");

  const double fp_success = cell(g_static, ProtocolKind::FP, 49, s).success_rate_pct.mean;
  for (ProtocolKind p : kAllProtocols) {
    const double other = cell(g_static, p, 49, s).success_rate_pct.mean;
    out.require(fp_success >= other, "(b) FP success " + fmt(fp_success) + "% < " + std::string(to_string(p)) + " " +
                                         fmt(other) + "%");
  }

  const double fp_large = cell(g_static_large, ProtocolKind::FP, 100, s).energy_J.mean;
  const double ieeabr_large = cell(g_static_large, ProtocolKind::IEEABR, 100, s).energy_J.mean;
  const double ratio_c = fp_large / ieeabr_large;
  out.require(ratio_c >= 5.0, "(c) FP/IEEABR energy at 100 nodes " + fmt(ratio_c) + " < 5");

  const auto& babr = cell(g_static, ProtocolKind::BABR, 49, s).latency_s;
  const auto& ieeabr = cell(g_static, ProtocolKind::IEEABR, 49, s).latency_s;
  out.require(babr.count > 0 && ieeabr.count > 0, "(d) latency undefined");
  out.require(babr.mean >= ieeabr.mean, "(d) BABR latency " + fmt(babr.mean) + " s < IEEABR " + fmt(ieeabr.mean) + " s");

  const double secs = seconds_since(t0);
  out.require(secs < 900.0, "took " + fmt(secs) + " s, budget 900 s");
  if (out.pass)
    out.detail = "(a) energy ratio " + fmt(ratio_a) + " (b) FP success " + fmt(fp_success) + "% (c) 100-node ratio " +
                 fmt(ratio_c) + " (d) latency " + fmt(babr.mean) + " s vs " + fmt(ieeabr.mean) + " s";
  return out;
}

Outcome dynamic_comparison() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  g_dynamic = run_experiment(comparison_plan({ProtocolKind::EEABR, ProtocolKind::IEEABR}, 49, ScenarioKind::Dynamic));
  out.require(g_dynamic.failure_count() == 0, "some runs failed");
  const auto d = ScenarioKind::Dynamic;
  const auto& eeabr = cell(g_dynamic, ProtocolKind::EEABR, 49, d);
  const auto& ieeabr = cell(g_dynamic, ProtocolKind::IEEABR, 49, d);
  const double gap = 1.0 - ieeabr.energy_J.mean / eeabr.energy_J.mean;
  out.require(gap >= 0.05, "IEEABR energy only " + fmt(100.0 * gap) + "% below EEABR");
  out.require(ieeabr.efficiency_kbit_per_J.mean > eeabr.efficiency_kbit_per_J.mean,
              "IEEABR efficiency " + fmt(ieeabr.efficiency_kbit_per_J.mean) + " <= EEABR " +
                  fmt(eeabr.efficiency_kbit_per_J.mean));
  const double secs = seconds_since(t0);
  out.require(secs < 900.0, "took " + fmt(secs) + " s, budget 900 s");
  if (out.pass)
    out.detail = "energy " + fmt(ieeabr.energy_J.mean) + " J vs " + fmt(eeabr.energy_J.mean) + " J (" +
                 fmt(100.0 * gap) + "% less), efficiency " + fmt(ieeabr.efficiency_kbit_per_J.mean) + " vs " +
                 fmt(eeabr.efficiency_kbit_per_J.mean) + " kbit/J";
  return out;
}

Outcome energy_conservation() {
  Outcome out;
  std::size_t runs = 0;
  double worst = 0.0;
  for (const ExperimentResults* r : {&g_static, &g_static_large, &g_dynamic}) {
    for (const RunRecord& rec : r->runs) {
      if (rec.failed) continue;
      ++runs;
      worst = std::max(worst, rec.conservation_error);
    }
  }
  out.require(runs == 6 * 10 + 2 * 10 + 2 * 10, "expected 100 runs from the comparisons, saw " + std::to_string(runs));
  out.require(worst <= 1e-9, "worst relative error " + fmt(worst));
  if (out.pass) out.detail = std::to_string(runs) + " runs, worst relative error " + fmt(worst);
  return out;
}

// ---------------------------------------------------------------------------
// 8. Determinism
// ---------------------------------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism(const std::string& cli, const std::filesystem::path& work) {
  Outcome out;
  std::filesystem::remove_all(work);
  std::filesystem::create_directories(work);
  const std::filesystem::path plan = work / "plan.cfg";
  {
    std::ofstream f(plan);
    f << "protocols = babr, fp, ieeabr\nnodes = 9, 16\nscenarios = static, dynamic\nreplicates = 2\n"
         "seed = 7\nduration = 30\n";
  }
  auto sweep = [&](const std::string& name, int threads) {
    const auto dir = work / name;
    const std::string cmd = "\"" + cli + "\" sweep \"" + plan.string() + "\" -j " + std::to_string(threads) +
                            " -f csv -o \"" + dir.string() + "\" > \"" + (work / (name + ".log")).string() + "\" 2>&1";
    const int rc = std::system(cmd.c_str());
    out.require(rc == 0, name + " exited with " + std::to_string(rc));
    return slurp(dir / "results.csv");
  };
  const std::string first = sweep("serial_a", 1);
  const std::string second = sweep("serial_b", 1);
  const std::string parallel = sweep("parallel", 4);
  out.require(!first.empty() && first.find('\n') != first.rfind('\n'), "empty results");
  out.require(first == second, "two serial invocations differ");
  out.require(first == parallel, "serial and parallel invocations differ");

  ExperimentPlan in_process = load_plan_file(plan.string());
  in_process.threads = 1;
  const auto serial = run_experiment(in_process);
  in_process.threads = 3;
  const auto threaded = run_experiment(in_process);
  out.require(results_to_csv(serial.rows) == results_to_csv(threaded.rows), "in-process serial and threaded differ");
  out.require(results_to_csv(serial.rows) == first, "in-process CSV differs from the CLI output");
  if (out.pass)
    out.detail = "3 CLI sweeps (1, 1, 4 threads) and 2 in-process runs byte-identical, " +
                 std::to_string(serial.rows.size()) + " rows";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks for the ant-routing simulator"};
  std::string cli;
  std::string work = "acceptance_work";
  app.add_option("--cli", cli, "Path to the antwsn command-line tool")->required();
  app.add_option("--work", work, "Scratch directory");
  CLI11_PARSE(app, argc, argv);

  report(1, "normalization suite", normalization_suite);
  report(2, "closed-form identities", closed_form_identities);
  report(3, "oracle equivalence on a small instance", oracle_equivalence);
  report(4, "live forward-ant cap", congestion_cap);
  report(5, "loop destruction on a ring", loop_destruction);
  report(6, "static comparison", static_comparison);
  report(7, "dynamic comparison", dynamic_comparison);
  report(8, "determinism", [&] { return determinism(cli, work); });
  report(9, "energy conservation", energy_conservation);

  std::printf("%d of 9 criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
