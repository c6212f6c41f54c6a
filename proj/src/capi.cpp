#include "antwsn/antwsn.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <fstream>
#include <memory>
#include <new>
#include <string>

#include "antwsn/harness.hpp"
#include "antwsn/scenario.hpp"
#include "antwsn/simulation.hpp"

struct antwsn_config {
  antwsn::ScenarioConfig cfg;
};

struct antwsn_run {
  std::unique_ptr<antwsn::Simulation> sim;
};

struct antwsn_plan {
  antwsn::ExperimentPlan plan;
};

struct antwsn_results {
  antwsn::ExperimentResults results;
};

namespace {

thread_local std::string g_last_error;

antwsn_status fail(antwsn_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Maps the exception in flight to a status.
antwsn_status translate() {
  try {
    throw;
  } catch (const antwsn::ConfigError& e) {
    return fail(ANTWSN_ERR_CONFIG, e.what());
  } catch (const antwsn::IoError& e) {
    return fail(ANTWSN_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(ANTWSN_ERR_SIMULATION, "out of memory");
  } catch (const std::invalid_argument& e) {
    return fail(ANTWSN_ERR_CONFIG, e.what());
  } catch (const std::exception& e) {
    return fail(ANTWSN_ERR_SIMULATION, e.what());
  } catch (...) {
    return fail(ANTWSN_ERR_SIMULATION, "unknown error");
  }
}

template <typename F>
antwsn_status guarded(F&& body) {
  try {
    return body();
  } catch (...) {
    return translate();
  }
}

antwsn_status copy_out(const std::string& text, char* buf, size_t cap, size_t* needed) {
  if (needed) *needed = text.size() + 1;
  if (buf == nullptr) {
    return needed ? ANTWSN_OK : fail(ANTWSN_ERR_ARGUMENT, "null buffer and no size query");
  }
  if (cap < text.size() + 1) return fail(ANTWSN_ERR_ARGUMENT, "buffer too small");
  std::memcpy(buf, text.c_str(), text.size() + 1);
  return ANTWSN_OK;
}

antwsn_status null_arg(const char* what) { return fail(ANTWSN_ERR_ARGUMENT, std::string("null ") + what); }

}  // namespace

extern "C" {

const char* antwsn_version(void) { return "0.1.0"; }

const char* antwsn_last_error(void) { return g_last_error.c_str(); }

antwsn_status antwsn_config_create(antwsn_config** out) {
  if (!out) return null_arg("output handle");
  return guarded([&] {
    *out = new antwsn_config{};
    return ANTWSN_OK;
  });
}

antwsn_status antwsn_config_load_file(antwsn_config* cfg, const char* path) {
  if (!cfg) return null_arg("config");
  if (!path) return null_arg("path");
  return guarded([&] {
    std::ifstream in(path);
    if (!in) throw antwsn::ConfigError(std::string("cannot open config file '") + path + "'");
    antwsn::ScenarioConfig layered = cfg->cfg;
    antwsn::parse_key_values(in, path, [&](std::string_view k, std::string_view v) {
      antwsn::apply_config_key(layered, k, v);
    });
    cfg->cfg = std::move(layered);
    return ANTWSN_OK;
  });
}

antwsn_status antwsn_config_set(antwsn_config* cfg, const char* key, const char* value) {
  if (!cfg) return null_arg("config");
  if (!key || !value) return null_arg("key or value");
  return guarded([&] {
    antwsn::apply_config_key(cfg->cfg, key, value);
    return ANTWSN_OK;
  });
}

antwsn_status antwsn_config_get(const antwsn_config* cfg, const char* key, char* buf, size_t cap, size_t* needed) {
  if (!cfg) return null_arg("config");
  if (!key) return null_arg("key");
  return guarded([&] { return copy_out(antwsn::config_value(cfg->cfg, key), buf, cap, needed); });
}

antwsn_status antwsn_config_dump(const antwsn_config* cfg, char* buf, size_t cap, size_t* needed) {
  if (!cfg) return null_arg("config");
  return guarded([&] { return copy_out(antwsn::dump_config(cfg->cfg), buf, cap, needed); });
}

void antwsn_config_destroy(antwsn_config* cfg) { delete cfg; }

antwsn_status antwsn_run_create(const antwsn_config* cfg, antwsn_run** out) {
  if (!cfg) return null_arg("config");
  if (!out) return null_arg("output handle");
  *out = nullptr;
  return guarded([&] {
    cfg->cfg.validate();
    auto run = std::make_unique<antwsn_run>();
    run->sim = std::make_unique<antwsn::Simulation>(cfg->cfg);
    *out = run.release();
    return ANTWSN_OK;
  });
}

antwsn_status antwsn_run_advance(antwsn_run* run, double t) {
  if (!run) return null_arg("run");
  if (t < run->sim->kernel().now()) return fail(ANTWSN_ERR_ARGUMENT, "cannot advance into the past");
  return guarded([&] {
    run->sim->run_until(t);
    return ANTWSN_OK;
  });
}

antwsn_status antwsn_run_execute(antwsn_run* run) {
  if (!run) return null_arg("run");
  return guarded([&] {
    run->sim->run();
    return ANTWSN_OK;
  });
}

antwsn_status antwsn_run_metrics(const antwsn_run* run, antwsn_metrics* out) {
  if (!run) return null_arg("run");
  if (!out) return null_arg("metrics");
  if (!run->sim->finished()) return fail(ANTWSN_ERR_ARGUMENT, "run has not finished");
  return guarded([&] {
    const auto m = antwsn::compute_metrics(run->sim->log());
    *out = antwsn_metrics{};
    out->generated = m.generated;
    out->delivered = m.delivered;
    out->has_latency = m.latency_s ? 1 : 0;
    out->latency_s = m.latency_s.value_or(0.0);
    out->success_rate_pct = m.success_rate_pct;
    out->energy_J = m.energy_total;
    out->efficiency_kbit_per_J = m.efficiency_kbit_per_J;
    out->alive_nodes = m.alive_nodes;
    out->conservation_error = antwsn::conservation_error(run->sim->log());
    return ANTWSN_OK;
  });
}

uint32_t antwsn_run_node_count(const antwsn_run* run) {
  return run ? static_cast<uint32_t>(run->sim->sensor_count()) : 0;
}

uint32_t antwsn_run_sink(const antwsn_run* run) { return run ? run->sim->sink() : 0; }

antwsn_status antwsn_run_dump_table(const antwsn_run* run, uint32_t node, char* buf, size_t cap, size_t* needed) {
  if (!run) return null_arg("run");
  if (node >= run->sim->network().size()) return fail(ANTWSN_ERR_ARGUMENT, "node " + std::to_string(node) + " out of range");
  return guarded([&] { return copy_out(run->sim->protocol().table(node).to_csv(), buf, cap, needed); });
}

antwsn_status antwsn_run_results(const antwsn_run* run, antwsn_results** out) {
  if (!run) return null_arg("run");
  if (!out) return null_arg("output handle");
  if (!run->sim->finished()) return fail(ANTWSN_ERR_ARGUMENT, "run has not finished");
  return guarded([&] {
    const auto& cfg = run->sim->config();
    antwsn::RunRecord rec;
    rec.key = {cfg.protocol, cfg.node_count, cfg.scenario};
    rec.seed = cfg.seed;
    rec.metrics = antwsn::compute_metrics(run->sim->log());
    rec.samples = run->sim->log().samples;
    rec.conservation_error = antwsn::conservation_error(run->sim->log());
    std::vector<antwsn::RunRecord> runs;
    runs.push_back(std::move(rec));
    *out = new antwsn_results{antwsn::assemble_results(std::move(runs))};
    return ANTWSN_OK;
  });
}

void antwsn_run_destroy(antwsn_run* run) { delete run; }

antwsn_status antwsn_plan_create(antwsn_plan** out) {
  if (!out) return null_arg("output handle");
  return guarded([&] {
    *out = new antwsn_plan{};
    return ANTWSN_OK;
  });
}

antwsn_status antwsn_plan_load_file(antwsn_plan* plan, const char* path) {
  if (!plan) return null_arg("plan");
  if (!path) return null_arg("path");
  return guarded([&] {
    antwsn::apply_plan_file(plan->plan, path);
    return ANTWSN_OK;
  });
}

antwsn_status antwsn_plan_set(antwsn_plan* plan, const char* key, const char* value) {
  if (!plan) return null_arg("plan");
  if (!key || !value) return null_arg("key or value");
  return guarded([&] {
    antwsn::apply_plan_key(plan->plan, key, value);
    return ANTWSN_OK;
  });
}

antwsn_status antwsn_plan_execute(const antwsn_plan* plan, antwsn_results** out) {
  if (!plan) return null_arg("plan");
  if (!out) return null_arg("output handle");
  *out = nullptr;
  return guarded([&] {
    *out = new antwsn_results{antwsn::run_experiment(plan->plan)};
    if ((*out)->results.failure_count() > 0) {
      const auto& runs = (*out)->results.runs;
      const auto it = std::find_if(runs.begin(), runs.end(), [](const auto& r) { return r.failed; });
      return fail(ANTWSN_ERR_SIMULATION, antwsn::cell_label(it->key) + " replicate " + std::to_string(it->replicate) +
                                             ": " + it->error);
    }
    return ANTWSN_OK;
  });
}

void antwsn_plan_destroy(antwsn_plan* plan) { delete plan; }

antwsn_status antwsn_results_export(const antwsn_results* results, const char* format, const char* path) {
  if (!results) return null_arg("results");
  if (!format || !path) return null_arg("format or path");
  const std::string f = format;
  if (f != "csv" && f != "json") return fail(ANTWSN_ERR_ARGUMENT, "format must be csv or json, got '" + f + "'");
  return guarded([&] {
    antwsn::export_results(results->results, f == "csv" ? antwsn::ResultFormat::Csv : antwsn::ResultFormat::Json,
                           path);
    return ANTWSN_OK;
  });
}

antwsn_status antwsn_results_write_summary(const antwsn_results* results, const char* path) {
  if (!results) return null_arg("results");
  if (!path) return null_arg("path");
  return guarded([&] {
    antwsn::write_text_file(path, antwsn::summary_to_csv(results->results.summaries));
    return ANTWSN_OK;
  });
}

antwsn_status antwsn_results_emit_plotdata(const antwsn_results* results, const char* dir, size_t* files_written) {
  if (!results) return null_arg("results");
  if (!dir) return null_arg("directory");
  return guarded([&] {
    const auto files = antwsn::emit_plotdata(results->results, dir);
    if (files_written) *files_written = files.size();
    return ANTWSN_OK;
  });
}

size_t antwsn_results_row_count(const antwsn_results* results) { return results ? results->results.rows.size() : 0; }

size_t antwsn_results_failure_count(const antwsn_results* results) {
  return results ? results->results.failure_count() : 0;
}

antwsn_status antwsn_results_failure(const antwsn_results* results, size_t index, char* buf, size_t cap,
                                     size_t* needed) {
  if (!results) return null_arg("results");
  std::size_t seen = 0;
  for (const auto& r : results->results.runs) {
    if (!r.failed) continue;
    if (seen++ == index) {
      return copy_out(antwsn::cell_label(r.key) + " replicate " + std::to_string(r.replicate) + ": " + r.error, buf,
                      cap, needed);
    }
  }
  return fail(ANTWSN_ERR_ARGUMENT, "failure index out of range");
}

void antwsn_results_destroy(antwsn_results* results) { delete results; }

}  // extern "C"
