// Command-line front end: solves a scenario, runs Monte Carlo variability
// or first-order sensitivity analysis, exports the MILP, or validates a
// scenario file. All outputs are plain CSV/JSON data files written with
// LF endings and shortest round-trip decimals, so repeated runs with the
// same flags and seed are byte-identical regardless of --jobs.
//
// Exit codes: 0 success, 1 input error, 2 infeasible model (including a
// sampled share of infeasible realizations above the limit), 3 internal
// invariant violation.
#include <fmt/format.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "piroute/lp_export.hpp"
#include "piroute/montecarlo.hpp"
#include "piroute/pi_gsa.hpp"
#include "piroute/sampling.hpp"
#include "piroute/scenario.hpp"
#include "piroute/solver.hpp"

namespace fs = std::filesystem;
using namespace piroute;
using ojson = nlohmann::ordered_json;

namespace {

// Shortest decimal that parses back to the same double.
std::string num(double v) {
  if (v == 0.0) return "0";  // normalize -0
  return fmt::format("{}", v);
}

std::string hhmm(Minutes m) {
  return fmt::format("{}:{:02}", m / 60, m % 60);
}

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::invalid_argument(
        fmt::format("cannot write output file '{}'", path.string()));
  }
  out << body;
  if (!out) {
    throw std::invalid_argument(
        fmt::format("failed writing output file '{}'", path.string()));
  }
}

std::string json_body(const ojson& j) { return j.dump(2) + "\n"; }

constexpr const char* kKpiNames[4] = {"J1", "J2", "J3", "J4"};

// ---------------------------------------------------------------------
// Shared settings resolved from flags plus the scenario's experiment block.

struct Args {
  std::string scenario_path;
  std::string objective;  // J*/C* spelling, empty = scenario default
  bool all_configs = false;
  std::optional<int> samples;
  std::optional<std::int64_t> seed;
  std::optional<int> harmonics;
  std::string mode = "all";
  std::string out_dir = ".";
  std::string format = "csv";
  int jobs = 1;
  bool per_module_destinations = false;
  bool separate_counts = false;
};

struct Settings {
  Scenario sc;
  std::vector<Objective> objectives;
  bool all_configs = false;
  int samples = 0;
  std::uint64_t seed = 0;
  int harmonics = 0;
  int jobs = 1;
  SamplingPlan plan;
  fs::path out;
  bool json = false;
  SolverOptions solver;
  bool separate_counts = false;
};

SamplingPlan parse_mode(const std::string& mode) {
  SamplingPlan plan;
  if (mode == "all") {
    plan.mode = SamplingMode::AllVary;
  } else if (mode == "modules-only") {
    plan.mode = SamplingMode::OnlyModuleCounts;
  } else if (mode.rfind("one-hub:", 0) == 0) {
    plan.mode = SamplingMode::OnlyOneHub;
    plan.hub_id = mode.substr(8);
    if (plan.hub_id.empty()) {
      throw std::invalid_argument("--mode one-hub: needs a hub id");
    }
  } else {
    throw std::invalid_argument(fmt::format(
        "unknown --mode '{}'; use all, modules-only, or one-hub:<id>", mode));
  }
  return plan;
}

Settings resolve(const Args& args) {
  Settings s;
  s.sc = load_scenario_file(args.scenario_path);
  if (args.all_configs) {
    if (!args.objective.empty()) {
      throw std::invalid_argument(
          "--all-configs and --objective/--config are mutually exclusive");
    }
    s.objectives = {Objective::J1, Objective::J2, Objective::J3,
                    Objective::J4};
    s.all_configs = true;
  } else if (!args.objective.empty()) {
    s.objectives = {objective_from(args.objective)};
  } else {
    s.objectives = {s.sc.experiment.objective};
  }
  s.samples = args.samples.value_or(s.sc.experiment.sample_count);
  s.seed = args.seed ? static_cast<std::uint64_t>(*args.seed)
                     : s.sc.experiment.seed;
  s.harmonics = args.harmonics.value_or(s.sc.experiment.harmonics);
  s.jobs = args.jobs;
  s.plan = parse_mode(args.mode);
  s.out = args.out_dir;
  if (args.format != "csv" && args.format != "json") {
    throw std::invalid_argument(
        fmt::format("unknown --format '{}'; use csv or json", args.format));
  }
  s.json = args.format == "json";
  s.solver.per_module_destinations = args.per_module_destinations;
  s.separate_counts = args.separate_counts;
  fs::create_directories(s.out);
  return s;
}

// With --all-configs every configuration gets its own deterministic
// sub-seed so the four runs draw independent samples.
std::uint64_t config_seed(const Settings& s, Objective o) {
  if (!s.all_configs) return s.seed;
  return mix64(s.seed, stream_id("config:" + config_name(o)), 0);
}

// ---------------------------------------------------------------------
// solve

void write_routing(const Settings& s, Objective o,
                   const AssignmentSolution& sol) {
  const std::vector<ModuleRef> order = module_order(s.sc.network);
  const fs::path base = s.out / fmt::format("routing_{}", config_name(o));
  if (s.json) {
    ojson rows = ojson::array();
    for (std::size_t m = 0; m < order.size(); ++m) {
      const Itinerary& it = sol.choices[m];
      const Shipment& sh = *s.sc.network.find_shipment(order[m].shipment);
      ojson row;
      row["shipment"] = order[m].shipment;
      row["module"] = order[m].module + 1;
      row["volume_liters"] =
          sh.module_volumes[static_cast<std::size_t>(order[m].module)];
      row["route"] = to_string(it.kind);
      row["hub"] = it.hub;
      row["destination"] = it.destination;
      row["legs"] = it.kind == RouteKind::Direct ? it.leg1
                                                 : it.leg1 + "+" + it.leg2;
      row["delivery_min"] = it.delivery_time;
      row["delivery_time"] = hhmm(it.delivery_time);
      rows.push_back(std::move(row));
    }
    write_file(base.string() + ".json", json_body(rows));
    return;
  }
  std::string csv =
      "shipment,module,volume_liters,route,hub,destination,legs,"
      "delivery_min,delivery_time\n";
  for (std::size_t m = 0; m < order.size(); ++m) {
    const Itinerary& it = sol.choices[m];
    const Shipment& sh = *s.sc.network.find_shipment(order[m].shipment);
    csv += fmt::format(
        "{},{},{},{},{},{},{},{},{}\n", order[m].shipment,
        order[m].module + 1,
        sh.module_volumes[static_cast<std::size_t>(order[m].module)],
        to_string(it.kind), it.hub, it.destination,
        it.kind == RouteKind::Direct ? it.leg1 : it.leg1 + "+" + it.leg2,
        it.delivery_time, hhmm(it.delivery_time));
  }
  write_file(base.string() + ".csv", csv);
}

void write_kpis(const Settings& s, Objective o,
                const AssignmentSolution& sol) {
  const fs::path base = s.out / fmt::format("kpis_{}", config_name(o));
  const bool ok = sol.status == SolveStatus::Optimal;
  const std::array<double, 4> values = sol.kpis.values();
  if (s.json) {
    ojson j;
    j["config"] = config_name(o);
    j["objective"] = to_string(o);
    j["status"] = to_string(sol.status);
    if (ok) {
      j["objective_value"] = sol.objective_value;
      for (int k = 0; k < 4; ++k) {
        j[fmt::format("kpi{}", k + 1)] = values[static_cast<std::size_t>(k)];
      }
    }
    write_file(base.string() + ".json", json_body(j));
    return;
  }
  std::string csv = "field,value\n";
  csv += fmt::format("config,{}\n", config_name(o));
  csv += fmt::format("objective,{}\n", to_string(o));
  csv += fmt::format("status,{}\n", to_string(sol.status));
  if (ok) {
    csv += fmt::format("objective_value,{}\n", num(sol.objective_value));
    for (int k = 0; k < 4; ++k) {
      csv += fmt::format("kpi{},{}\n", k + 1,
                         num(values[static_cast<std::size_t>(k)]));
    }
  }
  write_file(base.string() + ".csv", csv);
}

void write_modal_split(const Settings& s, Objective o,
                       const AssignmentSolution& sol) {
  const ModalSplit split = modal_split(sol, s.sc.network);
  const fs::path base = s.out / fmt::format("modal_split_{}", config_name(o));
  const std::pair<const char*, double> pct_fields[] = {
      {"direct_pct", split.direct_pct},
      {"truck_to_hub_pct", split.truck_to_hub_pct},
      {"train_to_hub_pct", split.train_to_hub_pct},
      {"hub_truck_in_pct", split.hub_truck_in_pct},
      {"hub_train_in_pct", split.hub_train_in_pct},
      {"hub_truck_out_pct", split.hub_truck_out_pct},
      {"hub_train_out_pct", split.hub_train_out_pct},
  };
  if (s.json) {
    ojson j;
    j["config"] = config_name(o);
    j["total_modules"] = split.total_modules;
    j["via_hub_modules"] = split.via_hub_modules;
    for (const auto& [name, value] : pct_fields) j[name] = value;
    write_file(base.string() + ".json", json_body(j));
    return;
  }
  std::string csv = "field,value\n";
  csv += fmt::format("config,{}\n", config_name(o));
  csv += fmt::format("total_modules,{}\n", split.total_modules);
  csv += fmt::format("via_hub_modules,{}\n", split.via_hub_modules);
  for (const auto& [name, value] : pct_fields) {
    csv += fmt::format("{},{}\n", name, num(value));
  }
  write_file(base.string() + ".csv", csv);
}

int cmd_solve(const Settings& s) {
  bool any_infeasible = false;
  for (Objective o : s.objectives) {
    const AssignmentSolution sol =
        solve_exact(s.sc.network, o, {}, s.solver);
    write_kpis(s, o, sol);
    if (sol.status != SolveStatus::Optimal) {
      fmt::print(stderr, "{}: no feasible assignment\n", config_name(o));
      any_infeasible = true;
      continue;
    }
    write_routing(s, o, sol);
    write_modal_split(s, o, sol);
    fmt::print("{}: {} = {} (kpis {} {} {} {})\n", config_name(o),
               to_string(o), num(sol.objective_value), num(sol.kpis.values()[0]),
               num(sol.kpis.values()[1]), num(sol.kpis.values()[2]),
               num(sol.kpis.values()[3]));
  }
  return any_infeasible ? 2 : 0;
}

// ---------------------------------------------------------------------
// variability

int cmd_variability(const Settings& s) {
  if (s.samples < 2) {
    throw std::invalid_argument(
        "variability needs --samples of at least 2 to estimate a variance");
  }
  for (Objective o : s.objectives) {
    const std::uint64_t seed = config_seed(s, o);
    const MonteCarloResult mc =
        run_monte_carlo(s.sc, o, s.plan, s.samples, seed, s.jobs, s.solver);

    const fs::path samples_base =
        s.out / fmt::format("samples_{}", config_name(o));
    if (s.json) {
      ojson rows = ojson::array();
      for (const SampleRow& row : mc.rows) {
        ojson r;
        r["sample_index"] = row.sample_index;
        r["status"] = to_string(row.status);
        if (row.status == SolveStatus::Optimal) {
          const std::array<double, 4> v = row.kpis.values();
          for (int k = 0; k < 4; ++k) {
            r[fmt::format("kpi{}", k + 1)] = v[static_cast<std::size_t>(k)];
          }
        }
        rows.push_back(std::move(r));
      }
      write_file(samples_base.string() + ".json", json_body(rows));
    } else {
      std::string csv = "sample_index,kpi1,kpi2,kpi3,kpi4,status\n";
      for (const SampleRow& row : mc.rows) {
        if (row.status == SolveStatus::Optimal) {
          const std::array<double, 4> v = row.kpis.values();
          csv += fmt::format("{},{},{},{},{},{}\n", row.sample_index,
                             num(v[0]), num(v[1]), num(v[2]), num(v[3]),
                             to_string(row.status));
        } else {
          csv += fmt::format("{},,,,,{}\n", row.sample_index,
                             to_string(row.status));
        }
      }
      write_file(samples_base.string() + ".csv", csv);
    }

    const VariabilityReport report = variability_report(mc);
    const fs::path report_base =
        s.out / fmt::format("variability_{}", config_name(o));
    if (s.json) {
      ojson j;
      j["config"] = config_name(o);
      j["total_samples"] = report.total_samples;
      j["feasible_samples"] = report.feasible_samples;
      ojson kpis = ojson::array();
      for (int k = 0; k < 4; ++k) {
        const KpiStats& st = report.kpis[static_cast<std::size_t>(k)];
        ojson e;
        e["kpi"] = kKpiNames[k];
        e["mean"] = st.mean;
        e["variance"] = st.variance;
        if (st.rel_std) {
          e["rel_std"] = *st.rel_std;
        } else {
          e["rel_std"] = nullptr;
        }
        kpis.push_back(std::move(e));
      }
      j["kpis"] = std::move(kpis);
      write_file(report_base.string() + ".json", json_body(j));
    } else {
      std::string csv =
          "kpi,mean,variance,rel_std,feasible_samples,total_samples\n";
      for (int k = 0; k < 4; ++k) {
        const KpiStats& st = report.kpis[static_cast<std::size_t>(k)];
        csv += fmt::format("{},{},{},{},{},{}\n", kKpiNames[k], num(st.mean),
                           num(st.variance),
                           st.rel_std ? num(*st.rel_std) : "",
                           report.feasible_samples, report.total_samples);
      }
      write_file(report_base.string() + ".csv", csv);
    }
    fmt::print("{}: {} of {} samples feasible\n", config_name(o),
               report.feasible_samples, report.total_samples);
  }
  return 0;
}

// ---------------------------------------------------------------------
// gsa

int cmd_gsa(const Settings& s) {
  GsaOptions gopt;
  gopt.harmonics = s.harmonics;
  gopt.separate_count_factors = s.separate_counts;
  gopt.jobs = s.jobs;
  for (Objective o : s.objectives) {
    const std::uint64_t seed = config_seed(s, o);
    const SensitivityRun run =
        pi_sensitivity_run(s.sc, o, s.samples, seed, gopt);
    const std::string config = config_name(o);

    // Flat index table, one row per (input, KPI).
    if (s.json) {
      ojson rows = ojson::array();
      for (std::size_t f = 0; f < run.factors.size(); ++f) {
        for (int k = 0; k < 4; ++k) {
          ojson r;
          r["input"] = run.factors[f].name;
          r["kpi"] = kKpiNames[k];
          r["index"] = run.clipped[f][static_cast<std::size_t>(k)];
          r["n"] = run.sample_count;
          r["config"] = config;
          rows.push_back(std::move(r));
        }
      }
      write_file((s.out / fmt::format("indices_{}.json", config)).string(),
                 json_body(rows));
    } else {
      std::string csv = "input,kpi,index,n,config\n";
      for (std::size_t f = 0; f < run.factors.size(); ++f) {
        for (int k = 0; k < 4; ++k) {
          csv += fmt::format(
              "{},{},{},{},{}\n", run.factors[f].name, kKpiNames[k],
              num(run.clipped[f][static_cast<std::size_t>(k)]),
              run.sample_count, config);
        }
      }
      write_file((s.out / fmt::format("indices_{}.csv", config)).string(),
                 csv);
    }

    // Radar document: inputs in factor order, raw and clipped matrices.
    ojson radar;
    radar["config"] = config;
    radar["objective"] = to_string(o);
    radar["samples"] = run.sample_count;
    radar["harmonics"] = run.harmonics;
    radar["model_runs"] = run.model_runs;
    radar["imputed_samples"] = run.imputed_samples;
    ojson inputs = ojson::array();
    for (const GsaFactor& f : run.factors) inputs.push_back(f.name);
    radar["inputs"] = std::move(inputs);
    radar["kpis"] = ojson::array({"J1", "J2", "J3", "J4"});
    ojson clipped = ojson::array();
    ojson raw = ojson::array();
    for (std::size_t f = 0; f < run.factors.size(); ++f) {
      clipped.push_back(std::vector<double>(run.clipped[f].begin(),
                                            run.clipped[f].end()));
      raw.push_back(
          std::vector<double>(run.raw[f].begin(), run.raw[f].end()));
    }
    radar["clipped"] = std::move(clipped);
    radar["raw"] = std::move(raw);
    radar["total_variance"] = std::vector<double>(run.total_variance.begin(),
                                                  run.total_variance.end());
    write_file((s.out / fmt::format("radar_{}.json", config)).string(),
               json_body(radar));

    // Convergence trace at every checkpoint.
    if (s.json) {
      ojson rows = ojson::array();
      for (const GsaCheckpoint& cp : run.trace) {
        for (std::size_t f = 0; f < run.factors.size(); ++f) {
          for (int k = 0; k < 4; ++k) {
            ojson r;
            r["input"] = run.factors[f].name;
            r["kpi"] = kKpiNames[k];
            r["n"] = cp.samples;
            r["index"] = cp.clipped[f][static_cast<std::size_t>(k)];
            r["config"] = config;
            rows.push_back(std::move(r));
          }
        }
      }
      write_file(
          (s.out / fmt::format("convergence_{}.json", config)).string(),
          json_body(rows));
    } else {
      std::string csv = "input,kpi,n,index,config\n";
      for (const GsaCheckpoint& cp : run.trace) {
        for (std::size_t f = 0; f < run.factors.size(); ++f) {
          for (int k = 0; k < 4; ++k) {
            csv += fmt::format(
                "{},{},{},{},{}\n", run.factors[f].name, kKpiNames[k],
                cp.samples, num(cp.clipped[f][static_cast<std::size_t>(k)]),
                config);
          }
        }
      }
      write_file(
          (s.out / fmt::format("convergence_{}.csv", config)).string(), csv);
    }
    fmt::print("{}: {} samples, {} imputed, {} factors\n", config,
               run.sample_count, run.imputed_samples, run.factors.size());
  }
  return 0;
}

// ---------------------------------------------------------------------
// export-lp and validate

int cmd_export_lp(const Settings& s) {
  for (Objective o : s.objectives) {
    const std::string lp = export_lp(s.sc.network, o, {}, s.solver);
    const fs::path path = s.out / fmt::format("model_{}.lp", config_name(o));
    write_file(path, lp);
    fmt::print("{}: wrote {}\n", config_name(o), path.string());
  }
  return 0;
}

int cmd_validate(const Args& args) {
  const Scenario sc = load_scenario_file(args.scenario_path);
  fmt::print("scenario OK: {} nodes, {} services, {} shipments\n",
             sc.network.nodes.size(), sc.network.services.size(),
             sc.network.shipments.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Physical Internet module routing: exact assignment, Monte Carlo "
      "variability, and first-order sensitivity analysis"};
  app.require_subcommand(1);

  Args args;
  auto add_common = [&](CLI::App* cmd, bool sampling) {
    cmd->add_option("--scenario", args.scenario_path, "Scenario JSON file")
        ->required();
    cmd->add_option("--objective,--config", args.objective,
                    "Objective J1..J4 or configuration C1..C4 "
                    "(default: the scenario's experiment block)");
    cmd->add_option("--out", args.out_dir, "Output directory (default .)");
    cmd->add_option("--format", args.format, "Output format: csv or json");
    cmd->add_flag("--per-module-destinations", args.per_module_destinations,
                  "Let every module pick its own destination terminal");
    cmd->add_flag("--all-configs", args.all_configs,
                  "Run all four configurations with per-config sub-seeds");
    if (sampling) {
      cmd->add_option("--samples", args.samples, "Sample count");
      cmd->add_option("--seed", args.seed, "Master random seed");
      cmd->add_option("--jobs", args.jobs, "Worker thread cap (default 1)");
    }
  };

  CLI::App* solve = app.add_subcommand(
      "solve", "Optimal assignment, KPI summary, and modal split");
  add_common(solve, false);

  CLI::App* variability = app.add_subcommand(
      "variability", "KPI distribution under sampled hub times and counts");
  add_common(variability, true);
  variability->add_option(
      "--mode", args.mode,
      "Which inputs vary: all, modules-only, or one-hub:<id>");

  CLI::App* gsa = app.add_subcommand(
      "gsa", "First-order sensitivity indices of the four KPIs");
  add_common(gsa, true);
  gsa->add_option("--harmonics", args.harmonics,
                  "Harmonics kept by the estimator (default: scenario)");
  gsa->add_flag("--separate-counts", args.separate_counts,
                "One factor per shipment count instead of one grouped factor");

  CLI::App* export_lp_cmd = app.add_subcommand(
      "export-lp", "Write the assignment MILP in LP text format");
  add_common(export_lp_cmd, false);

  CLI::App* validate = app.add_subcommand(
      "validate", "Parse and structurally validate a scenario file");
  validate->add_option("--scenario", args.scenario_path, "Scenario JSON file")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (validate->parsed()) return cmd_validate(args);
    const Settings settings = resolve(args);
    if (solve->parsed()) return cmd_solve(settings);
    if (variability->parsed()) return cmd_variability(settings);
    if (gsa->parsed()) return cmd_gsa(settings);
    if (export_lp_cmd->parsed()) return cmd_export_lp(settings);
    fmt::print(stderr, "no command selected\n");
    return 1;
  } catch (const ValidationError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    for (const Violation& v : e.violations()) {
      fmt::print(stderr, "  - {}\n", v.message);
    }
    return 1;
  } catch (const ParseError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  } catch (const fs::filesystem_error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  } catch (const std::runtime_error& e) {
    fmt::print(stderr, "infeasible: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "internal error: {}\n", e.what());
    return 3;
  }
}
