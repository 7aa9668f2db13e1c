#include "wrenchsim/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "wrenchsim/batch.hpp"
#include "wrenchsim/scenario_io.hpp"

namespace wrenchsim::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double mm(double m) { return m * 1000.0; }

std::string fixed(double v, int digits = 2) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(digits) << v;
  std::string text = ss.str();
  if (text.front() == '-' && text.find_first_not_of("-0.") == std::string::npos) text.erase(0, 1);
  return text;
}

std::string mm_xy(const Vec3& v) {
  return "(" + fixed(mm(v.x())) + ", " + fixed(mm(v.y())) + ")";
}

ScenarioDocument load_with_overrides(const fs::path& path, const CommonOptions& opts) {
  ScenarioDocument doc = load_scenario(path);
  if (opts.seed_override) {
    if (*opts.seed_override < 0) throw ConfigError("--seed-override", "must be >= 0");
    doc.scenario.seed = static_cast<std::uint64_t>(*opts.seed_override);
  }
  if (opts.dt) {
    doc.scenario.dt = *opts.dt;
    validate(doc.scenario);
  }
  return doc;
}

void prepare_out_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("--out", "cannot create " + dir.string() + ": " + ec.message());
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("--out", "cannot write " + path.string());
  os << content;
}

std::string summarize(const SimOutcome& o, const Scenario& s) {
  std::ostringstream ss;
  if (!o.completed()) {
    ss << "Task aborted: " << to_string(*o.abort) << "\n  " << o.abort_detail << "\n";
    return ss.str();
  }
  const TaskReport& r = o.report;
  const PlacementResult& p = r.placement;
  ss << "Task completed\n";
  ss << "  mass estimate            " << fixed(r.mass_estimate.m_hat, 4) << " kg"
     << (r.mass_estimate.valid ? "" : " (invalid)") << "\n";
  ss << "  offset estimate          (" << fixed(mm(r.offset_estimate.r_hat_filtered.x())) << ", "
     << fixed(mm(r.offset_estimate.r_hat_filtered.y())) << ", "
     << fixed(mm(r.offset_estimate.r_hat_filtered.z())) << ") mm, rank "
     << r.offset_estimate.rank << "\n";
  ss << "  x-offset RMSE            " << fixed(mm(r.offset_rmse_x), 3) << " mm\n";
  ss << "  TCP x RMSE vs ideal      " << fixed(mm(r.tcp_rmse_x), 3) << " mm\n";
  ss << "  target                   " << mm_xy(s.plan.place_nominal) << " mm\n";
  ss << "  ideal correction         " << mm_xy(p.ideal_correction) << " mm\n";
  ss << "  ideal corrected TCP      " << mm_xy(p.ideal_corrected_tcp) << " mm\n";
  ss << "  estimated correction     " << mm_xy(p.estimated_correction) << " mm\n";
  ss << "  commanded TCP release    " << mm_xy(p.commanded_tcp) << " mm\n";
  ss << "  correction-command error " << fixed(mm(p.correction_command_error)) << " mm\n";
  ss << "  actual TCP release       " << mm_xy(p.actual_tcp) << " mm\n";
  ss << "  release error vs ideal   " << fixed(mm(p.release_error_vs_ideal)) << " mm\n";
  ss << "  execution error          " << fixed(mm(p.execution_error)) << " mm\n";
  ss << "  object CoM x - support   " << fixed(mm(p.object_com_final_x - s.plan.support_x), 3)
     << " mm, " << (r.stable ? "stable" : "UNSTABLE") << " (margin " << fixed(mm(r.margin), 3)
     << " mm)\n";
  if (!r.flags.empty()) {
    ss << "  flags:";
    for (const auto& f : r.flags) ss << ' ' << f;
    ss << "\n";
  }
  return ss.str();
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
  } catch (const NumericalDivergence& e) {
    err << "error: " << e.what() << " (check gains and timestep)\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return kExitConfig;
}

}  // namespace

int cmd_run(const fs::path& scenario_path, const CommonOptions& opts,
            const std::optional<fs::path>& replay_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    ScenarioDocument doc = load_with_overrides(scenario_path, opts);
    if (replay_path) doc.scenario.replay = load_replay(*replay_path);
    prepare_out_dir(opts.out_dir);

    const SimOutcome o = simulate(doc.scenario);

    std::ostringstream csv;
    write_trajectory_csv(csv, o.log);
    write_file(opts.out_dir / "trajectory.csv", csv.str());
    write_file(opts.out_dir / "report.json", report_to_json(o, doc.scenario).dump(2) + "\n");
    const std::string summary = summarize(o, doc.scenario);
    write_file(opts.out_dir / "summary.txt", summary);
    if (!opts.quiet) out << summary;
    if (!o.completed()) {
      err << "task aborted: " << to_string(*o.abort) << "\n";
      return kExitAborted;
    }
    return kExitOk;
  });
}

int cmd_sweep(const fs::path& scenario_path, const std::string& parameter,
              const std::vector<double>& values, int trials_per_value, const CommonOptions& opts,
              std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto param = parse_sweep_parameter(parameter);
    if (!param) {
      throw ConfigError("--param", "unknown parameter '" + parameter +
                                       "' (expected sensor.sigma_tau, sensor.sigma_f, "
                                       "tracking_lag or angular_perturbation.amp)");
    }
    if (values.empty()) throw ConfigError("--values", "at least one value required");
    if (trials_per_value < 1) throw ConfigError("--trials", "must be >= 1");
    const ScenarioDocument doc = load_with_overrides(scenario_path, opts);
    for (double v : values) validate(with_parameter(doc.scenario, *param, v));
    prepare_out_dir(opts.out_dir);

    const auto rows =
        run_sweep(doc.scenario, *param, values, trials_per_value, threads_from_env(), true);

    std::ostringstream csv;
    csv << "parameter,value,trials,completed,mean_offset_rmse_x_mm,std_offset_rmse_x_mm,"
           "mean_placement_error_mm,std_placement_error_mm,mean_offset_error_mm\n";
    for (const auto& r : rows) {
      csv << to_string(*param) << ',' << format_number(r.value) << ',' << r.trials << ','
          << r.completed << ',' << format_number(mm(r.mean_offset_rmse)) << ','
          << format_number(mm(r.std_offset_rmse)) << ','
          << format_number(mm(r.mean_placement_error)) << ','
          << format_number(mm(r.std_placement_error)) << ','
          << format_number(mm(r.mean_offset_error)) << '\n';
    }
    write_file(opts.out_dir / "sweep.csv", csv.str());
    if (!opts.quiet) {
      out << "sweep over " << to_string(*param) << " (" << trials_per_value
          << " trials per value)\n";
      for (const auto& r : rows) {
        out << "  " << std::setw(10) << format_number(r.value) << "  completed " << r.completed
            << "/" << r.trials << "  offset RMSE " << fixed(mm(r.mean_offset_rmse), 4)
            << " mm  placement error " << fixed(mm(r.mean_placement_error), 4) << " mm\n";
      }
    }
    return kExitOk;
  });
}

int cmd_stack(const fs::path& scenario_path, int layers, const CommonOptions& opts,
              std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (layers < 1) throw ConfigError("--layers", "must be >= 1");
    const ScenarioDocument doc = load_with_overrides(scenario_path, opts);
    if (!doc.stack_offsets.empty() &&
        doc.stack_offsets.size() < static_cast<std::size_t>(layers)) {
      throw ConfigError("stack_offsets_m", "has " + std::to_string(doc.stack_offsets.size()) +
                                               " entries, fewer than the " +
                                               std::to_string(layers) + " requested layers");
    }
    prepare_out_dir(opts.out_dir);

    json objects = json::array();
    std::ostringstream table;
    table << "object,actual_com_x_mm,estimated_com_x_mm,implemented_com_x_mm,stable,margin_mm\n";
    int stable_layers = 0;
    int exit_code = kExitOk;
    std::string abort_reason;

    for (int n = 0; n < layers; ++n) {
      Scenario s = doc.scenario;
      s.plan.layer_index = n;
      s.seed = doc.scenario.seed + static_cast<std::uint64_t>(n);
      if (!doc.stack_offsets.empty()) s.payload.com_offset = doc.stack_offsets[n];

      const SimOutcome o = simulate(s);
      std::ostringstream csv;
      write_trajectory_csv(csv, o.log);
      write_file(opts.out_dir / ("trajectory_layer" + std::to_string(n) + ".csv"), csv.str());

      if (!o.completed()) {
        objects.push_back({{"object", n + 1},
                           {"actual_com_x_mm", mm(s.payload.com_offset.x())},
                           {"status", "aborted"},
                           {"abort_reason", to_string(*o.abort)}});
        abort_reason = to_string(*o.abort);
        err << "layer " << n << " aborted: " << o.abort_detail << "; stacking halted\n";
        exit_code = kExitAborted;
        break;
      }
      const TaskReport& r = o.report;
      const double est = r.offset_estimate.r_hat_filtered.x();
      if (r.stable) ++stable_layers;
      objects.push_back({{"object", n + 1},
                         {"status", "completed"},
                         {"actual_com_x_mm", mm(s.payload.com_offset.x())},
                         {"estimated_com_x_mm", mm(est)},
                         {"implemented_com_x_mm", mm(r.placement.implemented_com_x)},
                         {"commanded_tcp_mm",
                          {mm(r.placement.commanded_tcp.x()), mm(r.placement.commanded_tcp.y()),
                           mm(r.placement.commanded_tcp.z())}},
                         {"stable", r.stable},
                         {"margin_mm", mm(r.margin)}});
      table << "Object " << n + 1 << ',' << fixed(mm(s.payload.com_offset.x())) << ','
            << fixed(mm(est)) << ',' << fixed(mm(r.placement.implemented_com_x)) << ','
            << (r.stable ? "yes" : "no") << ',' << fixed(mm(r.margin), 3) << '\n';
    }

    json report = {{"layers_requested", layers},
                   {"stable_layers", stable_layers},
                   {"status", exit_code == kExitOk ? "completed" : "aborted"},
                   {"objects", objects}};
    if (!abort_reason.empty()) report["abort_reason"] = abort_reason;
    write_file(opts.out_dir / "report.json", report.dump(2) + "\n");
    write_file(opts.out_dir / "stack_table.csv", table.str());
    if (!opts.quiet) {
      out << "Object     Actual CoM  Estimated CoM  Implemented CoM  [mm]\n";
      for (const auto& o : objects) {
        if (o["status"] != "completed") {
          out << "Object " << o["object"].get<int>() << "   aborted ("
              << o["abort_reason"].get<std::string>() << ")\n";
          continue;
        }
        out << "Object " << o["object"].get<int>() << "   " << std::setw(10)
            << fixed(o["actual_com_x_mm"].get<double>()) << "  " << std::setw(13)
            << fixed(o["estimated_com_x_mm"].get<double>()) << "  " << std::setw(15)
            << fixed(o["implemented_com_x_mm"].get<double>()) << "  "
            << (o["stable"].get<bool>() ? "stable" : "UNSTABLE") << "\n";
      }
      out << stable_layers << "/" << layers << " layers stable\n";
    }
    return exit_code;
  });
}

int cmd_plotdata(const fs::path& trajectory_csv, const std::vector<std::string>& signals,
                 const fs::path& out_path, std::ostream& err) {
  return guarded(err, [&] {
    if (signals.empty()) throw ConfigError("--signals", "at least one signal required");
    const CsvTable t = read_csv(trajectory_csv);
    if (t.rows.empty()) throw ConfigError("", trajectory_csv.string() + " has no data rows");
    std::size_t time_col = t.header.size();
    for (std::size_t i = 0; i < t.header.size(); ++i) {
      if (t.header[i] == "time") time_col = i;
    }
    if (time_col == t.header.size()) throw ConfigError("", "log has no time column");

    std::vector<std::size_t> cols;
    for (const auto& sig : signals) {
      std::size_t i = 0;
      while (i < t.header.size() && t.header[i] != sig) ++i;
      if (i == t.header.size()) {
        std::string avail;
        for (const auto& h : t.header) avail += (avail.empty() ? "" : ", ") + h;
        throw ConfigError("--signals", "unknown signal '" + sig + "'; available: " + avail);
      }
      cols.push_back(i);
    }

    std::ostringstream os;
    os << "time,signal,value\n";
    for (const auto& row : t.rows) {
      for (std::size_t c = 0; c < cols.size(); ++c) {
        os << row[time_col] << ',' << signals[c] << ',' << row[cols[c]] << '\n';
      }
    }
    if (out_path.has_parent_path()) prepare_out_dir(out_path.parent_path());
    write_file(out_path, os.str());
    return kExitOk;
  });
}

int main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"wrenchsim: wrench-aware admittance pick-and-place simulator"};
  app.require_subcommand(1);

  CommonOptions common;
  std::string out_dir = ".";
  long seed_override = 0;
  double dt = 0.0;
  std::vector<CLI::Option*> seed_opts, dt_opts;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", out_dir, "Output directory");
    seed_opts.push_back(sub->add_option("--seed-override", seed_override, "Replace the scenario seed"));
    dt_opts.push_back(sub->add_option("--dt", dt, "Replace the scenario timestep [s]"));
    sub->add_flag("--quiet", common.quiet, "Suppress the console summary");
  };

  std::string scenario;
  std::string replay;
  auto* run = app.add_subcommand("run", "Run one pick-and-place scenario");
  run->add_option("scenario", scenario, "Scenario file")->required();
  run->add_option("--replay", replay, "Replay document (estimated correction, actual TCP, wrenches)");
  add_common(run);

  std::string param;
  std::vector<double> values;
  int trials = 20;
  auto* sweep = app.add_subcommand("sweep", "Seeded Monte Carlo sweep over one parameter");
  sweep->add_option("scenario", scenario, "Scenario file")->required();
  sweep->add_option("--param", param, "Parameter name")->required();
  sweep->add_option("--values", values, "Comma-separated values")->delimiter(',')->required();
  sweep->add_option("--trials", trials, "Trials per value");
  add_common(sweep);

  int layers = 1;
  auto* stack = app.add_subcommand("stack", "Repeated placement and stacking");
  stack->add_option("scenario", scenario, "Scenario file")->required();
  stack->add_option("--layers", layers, "Number of layers")->required();
  add_common(stack);

  std::string trajectory;
  std::vector<std::string> signals;
  std::string plot_out = "plotdata.csv";
  auto* plot = app.add_subcommand("plotdata", "Extract logged signals in narrow format");
  plot->add_option("trajectory", trajectory, "trajectory.csv")->required();
  plot->add_option("--signals", signals, "Comma-separated column names")
      ->delimiter(',')
      ->required();
  plot->add_option("--out", plot_out, "Output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    for (auto* sub : app.get_subcommands()) err << sub->help();
    return kExitConfig;
  }

  common.out_dir = out_dir;
  for (auto* o : seed_opts) {
    if (o->count() > 0) common.seed_override = seed_override;
  }
  for (auto* o : dt_opts) {
    if (o->count() > 0) common.dt = dt;
  }

  if (run->parsed()) {
    std::optional<fs::path> rp;
    if (!replay.empty()) rp = replay;
    return cmd_run(scenario, common, rp, out, err);
  }
  if (sweep->parsed()) return cmd_sweep(scenario, param, values, trials, common, out, err);
  if (stack->parsed()) return cmd_stack(scenario, layers, common, out, err);
  if (plot->parsed()) return cmd_plotdata(trajectory, signals, plot_out, err);
  return kExitConfig;
}

}  // namespace wrenchsim::cli
