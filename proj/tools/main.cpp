#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "locoman/config.hpp"
#include "locoman/physics.hpp"
#include "locoman/trace_io.hpp"
#include "svg.hpp"

namespace fs = std::filesystem;
using namespace locoman;
using namespace locoman::cli;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kSimAbort = 2;

struct Common {
  std::string config;
  std::string out = "out";
  std::vector<std::string> overrides;
  bool plot = false;
};

// Thrown for anything the user can fix in the invocation or the files.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void add_common(CLI::App* app, Common& c, bool with_out) {
  app->add_option("-c,--config", c.config, "scenario file")->required();
  app->add_option("--set", c.overrides, "override key=value, repeatable; dotted keys select a section");
  if (with_out) app->add_option("-o,--out", c.out, "output directory");
}

void make_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw UsageError("cannot create output directory '" + dir + "'");
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write '" + path.string() + "'");
  f << content;
}

Series trace_series(const RunMetrics& m, const std::string& label, bool height) {
  Series s;
  s.label = label;
  for (const TraceRow& r : m.trace) {
    s.x.push_back(r.time);
    s.y.push_back(height ? r.state.pos.z() : r.state.euler.y());
  }
  return s;
}

Series reference_series(const RunMetrics& m, bool height) {
  Series s;
  s.label = "reference";
  for (const TraceRow& r : m.trace) {
    s.x.push_back(r.time);
    s.y.push_back(height ? r.reference.pos.z() : r.reference.euler.y());
  }
  return s;
}

void write_plots(const fs::path& dir, const std::string& name, const std::vector<std::pair<std::string, const RunMetrics*>>& runs) {
  for (bool height : {true, false}) {
    LinePlot p;
    p.title = name + (height ? ": CoM height" : ": pitch");
    p.x_label = "time [s]";
    p.y_label = height ? "CoM height [m]" : "pitch [rad]";
    p.series.push_back(reference_series(*runs.front().second, height));
    for (const auto& [label, m] : runs) p.series.push_back(trace_series(*m, label, height));
    write_file(dir / (height ? "plot_height.svg" : "plot_pitch.svg"), line_plot_svg(p));
  }
}

void print_metrics(const std::string& label, const RunMetrics& m) {
  std::cout << label << ": com_height_rmse " << format_number(m.com_height_rmse) << "  pitch_rmse "
            << format_number(m.pitch_rmse) << "  max_pitch " << format_number(m.max_pitch) << "  fell "
            << (m.fell ? "true" : "false") << '\n';
}

RunMetrics run_one(ScenarioConfig cfg) {
  RunMetrics m = run_scenario(cfg);
  if (m.aborted) std::cerr << cfg.name << " (" << to_string(cfg.controller_kind) << "): " << m.abort_reason << '\n';
  return m;
}

int cmd_run(const Common& c) {
  const ScenarioFile file = load_scenario_file(c.config, c.overrides);
  make_out_dir(c.out);
  const RunMetrics m = run_one(file.scenario);
  const fs::path dir(c.out);
  std::ostringstream trace, summary;
  write_trace_csv(trace, m.trace);
  write_summary(summary, file.scenario, m);
  write_file(dir / "trace.csv", trace.str());
  write_file(dir / "summary.txt", summary.str());
  if (c.plot) write_plots(dir, file.scenario.name, {{to_string(file.scenario.controller_kind), &m}});
  print_metrics(to_string(file.scenario.controller_kind), m);
  return m.aborted ? kSimAbort : kOk;
}

int cmd_compare(const Common& c) {
  const ScenarioFile file = load_scenario_file(c.config, c.overrides);
  if (file.compare_kinds.size() < 2) throw UsageError("compare requires ≥2 kinds (set [compare] kinds)");
  make_out_dir(c.out);
  const fs::path dir(c.out);

  // Runs go one after another: each is already deterministic and the
  // coordinator writes every file.
  std::vector<RunMetrics> results;
  for (ControllerKind k : file.compare_kinds) {
    ScenarioConfig cfg = file.scenario;
    cfg.controller_kind = k;
    results.push_back(run_one(cfg));
  }

  std::ostringstream joined;
  bool aborted = false;
  for (std::size_t i = 0; i < results.size(); ++i) {
    std::ostringstream one;
    write_trace_csv(one, results[i].trace);
    std::istringstream lines(one.str());
    std::string line;
    std::getline(lines, line);
    if (i == 0) joined << "kind," << line << '\n';
    while (std::getline(lines, line)) joined << to_string(file.compare_kinds[i]) << ',' << line << '\n';
    aborted = aborted || results[i].aborted;

    ScenarioConfig cfg = file.scenario;
    cfg.controller_kind = file.compare_kinds[i];
    std::ostringstream summary;
    write_summary(summary, cfg, results[i]);
    write_file(dir / ("summary_" + to_string(cfg.controller_kind) + ".txt"), summary.str());
  }
  write_file(dir / "compare.csv", joined.str());

  std::ostringstream table;
  table << "kind,com_height_rmse,pitch_rmse,max_pitch,max_height_error,fell\n";
  for (std::size_t i = 0; i < results.size(); ++i) {
    const RunMetrics& m = results[i];
    table << to_string(file.compare_kinds[i]) << ',' << format_number(m.com_height_rmse) << ','
          << format_number(m.pitch_rmse) << ',' << format_number(m.max_pitch) << ','
          << format_number(m.max_height_error) << ',' << (m.fell ? "true" : "false") << '\n';
  }
  std::vector<std::size_t> order(results.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return results[a].pitch_rmse < results[b].pitch_rmse; });
  table << "pitch_rmse order:";
  for (std::size_t i = 0; i < order.size(); ++i)
    table << (i ? " < " : " ") << to_string(file.compare_kinds[order[i]]);
  table << '\n';
  write_file(dir / "compare.txt", table.str());
  std::cout << table.str();

  if (c.plot) {
    std::vector<std::pair<std::string, const RunMetrics*>> runs;
    for (std::size_t i = 0; i < results.size(); ++i) runs.emplace_back(to_string(file.compare_kinds[i]), &results[i]);
    write_plots(dir, file.scenario.name, runs);
  }
  return aborted ? kSimAbort : kOk;
}

int cmd_sweep(const Common& c) {
  const ScenarioFile file = load_scenario_file(c.config, c.overrides);
  if (!file.sweep) throw UsageError(c.config + ": no [sweep] section");
  const PoseSweep& sweep = *file.sweep;
  if (sweep.values.empty()) throw UsageError(c.config + ": sweep.values is empty");
  {
    PoseWeights probe;
    try {
      set_pose_weight(probe, sweep.key, 1.0);
    } catch (const std::invalid_argument& e) {
      throw UsageError(c.config + ": sweep.key: " + e.what());
    }
  }
  make_out_dir(c.out);
  const fs::path dir(c.out);
  const std::vector<SweepRow> rows = run_pose_sweep(sweep, file.scenario.robot);

  std::ostringstream csv;
  csv << "key,value,p_x,p_z,roll,pitch,yaw,q_arm,cost,max_violation,status\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const SweepRow& r = rows[i];
    const PoseDecision& p = r.result.pose;
    csv << sweep.key << ',' << format_number(r.value) << ',' << format_number(p.pos.x()) << ','
        << format_number(p.pos.z()) << ',' << format_number(p.euler.x()) << ',' << format_number(p.euler.y()) << ','
        << format_number(p.euler.z()) << ',' << format_number(p.q_arm) << ',' << format_number(r.result.cost) << ','
        << format_number(r.violation) << ',' << to_string(r.result.status) << '\n';
    write_file(dir / ("pose_" + std::to_string(i) + ".svg"),
               pose_svg(p, sweep.target.grip, file.scenario.robot, sweep.key + " = " + format_number(r.value)));
  }
  write_file(dir / "sweep.csv", csv.str());
  std::cout << csv.str();
  return kOk;
}

int cmd_validate(const Common& c) {
  const ScenarioFile file = load_scenario_file(c.config, c.overrides);
  const ScenarioConfig& s = file.scenario;
  std::cout << "ok: " << s.name << " (" << (s.task ? to_string(s.task->kind) : "no task") << ", "
            << to_string(s.controller_kind) << ", " << format_number(s.duration) << " s)\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Loco-manipulation scenario runner"};
  app.require_subcommand(1);
  Common run, compare, sweep, validate;
  CLI::App* run_cmd = app.add_subcommand("run", "run one scenario");
  add_common(run_cmd, run, true);
  run_cmd->add_flag("--plot", run.plot, "also write plot_height.svg and plot_pitch.svg");
  CLI::App* compare_cmd = app.add_subcommand("compare", "run the scenario once per [compare] kind");
  add_common(compare_cmd, compare, true);
  compare_cmd->add_flag("--plot", compare.plot, "also write overlaid plots");
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "static pose solves over one weight");
  add_common(sweep_cmd, sweep, true);
  CLI::App* validate_cmd = app.add_subcommand("validate", "parse and check a scenario file");
  add_common(validate_cmd, validate, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*compare_cmd) return cmd_compare(compare);
    if (*sweep_cmd) return cmd_sweep(sweep);
    return cmd_validate(validate);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const SimulationAbort& e) {
    std::cerr << "simulation aborted: " << e.what() << '\n';
    return kSimAbort;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSimAbort;
  }
}
