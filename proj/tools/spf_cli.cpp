// Command-line front end: batch recovery grids, phase-diagram plots, and
// closed-form bound evaluation.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <json.hpp>

#include "spf/experiments.hpp"
#include "spf/theory.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::string& out_dir,
            int workers, bool measure_rip, bool timings) {
  spf::ExperimentConfig cfg = spf::parse_config_file(config_path);
  if (measure_rip) cfg.measure_rip = true;

  const auto records = spf::run_grid(cfg, workers);
  std::filesystem::path out = cfg.out_csv;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    out = std::filesystem::path(out_dir) / out.filename();
  }
  spf::write_csv(records, out.string(), timings);

  int successes = 0, failures = 0;
  for (const auto& r : records) {
    successes += r.success ? 1 : 0;
    failures += r.generation_failed ? 1 : 0;
  }
  std::cout << "wrote " << records.size() << " records to " << out.string()
            << " (" << successes << " successes";
  if (failures > 0) std::cout << ", " << failures << " failed generations";
  std::cout << ")\n";
  return 0;
}

int cmd_plot(const std::string& csv_path, const std::string& x_axis,
             const std::string& y_axis, std::string out_path) {
  const auto records = spf::read_csv(csv_path);
  if (out_path.empty()) {
    out_path = std::filesystem::path(csv_path).replace_extension(".svg").string();
  }
  spf::render_heatmap(records, x_axis, y_axis, out_path);
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int cmd_theory(double delta, double nu, double pu, double pv) {
  const spf::TheoryReport rep = spf::make_theory_report(delta, nu, pu, pv);

  std::printf("delta                %.6g\n", rep.delta);
  std::printf("nu                   %.6g\n", rep.nu);
  std::printf("C_delta              %.10g\n", rep.c_delta);
  std::printf("omega_sup            %.10g rad%s\n", rep.omega_sup,
              rep.omega_feasible ? "" : "  (empty feasible set)");
  std::printf("sin(omega_sup)       %.10g\n", std::sin(rep.omega_sup));
  std::printf("M_delta_nu           %.10g\n", rep.m_delta_nu);
  std::printf("pu, pv               %.6g, %.6g\n", rep.pu, rep.pv);
  std::printf("angle bound          %.10g\n", rep.angle_bound);
  std::printf("condition holds      %s\n", rep.condition_holds ? "yes" : "no");
  std::printf("within 0.04 limits   %s\n", rep.within_sin_bound_limits ? "yes" : "no");
  std::printf("within 0.08 limits   %s\n", rep.within_guarantee_limits ? "yes" : "no");

  nlohmann::json j{{"delta", rep.delta},
                   {"nu", rep.nu},
                   {"c_delta", rep.c_delta},
                   {"omega_sup", rep.omega_sup},
                   {"omega_feasible", rep.omega_feasible},
                   {"sin_omega_sup", std::sin(rep.omega_sup)},
                   {"m_delta_nu", rep.m_delta_nu},
                   {"pu", rep.pu},
                   {"pv", rep.pv},
                   {"angle_bound", rep.angle_bound},
                   {"condition_holds", rep.condition_holds},
                   {"within_sin_bound_limits", rep.within_sin_bound_limits},
                   {"within_guarantee_limits", rep.within_guarantee_limits}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse power factorization experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int workers = 1;
  bool measure_rip = false, timings = false;
  auto* run = app.add_subcommand("run", "run a Monte Carlo recovery grid");
  run->add_option("config", config_path, "experiment config file")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  run->add_flag("--measure-rip", measure_rip, "estimate the RIP constant per trial");
  run->add_flag("--timings", timings, "record wall time in the CSV (breaks byte determinism)");

  std::string csv_path, x_axis, y_axis, plot_out;
  auto* plot = app.add_subcommand("plot", "render a success-rate heatmap");
  plot->add_option("csv", csv_path, "trial record CSV")->required();
  plot->add_option("--x", x_axis, "x axis field")->required();
  plot->add_option("--y", y_axis, "y axis field")->required();
  plot->add_option("--out", plot_out, "output SVG path");

  double delta = 0.0, nu = 0.0, pu = 1.0, pv = 1.0;
  auto* theory = app.add_subcommand("theory", "evaluate the convergence-theory bounds");
  theory->add_option("--delta", delta, "restricted isometry constant")->required();
  theory->add_option("--nu", nu, "noise-to-signal ratio")->required();
  theory->add_option("--pu", pu, "||P_{J1} u|| for the angle bound");
  theory->add_option("--pv", pv, "||P_{J2} v|| for the angle bound");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir, workers, measure_rip, timings);
    if (plot->parsed()) return cmd_plot(csv_path, x_axis, y_axis, plot_out);
    if (theory->parsed()) return cmd_theory(delta, nu, pu, pv);
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
