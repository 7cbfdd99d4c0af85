#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spf/signals.hpp"
#include "spf/solvers.hpp"
#include "spf/types.hpp"

namespace spf {

/// One grid cell: a full parameter assignment for a planted recovery trial.
struct CellParams {
  Index n1 = 64;
  Index n2 = 64;
  Index m = 128;
  Index s1 = 3;
  Index s2 = 3;
  Index k = 1;
  double xi = 0.8;
  double mu = 0.8;
  double nu = 0.0;
};

/// Grid axes in canonical nesting order n1, n2, m, s1, s2, k, xi, mu, nu
/// (leftmost slowest). Parsed from the flat key-value config format
/// documented in the README.
struct ExperimentConfig {
  std::vector<Index> n1{64};
  std::vector<Index> n2{64};
  std::vector<Index> m{128};
  std::vector<Index> s1{3};
  std::vector<Index> s2{3};
  std::vector<Index> k{1};
  std::vector<double> xi{0.8};
  std::vector<double> mu{0.8};
  std::vector<double> nu{0.0};
  int trials = 10;
  // Negative means the default rule: 1e-4 when nu == 0, else 8.3 nu + 1e-2.
  double success_threshold = -1.0;
  std::uint64_t base_seed = 0;
  int max_outer_iter = 50;
  int max_htp_iter = 50;
  double rel_change_tol = 1e-8;
  bool measure_rip = false;
  int rip_trials = 500;
  std::string out_csv = "results.csv";
};

struct TrialRecord {
  CellParams cell;
  int trial = 0;
  std::uint64_t seed = 0;
  std::optional<double> delta_hat;
  std::optional<double> sin_angle_v0;
  std::optional<double> rel_error;
  int iterations = 0;
  bool converged = false;
  bool success = false;
  bool generation_failed = false;
  double wall_ms = 0.0;
};

/// Effective success threshold for a cell under the default rule.
double resolve_success_threshold(double configured, double nu);

/// Generate operator + instance from the seed, run thresholding init and
/// SPF, and measure. Infeasible generator parameters produce a record with
/// generation_failed set instead of throwing. Pure in (cell, seed, knobs).
TrialRecord run_trial(const CellParams& cell, std::uint64_t seed,
                      const ExperimentConfig& cfg);

/// Cartesian product of the axes, trials innermost; seeds derived as
/// hash(base_seed, cell index, trial index). Records are returned in
/// canonical order for any worker count.
std::vector<TrialRecord> run_grid(const ExperimentConfig& cfg,
                                  int workers = 1);

/// RFC-4180 CSV, '.' decimal separator, one column per TrialRecord field.
/// The wall_time_ms column is written as 0 unless with_timings is set, so
/// that identical configs give byte-identical files.
void write_csv(const std::vector<TrialRecord>& records,
               const std::string& path, bool with_timings = false);

std::vector<TrialRecord> read_csv(const std::string& path);

/// Per-cell success-rate heatmap over two record fields (axis names from
/// the CSV header), written as a standalone SVG with a grayscale legend
/// and per-cell rate annotations.
void render_heatmap(const std::vector<TrialRecord>& records,
                    const std::string& x_axis, const std::string& y_axis,
                    const std::string& path);

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

}  // namespace spf
