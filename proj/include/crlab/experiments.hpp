#pragma once

#include <string>
#include <vector>

#include "crlab/continuous_env.hpp"
#include "crlab/executor.hpp"
#include "crlab/experiment_config.hpp"

namespace crlab {

/// One asserted property of a finished run. Hard checks gate the exit
/// status; soft ones are informational (tightness warnings and the like).
struct CheckResult {
  std::string name;
  bool pass = false;
  bool hard = true;
  double value = 0.0;  // what the run measured
  double bound = 0.0;  // what it was held against
  std::string detail;  // direction of the comparison, context
};

struct ExperimentOutcome {
  std::string root;  // directory all artifacts were written into
  std::vector<CheckResult> checks;
  std::vector<std::string> warnings;
  bool all_hard_passed = true;
};

/// Output root resolution: the CRLAB_OUTPUT_ROOT environment variable when
/// set, the current directory otherwise. Relative config output_dir values
/// land under this root; absolute ones are taken as given.
std::string default_output_root();

/// Runs the configured experiment and writes its artifacts: a manifest, a
/// summary.json with every check, and per-seed CSV/SVG files. Deterministic
/// for a fixed config: reruns produce byte-identical CSVs. Throws on
/// filesystem failures; check failures are reported, not thrown.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg,
                                 const std::string& output_root = default_output_root());

/// Renders an occupancy histogram as an SVG heatmap. The color scale is
/// linear from white at zero mass to a dark blue at the peak cell; the
/// scale and the peak value are documented in the file itself. Monitored
/// regions are drawn as red outlines when the arena side is positive; grid
/// row 0 is the south edge of the arena and is drawn at the bottom.
void emit_heatmap(const OccupancyGrid& grid, const std::vector<Region>& regions,
                  double side, const std::string& path);

/// Reprints the check lines of a finished run from its summary.json.
/// Returns the stored all-hard-passed verdict.
bool report_summary(const std::string& run_dir, std::string* rendered);

/// One [ok]/[FAIL] line per check, the format the CLI prints.
std::string render_checks(const std::vector<CheckResult>& checks,
                          const std::vector<std::string>& warnings);

}  // namespace crlab
