// Command-line front end for the constrained-RL laboratory. Four verbs:
//
//   crlab run <config>       execute an experiment, write artifacts
//   crlab validate <config>  parse and validate without running anything
//   crlab certify [config]   exactness certificates for the tabular problem
//   crlab report <run-dir>   reprint the checks of a finished run
//
// Exit codes: 0 all hard checks passed, 1 at least one failed, 2 the config
// or the invocation was unusable.

#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"

#include "crlab/csv.hpp"
#include "crlab/experiment_config.hpp"
#include "crlab/experiments.hpp"
#include "crlab/version.hpp"

namespace {

int finish_run(const crlab::ExperimentOutcome& outcome) {
  std::fputs(crlab::render_checks(outcome.checks, outcome.warnings).c_str(), stdout);
  std::printf("artifacts: %s\n", outcome.root.c_str());
  return outcome.all_hard_passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"constrained-RL laboratory"};
  app.set_version_flag("--version", std::string(crlab::kLibraryVersion));
  app.require_subcommand(1);

  std::string output_root = crlab::default_output_root();
  const char* root_help =
      "directory experiment output_dir values are resolved against "
      "(default: $CRLAB_OUTPUT_ROOT, else the current directory)";

  std::string run_config;
  CLI::App* run = app.add_subcommand("run", "execute an experiment config");
  run->add_option("config", run_config, "experiment file")->required();
  run->add_option("--output-root", output_root, root_help);

  std::string validate_config;
  CLI::App* validate = app.add_subcommand("validate", "check a config without running");
  validate->add_option("config", validate_config, "experiment file")->required();

  std::string certify_config;
  CLI::App* certify =
      app.add_subcommand("certify", "solve the constrained problem exactly and "
                                    "certify duality and primal recovery");
  certify->add_option("config", certify_config,
                      "optional oracle-certify config; defaults to the built-in "
                      "three-room chain");
  certify->add_option("--output-root", output_root, root_help);

  std::string report_dir;
  CLI::App* report = app.add_subcommand("report", "reprint the summary of a finished run");
  report->add_option("run_dir", report_dir, "directory a previous run wrote into")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      return finish_run(crlab::run_experiment(crlab::load_experiment_config(run_config),
                                              output_root));
    }
    if (*validate) {
      const crlab::ExperimentConfig cfg = crlab::load_experiment_config(validate_config);
      std::printf("ok: kind %s, %zu seed(s), output_dir %s\n", crlab::to_string(cfg.kind),
                  cfg.seeds.size(), cfg.output_dir.c_str());
      return 0;
    }
    if (*certify) {
      crlab::ExperimentConfig cfg;
      if (!certify_config.empty()) {
        cfg = crlab::load_experiment_config(certify_config);
        if (cfg.kind != crlab::ExperimentKind::oracle_certify) {
          std::fprintf(stderr, "certify needs an oracle-certify config, got kind %s\n",
                       crlab::to_string(cfg.kind));
          return 2;
        }
      } else {
        cfg.kind = crlab::ExperimentKind::oracle_certify;
        cfg.seeds = {0};
        cfg.output_dir = "certify";
        cfg.canonical_text = "builtin oracle-certify defaults\n";
      }
      const crlab::ExperimentOutcome outcome = crlab::run_experiment(cfg, output_root);
      std::fputs(crlab::read_text_file(outcome.root + "/certificate.txt").c_str(), stdout);
      std::fputs("\n", stdout);
      return finish_run(outcome);
    }
    if (*report) {
      std::string rendered;
      const bool passed = crlab::report_summary(report_dir, &rendered);
      std::fputs(rendered.c_str(), stdout);
      return passed ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
