#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "skelfix/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"skelfix - hybrid program repair from guiding patches"};
  app.require_subcommand(1);

  CLI::App* repair = app.add_subcommand(
      "repair", "generate and validate patches for one bug directory");

  std::string bug_dir;
  std::string config_path;
  std::string fl_path;
  std::string extra_sources;
  std::string test_command;
  std::string report_path;
  std::string endpoint;
  bool keep_going = false;
  bool dump_symbols = false;
  int workers = 1;
  std::size_t max_candidates = 500;
  std::size_t max_mods = 3;
  double wall_seconds = 0.0;
  double test_timeout = 0.0;

  repair->add_option("--bug", bug_dir, "bug directory")->required();
  auto* config_opt =
      repair->add_option("--config", config_path, "JSON config file");
  auto* fl_opt = repair->add_option("--fl", fl_path, "fault ranking file");
  repair->add_flag("--keep-going", keep_going,
                   "keep searching after the first plausible patch");
  auto* workers_opt = repair->add_option("--validation-workers", workers,
                                         "parallel validation workspaces");
  repair->add_flag("--dump-symbols", dump_symbols,
                   "print the symbol table as JSON");
  auto* extra_opt = repair->add_option("--extra-sources", extra_sources,
                                       "directory of additional .src files");
  auto* cand_opt = repair->add_option("--max-candidates-per-skeleton",
                                      max_candidates,
                                      "instantiation cap per skeleton");
  auto* mods_opt = repair->add_option("--max-mods-per-patch", max_mods,
                                      "modification cap per candidate");
  auto* cmd_opt = repair->add_option("--test-command", test_command,
                                     "test command template");
  auto* report_opt =
      repair->add_option("--report", report_path, "report output path");
  auto* endpoint_opt = repair->add_option(
      "--endpoint", endpoint, "LLM endpoint URL for patch generation");
  auto* wall_opt = repair->add_option("--wall-clock-limit", wall_seconds,
                                      "total budget in seconds");
  auto* timeout_opt = repair->add_option("--per-test-timeout", test_timeout,
                                         "per-validation timeout in seconds");

  CLI11_PARSE(app, argc, argv);

  skelfix::Config cfg;
  try {
    if (config_opt->count() > 0) cfg = skelfix::load_config(config_path);
  } catch (const skelfix::ConfigError& e) {
    std::cerr << "skelfix: " << e.what() << "\n";
    return 20;
  }

  // flags override file values
  if (fl_opt->count() > 0) cfg.fl_path = fl_path;
  if (keep_going) cfg.keep_going = true;
  if (workers_opt->count() > 0) cfg.validation_workers = workers;
  if (dump_symbols) cfg.dump_symbols = true;
  if (extra_opt->count() > 0) cfg.extra_sources = extra_sources;
  if (cand_opt->count() > 0) cfg.max_candidates_per_skeleton = max_candidates;
  if (mods_opt->count() > 0) cfg.max_mods_per_patch = max_mods;
  if (cmd_opt->count() > 0) cfg.test_command = test_command;
  if (report_opt->count() > 0) cfg.report_path = report_path;
  if (endpoint_opt->count() > 0) cfg.llm_endpoint = endpoint;
  if (wall_opt->count() > 0)
    cfg.budget.wall_clock_limit = std::chrono::milliseconds(
        static_cast<long long>(wall_seconds * 1000.0));
  if (timeout_opt->count() > 0)
    cfg.budget.per_test_timeout = std::chrono::milliseconds(
        static_cast<long long>(test_timeout * 1000.0));

  skelfix::RunResult result = skelfix::run_repair(bug_dir, cfg);
  for (const std::string& line : result.log)
    std::cerr << "skelfix: " << line << "\n";
  if (result.symbols) std::cout << result.symbols->dump(2) << "\n";

  if (result.exit_code == 0) {
    std::cout << "plausible patch found for " << result.report.bug_id << " ("
              << result.report.plausible.size() << " total)\n";
  } else if (result.exit_code == 10) {
    std::cout << "no plausible patch for " << result.report.bug_id << " ["
              << result.report.status << "]\n";
  }
  return result.exit_code;
}
