// Command-line front end: run, compare, selftest, presets.

#include "npcac/config.hpp"
#include "npcac/presets.hpp"
#include "npcac/report.hpp"
#include "npcac/selftest.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct RunOptions {
  std::string preset;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<long> steps;
  std::string out_dir = "out";
  std::optional<long> snapshot_step;
  bool quiet = false;
};

struct CompareOptions {
  std::vector<std::string> presets;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::vector<long> window{301, 500};
  std::optional<long> steps;
  unsigned threads = 0;
  std::string out;
  bool quiet = false;
};

int cmd_run(const RunOptions& o) {
  npcac::ConfigDocument doc;
  std::string stem;
  if (!o.preset.empty()) {
    doc = npcac::preset_document(o.preset);
    stem = o.preset;
  } else {
    doc = npcac::load_config(o.config);
    stem = doc.sim.name.empty() ? std::filesystem::path(o.config).stem().string() : doc.sim.name;
  }
  if (o.seed) doc.sim.seed = *o.seed;
  if (o.steps) doc.sim.steps = *o.steps;
  if (o.snapshot_step) doc.output.snapshot_step = *o.snapshot_step;
  doc.sim.validate();

  const npcac::RunLog log = npcac::run_closed_loop(doc.sim);
  const auto files = npcac::write_run(o.out_dir, stem, doc, log);
  if (!o.quiet) {
    std::cout << "wrote " << files.csv.string() << ", " << files.summary.string();
    if (!log.records.empty()) std::cout << ", " << files.ghat.string();
    std::cout << '\n';
    for (const auto& w : doc.output.windows) {
      const long last = std::min(w.last, static_cast<long>(log.records.size()));
      if (last < w.first) continue;
      const auto m = npcac::metrics(log, {w.first, last});
      std::cout << "steps " << w.first << ".." << last << ": mean|e_c| " << m.mean_abs_ec << ", mean|e_p| "
                << m.mean_abs_ep << '\n';
    }
  }
  if (!log.ok()) {
    std::cerr << "error: " << log.error << '\n';
    return kExitRuntime;
  }
  return 0;
}

int cmd_compare(const CompareOptions& o) {
  for (const auto& p : o.presets) npcac::preset(p);
  if (o.window.size() != 2 || o.window[0] < 1 || o.window[1] < o.window[0])
    throw npcac::ConfigError("--window expects FIRST LAST with 1 <= FIRST <= LAST");
  const auto result =
      npcac::compare(o.presets, o.seeds, {o.window[0], o.window[1]}, o.steps.value_or(0), o.threads);
  if (!o.out.empty()) {
    const std::filesystem::path path(o.out);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    npcac::write_atomic(path, npcac::compare_json(result).dump(2) + '\n');
  }
  if (!o.quiet) std::cout << npcac::format_compare(result);
  return 0;
}

int cmd_selftest(bool quiet) {
  int failed = 0;
  for (const auto& r : npcac::run_selftest()) {
    failed += r.passed ? 0 : 1;
    if (!quiet || !r.passed) std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << "  " << r.detail << '\n';
  }
  std::cout << (failed ? std::to_string(failed) + " check(s) failed\n" : "all checks passed\n");
  return failed ? kExitRuntime : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive nonlinear predictive control simulator"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Simulate one experiment and write its artifacts");
  auto* preset_opt = run_cmd->add_option("--preset", run.preset, "Built-in experiment name");
  auto* config_opt = run_cmd->add_option("--config", run.config, "JSON experiment file");
  preset_opt->excludes(config_opt);
  run_cmd->add_option("--seed", run.seed, "Override the random seed");
  run_cmd->add_option("--steps", run.steps, "Override the number of steps")->check(CLI::PositiveNumber);
  run_cmd->add_option("--out-dir", run.out_dir, "Output directory")->capture_default_str();
  run_cmd->add_option("--snapshot-step", run.snapshot_step, "Step whose estimate is tabulated")
      ->check(CLI::PositiveNumber);
  run_cmd->add_flag("--quiet", run.quiet, "Print nothing on success");

  CompareOptions cmp;
  auto* cmp_cmd = app.add_subcommand("compare", "Windowed errors of several presets, median over seeds");
  cmp_cmd->add_option("--preset", cmp.presets, "Preset names")->required()->expected(1, -1);
  cmp_cmd->add_option("--seed", cmp.seeds, "Seeds")->expected(1, -1)->capture_default_str();
  cmp_cmd->add_option("--window", cmp.window, "First and last step of the window")->expected(2)->capture_default_str();
  cmp_cmd->add_option("--steps", cmp.steps, "Override the number of steps")->check(CLI::PositiveNumber);
  cmp_cmd->add_option("--threads", cmp.threads, "Worker threads (0 = hardware)");
  cmp_cmd->add_option("--out", cmp.out, "Also write the table as JSON");
  cmp_cmd->add_flag("--quiet", cmp.quiet, "Print nothing on success");

  bool st_quiet = false;
  auto* st_cmd = app.add_subcommand("selftest", "Run the built-in invariant checks");
  st_cmd->add_flag("--quiet", st_quiet, "Only print failures");

  auto* list_cmd = app.add_subcommand("presets", "List built-in experiments");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run_cmd) {
      if (run.preset.empty() && run.config.empty()) throw npcac::ConfigError("run needs --preset or --config");
      return cmd_run(run);
    }
    if (*cmp_cmd) return cmd_compare(cmp);
    if (*st_cmd) return cmd_selftest(st_quiet);
    if (*list_cmd) {
      for (const auto& n : npcac::preset_names()) std::cout << n << '\n';
      return 0;
    }
  } catch (const npcac::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
