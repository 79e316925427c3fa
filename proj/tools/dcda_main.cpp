// Command-line front end: run, sweep, reproduce, bounds, dataset.

#include "dcda/config.hpp"
#include "dcda/errors.hpp"
#include "dcda/experiment.hpp"
#include "dcda/trace_io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;

namespace {

std::optional<dcda::ExperimentConfig> load_config(const std::string& path) {
  std::string text;
  try {
    text = dcda::read_text_file(path);
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return std::nullopt;
  }
  dcda::ParseResult parsed = dcda::parse_config(text);
  if (!parsed.ok()) {
    std::cerr << path << ":\n" << parsed.error_text();
    return std::nullopt;
  }
  return parsed.config;
}

int cmd_run(const std::string& config_path, const std::string& trace_override) {
  auto config = load_config(config_path);
  if (!config) return 1;
  if (!trace_override.empty()) config->trace_path = trace_override;
  const dcda::RunOutcome outcome = dcda::run_experiment(*config);
  if (outcome.exit_code != 0) {
    std::cerr << (outcome.exit_code == 2 ? "divergence: " : "error: ") << outcome.message << '\n';
    return outcome.exit_code;
  }
  const auto last = outcome.trace->at(outcome.trace->T);
  double worst = 0.0;
  for (const auto& r : last) worst = std::max(worst, r.f_gap);
  std::cout << "wrote " << config->trace_path << " (T = " << outcome.trace->T << ", max final gap " << worst
            << ")\n";
  return 0;
}

int cmd_sweep(const std::string& path, unsigned threads) {
  std::string text;
  try {
    text = dcda::read_text_file(path);
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  const dcda::SweepParseResult parsed = dcda::parse_sweep(text);
  if (!parsed.spec) {
    std::cerr << path << ":\n";
    for (const auto& e : parsed.errors) std::cerr << "line " << e.line << ": " << e.message << '\n';
    return 1;
  }
  const int code = dcda::run_sweep(*parsed.spec, threads, std::cerr);
  std::cout << "sweep written to " << parsed.spec->output_dir << '\n';
  return code;
}

int cmd_reproduce(const std::string& preset, const std::vector<std::uint64_t>& seeds, const std::string& out,
                  long T, unsigned threads) {
  std::vector<dcda::SummaryRow> rows;
  try {
    rows = dcda::reproduce(preset, seeds, out, T, threads);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  dcda::write_summary_csv(std::cout, rows);
  int worst = 0;
  for (const auto& r : rows) worst = std::max(worst, r.exit_code);
  return worst;
}

int cmd_bounds(const std::string& config_path, const std::string& trace_path, const std::string& out_path) {
  auto config = load_config(config_path);
  if (!config) return 1;
  try {
    const dcda::RunTrace trace = dcda::read_trace_csv(trace_path);
    double psi_star = 0.0;
    const fs::path meta = trace_path + ".meta";
    if (fs::exists(meta)) {
      const dcda::ParseResult side = dcda::parse_config(dcda::read_text_file(meta));
      if (!side.ok() || !dcda::equivalent(*side.config, *config)) {
        std::cerr << "error: " << trace_path << " was not produced by " << config_path << '\n';
        return 1;
      }
      psi_star = std::stod(side.config->meta.at("psi_star"));
    } else {
      const dcda::RunConfig run = dcda::make_run_config(*config);
      psi_star = run.reference->psi_star;
    }
    const dcda::BoundsTable table = dcda::evaluate_bounds(*config, trace, psi_star);
    if (out_path.empty()) {
      dcda::write_bounds_csv(std::cout, table);
    } else {
      std::ofstream os(out_path, std::ios::binary);
      dcda::write_bounds_csv(os, table);
    }
    for (std::size_t l = 0; l < table.lemma_names.size(); ++l)
      std::cerr << table.lemma_names[l] << ": gap above bound on " << table.lemma_violations[l] << " rows\n";
    if (table.certificate_violations > 0) {
      std::cerr << "certificate violated on " << table.certificate_violations << " rows\n";
      return 3;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

int cmd_dataset(const std::string& config_path, const std::string& dir) {
  auto config = load_config(config_path);
  if (!config) return 1;
  try {
    dcda::write_problem_csv(*dcda::make_problem(*config), dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed coordinate dual averaging simulator"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("-j,--threads", threads, "Worker threads for sweeps and presets (0: all cores)");

  std::string run_config, run_trace;
  auto* run = app.add_subcommand("run", "Run one experiment from a config file");
  run->add_option("config", run_config)->required()->check(CLI::ExistingFile);
  run->add_option("--trace", run_trace, "Override output.trace");

  std::string sweep_file;
  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep");
  sweep->add_option("sweepfile", sweep_file)->required()->check(CLI::ExistingFile);

  std::string preset, out_dir = "reproduce_out";
  std::vector<std::uint64_t> seeds{1};
  long horizon = 2000;
  auto* repro = app.add_subcommand("reproduce", "Run a preset comparison grid (svm, linreg, robust)");
  repro->add_option("preset", preset)->required()->check(CLI::IsMember({"svm", "linreg", "robust"}));
  repro->add_option("--seeds", seeds, "Seed list")->expected(1, -1);
  repro->add_option("--out", out_dir, "Output directory");
  repro->add_option("-T,--horizon", horizon, "Iterations per run")->check(CLI::PositiveNumber);

  std::string bounds_config, bounds_trace, bounds_out;
  auto* bounds = app.add_subcommand("bounds", "Evaluate convergence bounds against a trace");
  bounds->add_option("config", bounds_config)->required()->check(CLI::ExistingFile);
  bounds->add_option("trace", bounds_trace)->required()->check(CLI::ExistingFile);
  bounds->add_option("-o,--out", bounds_out, "Write the CSV here instead of stdout");

  std::string data_config, data_dir;
  auto* dataset = app.add_subcommand("dataset", "Write the generated node data as CSV");
  dataset->add_option("config", data_config)->required()->check(CLI::ExistingFile);
  dataset->add_option("dir", data_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*run) return cmd_run(run_config, run_trace);
  if (*sweep) return cmd_sweep(sweep_file, threads);
  if (*repro) return cmd_reproduce(preset, seeds, out_dir, horizon, threads);
  if (*bounds) return cmd_bounds(bounds_config, bounds_trace, bounds_out);
  return cmd_dataset(data_config, data_dir);
}
