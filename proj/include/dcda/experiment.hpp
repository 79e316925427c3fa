#pragma once

#include "dcda/config.hpp"
#include "dcda/engine.hpp"
#include "dcda/topology.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace dcda {

// Component builders. Each one draws from its own sub-seed of config.seed
// (labels data, graph, schedule, channel, dither, minibatch, test).
std::shared_ptr<Problem> make_problem(const ExperimentConfig& config);
Graph make_graph(const ExperimentConfig& config);
SharePolicy make_policy(const ExperimentConfig& config, const Matrix& base);
ChannelModel make_channel(const ExperimentConfig& config);
GradientMode make_gradient(const ExperimentConfig& config);
std::optional<NodeData> make_test_set(const ExperimentConfig& config);

// Step constant used by `step.C = auto`: 1 / lambda_max of the average Hessian for
// least squares, sqrt(2 psi*) / L otherwise.
double auto_step_constant(const Problem& problem, const ReferenceSolution& reference);

// Fully built run, reference solution included.
RunConfig make_run_config(const ExperimentConfig& config);

struct RunOutcome {
  int exit_code = 0;  // 0 ok, 1 config error, 2 numerical divergence
  std::string message;
  std::optional<RunTrace> trace;
};

// Runs one experiment. With write_files, the trace CSV, the metadata sidecar and
// (when configured) the message log are written.
RunOutcome run_experiment(const ExperimentConfig& config, bool write_files = true);

// First time the worst node's gap is at most `fraction` of the initial gap.
std::optional<long> time_to_gap(const RunTrace& trace, double fraction = 0.05);
// First time the mean node accuracy reaches `threshold`.
std::optional<long> time_to_accuracy(const RunTrace& trace, double threshold = 0.9);

// Runs tasks on up to `threads` workers (0: hardware concurrency).
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

// Every swept combination times every seed; one trace per run plus sweep_summary.csv.
// Returns the worst exit code.
int run_sweep(const SweepSpec& spec, unsigned threads, std::ostream& log);

struct PresetVariant {
  std::string name;
  ExperimentConfig config;
};

// The comparison grid of a preset at one seed: svm f000/f025/f050/f100,
// linreg exact/minibatch4/noisy, robust {rr,rand} x {full,ring}.
std::vector<PresetVariant> preset_variants(const std::string& preset, std::uint64_t seed, long T);

struct SummaryRow {
  std::string preset;
  std::string variant;
  std::uint64_t seed = 0;
  std::optional<long> t_hit;
  std::optional<long long> transmissions_hit;
  double final_gap_max = 0.0;
  double final_gap_mean = 0.0;
  double final_accuracy = 0.0;  // NaN without a test set
  int exit_code = 0;
};

// Runs the grid for every seed, writes <out>/<preset>_<variant>_seed<k>.csv (+ .meta)
// and <out>/<preset>_summary.csv. The svm threshold is 90% accuracy; the others use 5%
// of the initial gap.
std::vector<SummaryRow> reproduce(const std::string& preset, const std::vector<std::uint64_t>& seeds,
                                  const std::filesystem::path& out_dir, long T, unsigned threads = 0);

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows);

struct BoundsRow {
  long T = 0;
  int node = 0;
  double gap = 0.0;    // f_gap / n, the network-average objective gap
  double thm1 = 0.0;   // NaN when the certificate does not apply
  std::vector<double> lemmas;
  bool violation = false;
};

struct BoundsTable {
  std::vector<std::string> lemma_names;
  std::vector<BoundsRow> rows;
  bool has_certificate = false;
  long certificate_violations = 0;
  std::vector<long> lemma_violations;
  double L = 0.0;
  double psi_star = 0.0;
};

// Trace-wise bound evaluation. Perfect channel with exact gradients gets the trace
// certificate plus the policy lemma (static, round robin, randomized); minibatch
// runs get the stochastic lemma; noisy and quantized static runs get their lemmas.
BoundsTable evaluate_bounds(const ExperimentConfig& config, const RunTrace& trace, double psi_star);

void write_bounds_csv(std::ostream& os, const BoundsTable& table);

// Parses `key = value` metadata lines (`meta.` prefix stripped).
std::map<std::string, std::string> read_metadata(const std::filesystem::path& path);

}  // namespace dcda
