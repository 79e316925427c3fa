#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dcda {

// Everything needed to reproduce one run. Text form: flat `key = value` lines,
// `#` comments, dotted keys per component. `meta.*` keys carry run metadata and
// never affect a run.
struct ExperimentConfig {
  // problem.*
  std::string family = "linreg";  // svm | linreg | robust
  int n = 10;
  int m = 20;
  int d = 30;
  double noise_sigma = 1.0;
  double radius = 0.0;
  double svm_sigma = 1.0;
  double svm_mu_scale = 1.0;
  double svm_c = 1.0;
  double outlier_prob = 0.1;
  double outlier_sigma = 10.0;
  double inlier_sigma = 0.3;
  int test_per_class = 500;

  // graph.*
  std::string graph = "full";  // full | ring | random
  int ring_l = 1;
  double edge_p = 0.5;

  // policy.*
  std::string policy = "static";  // static | round_robin | randomized
  int policy_m = 1;
  std::string random_mode = "subset";  // subset | all_to_all
  double rho = 1.0;
  double fraction = -1.0;  // >= 0 sets the block/subset size to round(fraction * d)

  // channel.*
  std::string channel = "perfect";  // perfect | noisy | quantized
  double gamma2 = 0.0;
  double zoom_s0 = 1.0;
  double zoom_beta = 0.995;

  // gradient.*
  std::string gradient = "exact";  // exact | minibatch
  int batch = 4;

  long T = 2000;
  double step_c = 1.0;
  bool step_auto = false;  // step.C = auto
  std::uint64_t seed = 1;
  int metric_every = 1;
  long reference_iterations = 0;
  double delta = 0.05;

  // output.*
  std::string trace_path = "trace.csv";
  std::string meta_path;      // default: <trace>.meta
  std::string messages_path;  // quantized message log, optional

  std::map<std::string, std::string> meta;

  // Resolved block size for round robin / randomized subset.
  int share_block() const;
  std::string resolved_meta_path() const { return meta_path.empty() ? trace_path + ".meta" : meta_path; }
};

struct ConfigIssue {
  int line = 0;
  std::string message;
};

struct ParseResult {
  std::optional<ExperimentConfig> config;
  std::vector<ConfigIssue> errors;

  bool ok() const { return config.has_value(); }
  std::string error_text() const;
};

// Raw `key = value` entries with their source lines.
struct ConfigEntry {
  std::string value;
  int line = 0;
};
using ConfigEntries = std::map<std::string, ConfigEntry>;

// Lexical pass: comments, blank lines, duplicate keys (reported with both lines).
ConfigEntries parse_entries(const std::string& text, std::vector<ConfigIssue>& errors);

// Typed pass plus cross-field checks. Every problem is reported, not just the first.
ParseResult build_config(const ConfigEntries& entries);

ParseResult parse_config(const std::string& text);

bool is_config_key(const std::string& key);

// Canonical text of every run-relevant key (no meta.* lines).
std::string to_text(const ExperimentConfig& config);

// Same run: canonical texts agree.
bool equivalent(const ExperimentConfig& a, const ExperimentConfig& b);

// Built-in desk-scale setups: svm, linreg, robust.
ExperimentConfig preset_base(const std::string& preset);

struct SweepSpec {
  ConfigEntries base;
  std::vector<std::pair<std::string, std::vector<std::string>>> params;  // one or two swept keys
  std::vector<std::uint64_t> seeds;
  std::string output_dir = "sweep_out";
};

struct SweepParseResult {
  std::optional<SweepSpec> spec;
  std::vector<ConfigIssue> errors;
};

// Config text plus sweep.param / sweep.values / sweep.param2 / sweep.values2 /
// sweep.seeds / sweep.output_dir.
SweepParseResult parse_sweep(const std::string& text);

}  // namespace dcda
