#pragma once

#include "dcda/channel.hpp"
#include "dcda/objectives.hpp"
#include "dcda/prox.hpp"
#include "dcda/schedule.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dcda {

// Local view of one node. Time indexing: after initialization a state holds z_i(1) = 0
// and x_i(1) = prox_project(0, alpha(0)); dcda_step(t) maps time t to t + 1.
struct NodeState {
  Vector z;
  Vector x;
  Vector x_sum;  // x_i(1) + ... + x_i(t)
  // Quantized channel only: z_i(t-1) (the encoder baseline) and g_i(t-1).
  Vector z_prev;
  Vector g_prev;
  Vector reconstruction;  // running sum of s(r) u_i(r), as rebuilt by every receiver
};

struct ReferenceSolution {
  Vector x_star;
  double f_star = 0.0;
  double psi_star = 0.0;  // normalized prox value at x_star
  std::string provenance;
  bool warning = false;  // long run had not stabilized
};

struct RunConfig {
  std::shared_ptr<const Problem> problem;
  SharePolicy policy;
  ChannelModel channel = PerfectChannel{};
  GradientMode gradient = ExactGradient{};
  long T = 100;
  StepSchedule step;
  std::uint64_t master_seed = 0;
  int metric_every = 1;
  std::optional<NodeData> test_set;             // enables the accuracy column
  std::optional<ReferenceSolution> reference;   // computed by dcda_run when absent
  bool log_messages = false;

  // Throws ConfigError on incompatible components.
  void validate() const;
};

struct TraceRow {
  long t = 0;
  int node = 0;
  double f_gap = 0.0;           // f(x_hat_i(t)) - f*
  double dual_consensus = 0.0;  // ||z_bar(t) - z_i(t)||_*
  double primal_spread = 0.0;   // max_{i,j} ||x_i(t) - x_j(t)||
  double gbar_norm = 0.0;       // ||g_bar(t)||_*
  double alpha = 0.0;           // alpha(t - 1), the step that produced x_i(t)
  double accuracy = 0.0;        // NaN without a test set
  double grad_norm = 0.0;       // ||g_i(t)||_*
  double x_norm = 0.0;          // ||x_i(t)||_2
  double y_norm = 0.0;          // ||prox_project(z_bar(t), alpha(t-1))||_2
  long long transmissions = 0;  // coordinate broadcasts made before time t
};

struct RunTrace {
  int n = 0;
  long T = 0;
  int metric_every = 1;
  std::vector<TraceRow> rows;  // ordered by (t, node)
  ReferenceSolution reference;
  double initial_gap = 0.0;
  std::vector<Vector> x_hat;  // x_hat_i(T)
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<QuantizedMessage> messages;

  // Rows at time t, or an empty span when t was thinned out.
  std::span<const TraceRow> at(long t) const;
  std::vector<long> times() const;
};

std::vector<NodeState> initial_states(const RunConfig& config);

// g_i(t) at x_i(t) for every node, exact or minibatch.
std::vector<Vector> gradients_at(const std::vector<NodeState>& states, long t, const RunConfig& config);

// One synchronous DCDA step from time t to t + 1. Returns the new states; throws
// NumericalError when a dual or primal entry becomes non-finite.
std::vector<NodeState> dcda_step(const std::vector<NodeState>& states, long t, const RunConfig& config,
                                 std::span<const Vector> gradients,
                                 std::vector<QuantizedMessage>* log = nullptr);

struct StepView {
  long t;
  const std::vector<NodeState>& before;
  std::span<const Vector> gradients;
  const std::vector<NodeState>& after;
};
using StepObserver = std::function<void(const StepView&)>;

RunTrace dcda_run(const RunConfig& config, const StepObserver& observer = {});

struct ConsensusError {
  double dual = 0.0;
  double primal = 0.0;
};

ConsensusError consensus_error(const std::vector<NodeState>& states, NormKind norm);

struct ReferenceOptions {
  long horizon = 2000;       // long runs use 100 * horizon iterations
  long iterations = 0;       // overrides 100 * horizon when positive
};

// Minimizer of f = sum_i f_i: conjugate gradient on the normal equations for
// unconstrained least squares, dual coordinate descent for the unconstrained SVM,
// and a long single-node dual averaging run (5-point step-constant grid) otherwise.
ReferenceSolution centralized_reference(const Problem& problem, const ReferenceOptions& options = {});

}  // namespace dcda
