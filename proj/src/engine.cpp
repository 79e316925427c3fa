#include "dcda/engine.hpp"

#include "dcda/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dcda {

namespace {

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

[[noreturn]] void diverged(long t, int node, const char* what) {
  std::ostringstream os;
  os << "numerical divergence at step t=" << t << ", node " << node << ": non-finite " << what;
  throw NumericalError(os.str());
}

// Senders whose coordinate k reaches at least one other node under P.
int broadcasting_senders(const Matrix& P) {
  int count = 0;
  for (Eigen::Index j = 0; j < P.cols(); ++j) {
    for (Eigen::Index i = 0; i < P.rows(); ++i) {
      if (i != j && P(i, j) > 0.0) {
        ++count;
        break;
      }
    }
  }
  return count;
}

}  // namespace

void RunConfig::validate() const {
  if (!problem) throw ConfigError("run config: no problem");
  problem->validate();
  if (T < 1) throw ConfigError("run config: T must be positive");
  if (!(step.C > 0.0) || !std::isfinite(step.C)) throw ConfigError("run config: step constant C must be positive");
  if (metric_every < 1) throw ConfigError("run config: metric cadence must be positive");
  if (policy.dimension() != problem->d) throw ConfigError("run config: policy dimension does not match problem d");
  if (policy.nodes() != problem->n) throw ConfigError("run config: policy size does not match problem n");
  if (const auto* mb = std::get_if<MiniBatch>(&gradient))
    if (mb->batch < 1 || mb->batch > problem->m) throw ConfigError("run config: minibatch size must lie in [1, m]");
  if (const auto* noisy = std::get_if<NoisyChannel>(&channel))
    if (!(noisy->gamma2 >= 0.0)) throw ConfigError("run config: noise power must be non-negative");
  if (const auto* q = std::get_if<QuantizedChannel>(&channel)) q->zoom.validate();
}

std::span<const TraceRow> RunTrace::at(long t) const {
  auto lo = std::lower_bound(rows.begin(), rows.end(), t, [](const TraceRow& r, long v) { return r.t < v; });
  auto hi = std::upper_bound(lo, rows.end(), t, [](long v, const TraceRow& r) { return v < r.t; });
  return {lo, hi};
}

std::vector<long> RunTrace::times() const {
  std::vector<long> out;
  for (const TraceRow& r : rows)
    if (out.empty() || out.back() != r.t) out.push_back(r.t);
  return out;
}

std::vector<NodeState> initial_states(const RunConfig& config) {
  const Problem& p = *config.problem;
  const Vector zero = Vector::Zero(p.d);
  const Vector x0 = prox_project(zero, config.step.at(0), p.prox, p.set);
  std::vector<NodeState> states(p.n);
  for (NodeState& s : states) {
    s.z = zero;
    s.x = x0;
    s.x_sum = x0;
    s.z_prev = zero;
    s.g_prev = zero;
    s.reconstruction = zero;
  }
  return states;
}

std::vector<Vector> gradients_at(const std::vector<NodeState>& states, long t, const RunConfig& config) {
  const Problem& p = *config.problem;
  std::vector<Vector> grads(states.size());
  for (int i = 0; i < p.n; ++i) {
    if (const auto* mb = std::get_if<MiniBatch>(&config.gradient))
      grads[i] = stochastic_subgradient(p, i, states[i].x, *mb, t);
    else
      grads[i] = subgradient(p, i, states[i].x);
  }
  return grads;
}

std::vector<NodeState> dcda_step(const std::vector<NodeState>& states, long t, const RunConfig& config,
                                 std::span<const Vector> gradients, std::vector<QuantizedMessage>* log) {
  if (t < 1) throw DomainError("dcda_step: t must be at least 1");
  const Problem& p = *config.problem;
  const int n = p.n;
  const int d = p.d;
  if (static_cast<int>(states.size()) != n || static_cast<int>(gradients.size()) != n)
    throw DomainError("dcda_step: state/gradient count does not match n");

  std::vector<NodeState> next = states;
  const auto* noisy = std::get_if<NoisyChannel>(&config.channel);
  const auto* quant = std::get_if<QuantizedChannel>(&config.channel);

  if (quant) {
    const double scale = quant->zoom.at(t);
    // Every node broadcasts the quantized increment of every coordinate; inactive
    // coordinates use the identity, so only the node itself consumes its symbol.
    Matrix symbols(n, d);
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < d; ++k) {
        const double delta = states[j].z[k] - states[j].z_prev[k];
        symbols(j, k) = static_cast<double>(quantize_delta(delta, scale, dither_at(quant->seed, j, k, t)));
      }
    }
    for (int k = 0; k < d; ++k) {
      const Matrix& P = config.policy.mixing_at(t, k);
      for (int i = 0; i < n; ++i) {
        double mixed = 0.0;
        for (int j = 0; j < n; ++j)
          if (P(i, j) > 0.0) mixed += P(i, j) * scale * symbols(j, k);
        next[i].z[k] = states[i].z[k] + gradients[i][k] - states[i].g_prev[k] + mixed;
      }
      if (log) {
        for (int j = 0; j < n; ++j) {
          QuantizedMessage msg{t, j, k, static_cast<std::int64_t>(symbols(j, k)), scale,
                               states[j].z[k] - states[j].z_prev[k], {}};
          for (int i = 0; i < n; ++i)
            if (i != j && P(i, j) > 0.0) msg.receivers.push_back(i);
          if (!msg.receivers.empty()) log->push_back(std::move(msg));
        }
      }
    }
    for (int i = 0; i < n; ++i) {
      next[i].z_prev = states[i].z;
      next[i].g_prev = gradients[i];
      next[i].reconstruction = states[i].reconstruction + scale * symbols.row(i).transpose();
    }
  } else {
    for (int k = 0; k < d; ++k) {
      const Matrix& P = config.policy.mixing_at(t, k);
      for (int i = 0; i < n; ++i) {
        double mixed = 0.0;
        for (int j = 0; j < n; ++j) {
          const double w = P(i, j);
          if (w <= 0.0) continue;
          double received = states[j].z[k];
          if (noisy && j != i) received += noise_at(*noisy, i, j, t, k, d);
          mixed += w * received;
        }
        next[i].z[k] = mixed + gradients[i][k];
      }
    }
  }

  const double alpha = config.step.at(t);
  for (int i = 0; i < n; ++i) {
    if (!next[i].z.allFinite()) diverged(t, i, "dual variable");
    next[i].x = prox_project(next[i].z, alpha, p.prox, p.set);
    if (!next[i].x.allFinite()) diverged(t, i, "primal variable");
    next[i].x_sum += next[i].x;
  }
  return next;
}

ConsensusError consensus_error(const std::vector<NodeState>& states, NormKind norm) {
  ConsensusError err;
  if (states.empty()) return err;
  Vector zbar = Vector::Zero(states.front().z.size());
  for (const NodeState& s : states) zbar += s.z;
  zbar /= static_cast<double>(states.size());
  for (const NodeState& s : states) err.dual = std::max(err.dual, dual_norm(zbar - s.z, norm));
  for (std::size_t i = 0; i < states.size(); ++i)
    for (std::size_t j = i + 1; j < states.size(); ++j)
      err.primal = std::max(err.primal, primal_norm(states[i].x - states[j].x, norm));
  return err;
}

RunTrace dcda_run(const RunConfig& config, const StepObserver& observer) {
  config.validate();
  const Problem& p = *config.problem;
  const int n = p.n;
  const NormKind norm = p.norm();

  RunTrace trace;
  trace.n = n;
  trace.T = config.T;
  trace.metric_every = config.metric_every;
  trace.reference = config.reference ? *config.reference
                                     : centralized_reference(p, ReferenceOptions{.horizon = config.T});
  const double f_star = trace.reference.f_star;

  std::vector<NodeState> states = initial_states(config);
  trace.initial_gap = eval_global(p, states.front().x) - f_star;
  trace.rows.reserve(static_cast<std::size_t>((config.T / config.metric_every + 1) * n));
  trace.x_hat.assign(n, Vector());
  std::vector<QuantizedMessage>* log = config.log_messages ? &trace.messages : nullptr;

  long long transmissions = 0;
  for (long t = 1; t <= config.T; ++t) {
    const std::vector<Vector> grads = gradients_at(states, t, config);

    if (t % config.metric_every == 0 || t == config.T) {
      const double alpha_prev = config.step.at(t - 1);
      Vector zbar = Vector::Zero(p.d);
      Vector gbar = Vector::Zero(p.d);
      for (int i = 0; i < n; ++i) {
        zbar += states[i].z;
        gbar += grads[i];
      }
      zbar /= n;
      gbar /= n;
      const Vector y = prox_project(zbar, alpha_prev, p.prox, p.set);
      const double gbar_norm = dual_norm(gbar, norm);
      double spread = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) spread = std::max(spread, primal_norm(states[i].x - states[j].x, norm));
      for (int i = 0; i < n; ++i) {
        const Vector x_hat = states[i].x_sum / static_cast<double>(t);
        TraceRow row;
        row.t = t;
        row.node = i;
        row.f_gap = eval_global(p, x_hat) - f_star;
        if (!std::isfinite(row.f_gap)) diverged(t, i, "objective");
        row.dual_consensus = dual_norm(zbar - states[i].z, norm);
        row.primal_spread = spread;
        row.gbar_norm = gbar_norm;
        row.alpha = alpha_prev;
        row.accuracy = config.test_set ? classification_accuracy(*config.test_set, x_hat)
                                       : std::numeric_limits<double>::quiet_NaN();
        row.grad_norm = dual_norm(grads[i], norm);
        row.x_norm = states[i].x.norm();
        row.y_norm = y.norm();
        row.transmissions = transmissions;
        trace.rows.push_back(row);
        if (t == config.T) trace.x_hat[i] = x_hat;
      }
    }

    std::vector<NodeState> next = dcda_step(states, t, config, grads, log);
    for (int k = 0; k < p.d; ++k) transmissions += broadcasting_senders(config.policy.mixing_at(t, k));
    if (observer) observer(StepView{t, states, grads, next});
    states = std::move(next);
  }

  auto& md = trace.metadata;
  md.emplace_back("family", to_string(p.loss));
  md.emplace_back("n", std::to_string(p.n));
  md.emplace_back("m", std::to_string(p.m));
  md.emplace_back("d", std::to_string(p.d));
  md.emplace_back("T", std::to_string(config.T));
  md.emplace_back("C", fmt_double(config.step.C));
  md.emplace_back("master_seed", std::to_string(config.master_seed));
  md.emplace_back("policy", config.policy.describe());
  md.emplace_back("channel", describe(config.channel));
  md.emplace_back("gradient", describe(config.gradient));
  md.emplace_back("prox", to_string(p.prox));
  md.emplace_back("set", p.set.name());
  md.emplace_back("metric_every", std::to_string(config.metric_every));
  md.emplace_back("f_star", fmt_double(f_star));
  md.emplace_back("f_star_provenance", trace.reference.provenance);
  md.emplace_back("reference_warning", trace.reference.warning ? "1" : "0");
  md.emplace_back("psi_star", fmt_double(trace.reference.psi_star));
  md.emplace_back("initial_gap", fmt_double(trace.initial_gap));
  return trace;
}

}  // namespace dcda
