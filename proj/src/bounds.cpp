#include "dcda/bounds.hpp"

#include "dcda/errors.hpp"

#include <algorithm>
#include <cmath>

namespace dcda {

namespace {

double alpha_sum(const StepSchedule& step, long T) {
  double acc = 0.0;
  for (long t = 1; t <= T; ++t) acc += step.at(t - 1);
  return acc;
}

double leading_term(double psi_star, const StepSchedule& step, long T) {
  return psi_star / (static_cast<double>(T) * step.at(T));
}

void require_horizon(long T) {
  if (T < 1) throw DomainError("bound: T must be positive");
}

void require_gap(double sigma2, const char* what) {
  if (!(sigma2 >= 0.0 && sigma2 < 1.0)) throw DomainError(std::string(what) + ": sigma2 must lie in [0, 1)");
}

void require_delta(double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("bound: delta must lie in (0, 1]");
}

}  // namespace

std::vector<std::vector<double>> bound_thm1_series(const RunTrace& trace, double psi_star, double L,
                                                   const StepSchedule& step) {
  const int n = trace.n;
  if (trace.metric_every != 1 || static_cast<long>(trace.rows.size()) != trace.T * n)
    throw ConfigError("bound_thm1: trace is thinned or incomplete; every step is needed");
  std::vector<std::vector<double>> out(trace.T, std::vector<double>(n));
  double gbar_acc = 0.0;
  double all_dev_acc = 0.0;
  std::vector<double> own_dev_acc(n, 0.0);
  for (long t = 1; t <= trace.T; ++t) {
    const auto rows = trace.at(t);
    if (static_cast<int>(rows.size()) != n) throw ConfigError("bound_thm1: missing rows at t = " + std::to_string(t));
    const double a = step.at(t - 1);
    gbar_acc += a * rows[0].gbar_norm * rows[0].gbar_norm;
    for (const TraceRow& r : rows) {
      all_dev_acc += a * r.dual_consensus;
      own_dev_acc[r.node] += a * r.dual_consensus;
    }
    const double Td = static_cast<double>(t);
    const double common = leading_term(psi_star, step, t) + gbar_acc / Td + 2.0 * L * all_dev_acc / (n * Td);
    for (int i = 0; i < n; ++i) out[t - 1][i] = common + L * own_dev_acc[i] / Td;
  }
  return out;
}

double bound_thm1(const RunTrace& trace, int node, long T, double psi_star, double L, const StepSchedule& step) {
  if (T < 1 || T > trace.T) throw DomainError("bound_thm1: horizon outside the trace");
  if (node < 0 || node >= trace.n) throw DomainError("bound_thm1: node index out of range");
  return bound_thm1_series(trace, psi_star, L, step)[T - 1][node];
}

double bound_static(double L, double psi_star, const StepSchedule& step, int d, int n, long T, double sigma2_max) {
  require_horizon(T);
  require_gap(sigma2_max, "bound_static");
  const double mins = std::min(d, n);
  const double log_term = std::log(std::sqrt(static_cast<double>(n)) * d * static_cast<double>(T));
  const double inner = 2.0 * mins * log_term / (1.0 - sigma2_max) + 3.0;
  return leading_term(psi_star, step, T) + L * L / T * 4.0 * inner * alpha_sum(step, T);
}

double bound_round_robin(double L, double psi_star, const StepSchedule& step, int d, int m, int n, long T,
                         double sigma2) {
  require_horizon(T);
  require_gap(sigma2, "bound_round_robin");
  if (m < 1 || d % m != 0) throw ConfigError("bound_round_robin: m must divide d");
  const double log_term = std::log(2.0 * std::sqrt(static_cast<double>(n)) * static_cast<double>(T));
  const double inner = 10.0 + 12.0 * d * log_term / (m * (1.0 - sigma2));
  return leading_term(psi_star, step, T) + L * L / T * inner * alpha_sum(step, T);
}

double bound_randomized(double L, double psi_star, const StepSchedule& step, int d, int n, long T,
                        double sigma2_expected_sq, double delta) {
  require_horizon(T);
  require_gap(sigma2_expected_sq, "bound_randomized");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("bound_randomized: delta must lie in (0, 1)");
  const double mins = std::min(d, n);
  const double log_term = std::log(static_cast<double>(T) * d * std::cbrt(static_cast<double>(n)) / delta);
  const double inner = 10.0 + 18.0 * mins * log_term / (1.0 - sigma2_expected_sq);
  return leading_term(psi_star, step, T) + L * L / T * inner * alpha_sum(step, T);
}

double bound_stochastic(double base, double L, double R, long T, double delta) {
  require_horizon(T);
  require_delta(delta);
  return base + L * R * std::sqrt(8.0 * std::log(1.0 / delta) / static_cast<double>(T));
}

double bound_noisy(double base, double L, double R, double gamma2, int n, int d, long T, const StepSchedule& step,
                   double sigma2_max, double delta) {
  require_horizon(T);
  require_gap(sigma2_max, "bound_noisy");
  require_delta(delta);
  if (!(gamma2 >= 0.0)) throw DomainError("bound_noisy: gamma2 must be non-negative");
  const double gamma = std::sqrt(gamma2);
  const double Td = static_cast<double>(T);
  const double head = gamma * (R + 2.0 * L) * std::sqrt(2.0 * std::log(3.0 / delta) / (n * Td));
  const double per_step = gamma2 * (1.0 + std::sqrt(8.0) * std::log(3.0 / delta)) / (n * d * Td) +
                          3.0 * L / Td *
                              std::sqrt(2.0 * gamma2 * std::log(6.0 * Td * n * d / delta) /
                                        (1.0 - sigma2_max * sigma2_max));
  return base + head + per_step * alpha_sum(step, T);
}

double nu_sequence(const ZoomSchedule& zoom, std::span<const double> sigma2_per_k, long t) {
  double best = 0.0;
  for (double q : sigma2_per_k) {
    double acc = 0.0;
    for (long r = 0; r <= t; ++r) {
      const double s = zoom.at(r);
      acc += s * s * std::pow(q, 2.0 * static_cast<double>(t - r + 1));
    }
    best = std::max(best, acc);
  }
  return best;
}

double bound_quantized(double base, double L, double R, const ZoomSchedule& zoom, int n, int d, long T,
                       const StepSchedule& step, std::span<const double> nu, double delta) {
  require_horizon(T);
  require_delta(delta);
  if (static_cast<long>(nu.size()) < T) throw DomainError("bound_quantized: need nu(t) for t = 1..T");
  const double Td = static_cast<double>(T);
  double s2_sum = 0.0;
  double tail = 0.0;
  for (long t = 1; t <= T; ++t) {
    const double s = zoom.at(t);
    s2_sum += s * s;
    tail += step.at(t - 1) * ((2.0 * s * L + s * s) / (n * Td) +
                              3.0 * L / Td * std::sqrt(2.0 * nu[t - 1] * std::log(2.0 * Td * n * d / delta)));
  }
  const double s2_hat = s2_sum / Td;
  return base + R * std::sqrt(s2_hat * std::log(1.0 / delta) / Td) + tail;
}

double certificate_lipschitz(const Problem& problem, const RunTrace& trace) {
  double radius = 0.0;
  double observed = 0.0;
  for (const TraceRow& r : trace.rows) {
    radius = std::max({radius, r.x_norm, r.y_norm});
    observed = std::max(observed, r.grad_norm);
  }
  return std::max(observed, lipschitz_bound_on_ball(problem, radius));
}

}  // namespace dcda
