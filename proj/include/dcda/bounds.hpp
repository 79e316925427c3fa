#pragma once

#include "dcda/channel.hpp"
#include "dcda/engine.hpp"
#include "dcda/prox.hpp"

#include <span>
#include <vector>

namespace dcda {

// Evaluators of the DCDA convergence bounds. All bounds control the gap of the
// network-average objective (1/n) sum_i f_i; sums run over t = 1..T and use
// alpha(t - 1). Logarithms are natural.

// Trace-based certificate for one node at horizon T (rows 1..T must all be present):
//   psi*/(T alpha(T)) + (1/T) sum alpha(t-1) ||gbar(t)||_*^2
//   + (2L/(nT)) sum_t sum_j alpha(t-1) ||zbar(t) - z_j(t)||_*
//   + (L/T) sum_t alpha(t-1) ||zbar(t) - z_i(t)||_*
double bound_thm1(const RunTrace& trace, int node, long T, double psi_star, double L, const StepSchedule& step);

// Same certificate for every prefix T = 1..trace.T; result[T-1][i].
std::vector<std::vector<double>> bound_thm1_series(const RunTrace& trace, double psi_star, double L,
                                                   const StepSchedule& step);

// Static sharing: psi*/(T alpha(T)) + (L^2/T) sum 4 alpha(t-1) (2 min(d,n) log(sqrt(n) d T)/(1 - sigma2_max) + 3).
double bound_static(double L, double psi_star, const StepSchedule& step, int d, int n, long T, double sigma2_max);

// Round robin, m coordinates per slot:
// psi*/(T alpha(T)) + (L^2/T) sum alpha(t-1) (10 + 12 d log(2 sqrt(n) T) / (m (1 - sigma2))).
double bound_round_robin(double L, double psi_star, const StepSchedule& step, int d, int m, int n, long T,
                         double sigma2);

// Randomized sharing, with probability 1 - delta:
// psi*/(T alpha(T)) + (L^2/T) sum alpha(t-1) (10 + 18 min(d,n) log(T d n^(1/3) / delta) / (1 - sigma2_expected_sq)).
double bound_randomized(double L, double psi_star, const StepSchedule& step, int d, int n, long T,
                        double sigma2_expected_sq, double delta);

// Stochastic gradients: base + L R sqrt(8 log(1/delta) / T). delta in (0, 1].
double bound_stochastic(double base, double L, double R, long T, double delta);

// Noisy links (static sharing): base + gamma (R + 2L) sqrt(2 log(3/delta)/(nT))
//   + sum alpha(t-1) (gamma^2 (1 + sqrt(8) log(3/delta))/(n d T) + (3L/T) sqrt(2 gamma^2 log(6Tnd/delta)/(1 - sigma2_max^2))).
double bound_noisy(double base, double L, double R, double gamma2, int n, int d, long T, const StepSchedule& step,
                   double sigma2_max, double delta);

// nu(t) = max_k sum_{r=0}^{t} s(r)^2 sigma2_k^(2(t - r + 1)).
double nu_sequence(const ZoomSchedule& zoom, std::span<const double> sigma2_per_k, long t);

// Quantized links (static sharing), nu[t-1] = nu(t):
// base + R sqrt(s2hat(T) log(1/delta) / T)
//   + sum alpha(t-1) ((2 s(t) L + s(t)^2)/(nT) + (3L/T) sqrt(2 nu(t) log(2Tnd/delta))),
// with s2hat(T) the time average of s(t)^2 over t = 1..T.
double bound_quantized(double base, double L, double R, const ZoomSchedule& zoom, int n, int d, long T,
                       const StepSchedule& step, std::span<const double> nu, double delta);

// Lipschitz constant valid for a certificate on this trace: the closed-form ball
// bound at the largest iterate/auxiliary norm seen, never below an observed gradient norm.
double certificate_lipschitz(const Problem& problem, const RunTrace& trace);

}  // namespace dcda
