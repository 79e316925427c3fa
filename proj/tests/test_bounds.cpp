#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dcda/bounds.hpp"
#include "dcda/errors.hpp"
#include "dcda/topology.hpp"

#include <cmath>
#include <memory>

using namespace dcda;

namespace {

double alpha_sum(const StepSchedule& s, long T) {
  double a = 0.0;
  for (long t = 1; t <= T; ++t) a += s.at(t - 1);
  return a;
}

RunTrace run(const Problem& p, const SharePolicy& policy, long T, double C) {
  RunConfig c;
  c.problem = std::make_shared<const Problem>(p);
  c.policy = policy;
  c.T = T;
  c.step.C = C;
  return dcda_run(c);
}

}  // namespace

TEST_CASE("thm1: single node with zero gradients reduces to the leading term") {
  Problem p = gen_linreg(LinregParams{1, 3, 2, 0.0, 0.0, 1});
  for (NodeData& nd : p.nodes) {
    nd.features.setZero();
    nd.targets.setZero();
  }
  const StepSchedule step{0.5};
  const RunTrace tr = run(p, SharePolicy::make_static({Matrix::Identity(1, 1)}, 2), 40, 0.5);
  for (long T : {1L, 7L, 40L})
    CHECK(bound_thm1(tr, 0, T, 2.0, 3.0, step) == doctest::Approx(2.0 / (T * step.at(T))).epsilon(1e-14));
  CHECK_THROWS_AS(bound_thm1(tr, 0, 41, 2.0, 3.0, step), DomainError);
}

TEST_CASE("thm1 matches a direct sum over the trace columns") {
  const Problem p = gen_svm(SvmParams{4, 5, 3, {}, {}, 1.0, 1.0, 2});
  const StepSchedule step{0.1};
  const RunTrace tr = run(p, SharePolicy::make_randomized_all_to_all(4, 1.0, 3, 1), 30, 0.1);
  const double L = 100.0;
  double gsum = 0.0, net = 0.0;
  std::vector<double> own(4, 0.0);
  for (long t = 1; t <= 30; ++t) {
    const double a = step.at(t - 1);
    gsum += a * std::pow(tr.at(t).front().gbar_norm, 2);
    for (const TraceRow& r : tr.at(t)) {
      if (t == 1) CHECK(r.dual_consensus == 0.0);
      net += a * r.dual_consensus;
      own[r.node] += a * r.dual_consensus;
    }
    for (int i = 0; i < 4; ++i) {
      const double expected = 1.5 / (t * step.at(t)) + gsum / t + 2.0 * L * net / (4.0 * t) + L * own[i] / t;
      CHECK(bound_thm1(tr, i, t, 1.5, L, step) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("thm1 dominates the network-average gap on a linreg run") {
  const Problem p = gen_linreg(LinregParams{6, 10, 8, 1.0, 0.0, 12});
  const StepSchedule step{0.01};
  const RunTrace tr = run(p, SharePolicy::make_round_robin(mixing_from_graph(make_ring(6, 1)), 4, 8), 300, 0.01);
  const double L = certificate_lipschitz(p, tr);
  const auto series = bound_thm1_series(tr, tr.reference.psi_star, L, step);
  for (long t = 1; t <= 300; ++t)
    for (const TraceRow& r : tr.at(t)) CHECK(r.f_gap / p.n <= series[t - 1][r.node] * (1 + 1e-7));
}

TEST_CASE("thm1 needs an unthinned trace") {
  const Problem p = gen_linreg(LinregParams{2, 3, 2, 0.0, 0.0, 1});
  RunConfig c;
  c.problem = std::make_shared<const Problem>(p);
  c.policy = SharePolicy::make_static({Matrix::Identity(2, 2)}, 2);
  c.T = 10;
  c.metric_every = 2;
  const RunTrace tr = dcda_run(c);
  CHECK_THROWS_AS(bound_thm1_series(tr, 1.0, 1.0, StepSchedule{}), ConfigError);
}

TEST_CASE("lemma for static sharing") {
  const StepSchedule step{1.0};
  // d = n = 1, sigma2 = 0, T = 1: psi*/alpha(1) + 4 L^2 alpha(0) (2 log(1) + 3).
  CHECK(bound_static(2.0, 0.5, step, 1, 1, 1, 0.0) == doctest::Approx(0.5 + 4 * 4.0 * 3.0).epsilon(1e-12));
  const long T = 50;
  const double direct = 0.5 / (T * step.at(T)) +
                        9.0 / T * 4.0 * (2.0 * 1 * std::log(1.0 * 1 * T) / 1.0 + 3.0) * alpha_sum(step, T);
  CHECK(std::abs(bound_static(3.0, 0.5, step, 1, 1, T, 0.0) - direct) <= 1e-12 * direct);

  double previous = 0.0;
  for (double s2 = 0.0; s2 < 0.99; s2 += 0.05) {
    const double b = bound_static(1.0, 1.0, step, 5, 4, 100, s2);
    CHECK(b > previous);
    CHECK(std::isfinite(b));
    previous = b;
  }
  CHECK_THROWS_AS(bound_static(1.0, 1.0, step, 5, 4, 100, 1.0), DomainError);

  // With d = 1 the min(d, n) inflation disappears.
  const double lead = 1.0 / (100 * step.at(100));
  const double coeff_d1 = (bound_static(1.0, 1.0, step, 1, 8, 100, 0.5) - lead) / alpha_sum(step, 100);
  const double coeff_d4 = (bound_static(1.0, 1.0, step, 4, 8, 100, 0.5) - lead) / alpha_sum(step, 100);
  const double log1 = std::log(std::sqrt(8.0) * 1 * 100), log4 = std::log(std::sqrt(8.0) * 4 * 100);
  CHECK((coeff_d1 * 100 / 4 - 3) / (2 * log1 / 0.5) == doctest::Approx(1.0));
  CHECK((coeff_d4 * 100 / 4 - 3) / (2 * log4 / 0.5) == doctest::Approx(4.0));
}

TEST_CASE("static lemma decays like sqrt(log T / T) with a tuned step") {
  double previous = 0.0;
  for (long T : {10000L, 100000L, 1000000L}) {
    const StepSchedule step{1.0 / std::sqrt(std::log(static_cast<double>(T)))};
    const double ratio = bound_static(1.0, 1.0, step, 3, 3, T, 0.5) / std::sqrt(std::log(T) / T);
    if (previous > 0.0) CHECK(std::abs(ratio / previous - 1.0) < 0.05);
    previous = ratio;
  }
}

TEST_CASE("lemma for round robin") {
  const StepSchedule step{0.3};
  const long T = 200;
  const double lead = 2.0 / (T * step.at(T));
  auto schedule_term = [&](int m) {
    return ((bound_round_robin(1.0, 2.0, step, 12, m, 5, T, 0.4) - lead) * T / alpha_sum(step, T)) - 10.0;
  };
  CHECK(schedule_term(3) / schedule_term(6) == doctest::Approx(2.0).epsilon(1e-12));
  const double full = 12.0 * 12 * std::log(2.0 * std::sqrt(5.0) * T) / (12 * 0.6);
  CHECK(schedule_term(12) == doctest::Approx(full).epsilon(1e-12));
  for (int m : {1, 2, 3, 4, 6, 12}) CHECK(bound_round_robin(1.0, 2.0, step, 12, m, 5, T, 0.4) > 0.0);
  CHECK_THROWS_AS(bound_round_robin(1.0, 2.0, step, 12, 5, 5, T, 0.4), ConfigError);
  CHECK_THROWS_AS(bound_round_robin(1.0, 2.0, step, 12, 4, 5, T, 1.0), DomainError);
}

TEST_CASE("lemma for randomized sharing") {
  const StepSchedule step{0.3};
  double best = std::numeric_limits<double>::infinity();
  double previous = std::numeric_limits<double>::infinity();
  for (double rho : {0.1, 0.25, 0.5, 0.75, 1.0}) {
    const double s2 = second_singular_value(SharePolicy::make_randomized_all_to_all(6, rho, 4, 1).expected_squared_mixing(0));
    const double b = bound_randomized(1.0, 1.0, step, 4, 6, 100, s2, 0.05);
    CHECK(b < previous);
    previous = b;
    best = std::min(best, b);
  }
  CHECK(previous == best);
  CHECK(bound_randomized(1.0, 1.0, step, 4, 6, 100, 0.0, 1e-300) > bound_randomized(1.0, 1.0, step, 4, 6, 100, 0.0, 1e-10));
  CHECK_THROWS_AS(bound_randomized(1.0, 1.0, step, 4, 6, 100, 0.0, 0.0), DomainError);
  CHECK_THROWS_AS(bound_randomized(1.0, 1.0, step, 4, 6, 100, 0.0, 1.0), DomainError);
}

TEST_CASE("lemma for stochastic gradients") {
  CHECK(bound_stochastic(3.0, 2.0, 5.0, 100, 1.0) == 3.0);
  CHECK(bound_stochastic(3.0, 0.0, 5.0, 100, 0.1) == 3.0);
  const double a1 = bound_stochastic(0.0, 2.0, 5.0, 100, 0.1);
  const double a4 = bound_stochastic(0.0, 2.0, 5.0, 400, 0.1);
  CHECK(a1 / a4 == doctest::Approx(2.0).epsilon(1e-14));
  CHECK_THROWS_AS(bound_stochastic(0.0, 2.0, 5.0, 100, 0.0), DomainError);
  CHECK_THROWS_AS(bound_stochastic(0.0, 2.0, 5.0, 100, 1.5), DomainError);
}

TEST_CASE("lemma for noisy links") {
  const StepSchedule step{0.2};
  CHECK(bound_noisy(4.0, 1.0, 2.0, 0.0, 5, 3, 100, step, 0.5, 0.05) == 4.0);
  double previous = 4.0;
  for (double g2 : {0.01, 0.1, 1.0, 10.0}) {
    const double b = bound_noisy(4.0, 1.0, 2.0, g2, 5, 3, 100, step, 0.5, 0.05);
    CHECK(b > previous);
    previous = b;
  }
  previous = 0.0;
  for (double s2 : {0.0, 0.3, 0.6, 0.9}) {
    const double b = bound_noisy(4.0, 1.0, 2.0, 1.0, 5, 3, 100, step, s2, 0.05);
    CHECK(b > previous);
    previous = b;
  }
  CHECK_THROWS_AS(bound_noisy(4.0, 1.0, 2.0, 1.0, 5, 3, 100, step, 1.0, 0.05), DomainError);
}

TEST_CASE("nu sequence") {
  const ZoomSchedule z{0.7, 0.9};
  const std::vector<double> zero{0.0, 0.0};
  CHECK(nu_sequence(z, zero, 10) == 0.0);
  const ZoomSchedule constant{0.7, 1.0};
  const double q = 0.6;
  const std::vector<double> sq{q, 0.1};
  for (long t : {0L, 1L, 5L, 40L}) {
    const double closed = 0.49 * q * q * (1 - std::pow(q, 2.0 * (t + 1))) / (1 - q * q);
    CHECK(nu_sequence(constant, sq, t) == doctest::Approx(closed).epsilon(1e-13));
    CHECK(nu_sequence(z, sq, t) >= 0.0);
  }
}

TEST_CASE("lemma for quantized links") {
  const StepSchedule step{0.2};
  auto eval = [&](double s0, long T) {
    const ZoomSchedule z{s0, 0.95};
    std::vector<double> nu;
    for (long t = 1; t <= T; ++t) nu.push_back(nu_sequence(z, std::vector<double>(3, 0.5), t));
    return bound_quantized(1.0, 1.0, 2.0, z, 4, 3, T, step, nu, 0.05);
  };
  CHECK(eval(1e-300, 50) == doctest::Approx(1.0).epsilon(1e-12));
  double previous = 1.0;
  for (double s0 : {0.01, 0.1, 1.0, 5.0}) {
    const double b = eval(s0, 50);
    CHECK(b > previous);
    previous = b;
  }
  // The addend sum converges: T times its T-normalized tail settles.
  auto tail = [&](long T) { return (eval(1.0, T) - 1.0) * T; };
  const double t1 = tail(2000), t2 = tail(4000);
  CHECK(std::abs(t2 - t1) < 0.25 * t1);
  CHECK_THROWS_AS(bound_quantized(1.0, 1.0, 2.0, ZoomSchedule{}, 4, 3, 10, step, std::vector<double>(5, 0.0), 0.05),
                  DomainError);
}

TEST_CASE("closed-form bounds are positive, finite and continuous on a grid") {
  const StepSchedule step{0.5};
  for (double L : {0.1, 1.0, 10.0})
    for (double s2 : {0.0, 0.5, 0.9}) {
      const double b = bound_static(L, 1.0, step, 4, 5, 100, s2);
      const double nearby = bound_static(L * (1 + 1e-9), 1.0, step, 4, 5, 100, s2 + 1e-9);
      CHECK(b > 0.0);
      CHECK(std::isfinite(b));
      CHECK(std::abs(nearby - b) < 1e-6 * b);
      const double r = bound_randomized(L, 1.0, step, 4, 5, 100, s2, 0.1);
      CHECK(r > 0.0);
      CHECK(std::abs(bound_randomized(L, 1.0, step, 4, 5, 100, s2 + 1e-9, 0.1) - r) < 1e-6 * r);
    }
}
