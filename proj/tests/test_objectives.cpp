#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dcda/errors.hpp"
#include "dcda/objectives.hpp"

#include <cmath>
#include <filesystem>
#include <random>

using namespace dcda;

namespace {

Vector random_point(const Problem& p, std::mt19937_64& gen, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Vector v(p.d);
  for (int k = 0; k < p.d; ++k) v[k] = nd(gen);
  if (p.set.kind() == FeasibleSet::Kind::simplex) {
    v = v.array().exp().matrix();
    v /= v.sum();
  }
  return v;
}

std::vector<Problem> small_problems() {
  return {gen_svm(SvmParams{3, 6, 5, {}, {}, 1.0, 1.0, 1}), gen_linreg(LinregParams{3, 6, 5, 0.5, 0.0, 2}),
          gen_robust(RobustParams{3, 6, 5, 0.2, 10.0, 0.3, 3})};
}

}  // namespace

TEST_CASE("generators use the configured scale and are reproducible") {
  const Problem svm = gen_svm(SvmParams{});
  CHECK(svm.n == 10);
  CHECK(svm.m == 10);
  CHECK(svm.d == 30);
  const Problem lin = gen_linreg(LinregParams{});
  CHECK(lin.m == 20);
  CHECK(lin.d == 30);
  const Problem rob = gen_robust(RobustParams{});
  CHECK(rob.d == 20);
  CHECK(rob.m == 10);
  CHECK(rob.prox == ProxKind::entropic);
  CHECK(rob.set.kind() == FeasibleSet::Kind::simplex);
  CHECK(rob.set.contains(*rob.planted, 1e-12));

  const Problem svm2 = gen_svm(SvmParams{});
  for (int i = 0; i < svm.n; ++i) {
    CHECK(svm.nodes[i].features == svm2.nodes[i].features);
    CHECK(svm.nodes[i].targets == svm2.nodes[i].targets);
  }
  const Problem rob2 = gen_robust(RobustParams{});
  CHECK(rob.nodes[3].targets == rob2.nodes[3].targets);
}

TEST_CASE("svm labels are balanced and hinge is half active for coincident classes") {
  SvmParams params;
  params.n = 20;
  params.m = 50;
  params.d = 4;
  params.mu_plus = Vector::Constant(4, 0.3);
  params.mu_minus = Vector::Constant(4, 0.3);
  params.sigma = 0.0;
  const Problem p = gen_svm(params);
  int positive = 0;
  int active = 0;
  const Vector x = Vector::Constant(4, 1.0);
  for (const NodeData& nd : p.nodes)
    for (int j = 0; j < p.m; ++j) {
      positive += nd.targets[j] > 0;
      active += 1.0 - nd.targets[j] * nd.features.row(j).dot(x) > 0.0;
    }
  const double total = p.n * p.m;
  CHECK(std::abs(positive / total - 0.5) < 0.05);
  CHECK(std::abs(active / total - 0.5) < 0.05);
}

TEST_CASE("objective examples") {
  const Problem lin = gen_linreg(LinregParams{4, 8, 6, 0.0, 0.0, 5});
  CHECK(eval_global(lin, *lin.planted) == doctest::Approx(0.0).epsilon(1e-20));
  for (int i = 0; i < lin.n; ++i) CHECK(subgradient(lin, i, *lin.planted).norm() < 1e-12);

  const Problem noisy = gen_linreg(LinregParams{4, 8, 6, 0.7, 0.0, 5});
  double half_noise = 0.0;
  for (const NodeData& nd : noisy.nodes) half_noise += 0.5 * (nd.targets - nd.features * *noisy.planted).squaredNorm();
  CHECK(eval_global(noisy, *noisy.planted) == doctest::Approx(half_noise).epsilon(1e-12));

  const Problem svm = gen_svm(SvmParams{4, 7, 5, {}, {}, 1.0, 2.5, 9});
  CHECK(eval_global(svm, Vector::Zero(5)) == doctest::Approx(4 * 7 * 2.5));

  const Problem rob = gen_robust(RobustParams{3, 5, 4, 0.3, 10.0, 0.3, 1});
  const Vector x = Vector::Constant(4, 0.25);
  double l1 = 0.0;
  for (const NodeData& nd : rob.nodes) l1 += (nd.features * x - nd.targets).cwiseAbs().sum();
  CHECK(eval_global(rob, x) == doctest::Approx(l1).epsilon(1e-14));
}

TEST_CASE("subgradient special cases") {
  // Every margin above one: only the regularizer is left.
  Problem svm = gen_svm(SvmParams{2, 5, 3, {}, {}, 0.0, 1.0, 4});
  Vector x = Vector::Constant(3, 0.0);
  for (NodeData& nd : svm.nodes)
    for (int j = 0; j < svm.m; ++j) nd.features.row(j) = nd.targets[j] * Vector::Constant(3, 1.0).transpose();
  x.setConstant(2.0);
  CHECK((subgradient(svm, 0, x) - x / 3.0).norm() < 1e-15);
  // Margin exactly one takes the zero element.
  x.setConstant(1.0 / 3.0);
  CHECK((subgradient(svm, 1, x) - x / 3.0).norm() < 1e-15);

  // l1 with every residual positive: A^T 1.
  Problem rob = gen_robust(RobustParams{1, 6, 4, 0.0, 1.0, 0.1, 2});
  rob.nodes[0].targets.setConstant(-100.0);
  const Vector g = subgradient(rob, 0, Vector::Constant(4, 0.25));
  CHECK((g - rob.nodes[0].features.transpose() * Vector::Ones(6)).norm() < 1e-12);
  // Zero residual contributes nothing.
  rob.nodes[0].targets = rob.nodes[0].features * Vector::Constant(4, 0.25);
  CHECK(subgradient(rob, 0, Vector::Constant(4, 0.25)).norm() < 1e-12);

  CHECK_THROWS_AS(subgradient(rob, 0, Vector::Zero(3)), DomainError);
  CHECK_THROWS_AS(subgradient(rob, 4, Vector::Zero(4)), DomainError);
}

TEST_CASE("convexity and subgradient inequality on random triples") {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const Problem& p : small_problems()) {
    for (int s = 0; s < 1000; ++s) {
      const int i = s % p.n;
      const Vector x = random_point(p, gen, 2.0);
      const Vector y = random_point(p, gen, 2.0);
      const double lam = unit(gen);
      const Vector mid = lam * x + (1 - lam) * y;
      const double fx = local_objective(p, i, x), fy = local_objective(p, i, y);
      CHECK(local_objective(p, i, mid) <= lam * fx + (1 - lam) * fy + 1e-9 * (1 + std::abs(fx) + std::abs(fy)));
      const Vector g = subgradient(p, i, x);
      CHECK(fy >= fx + g.dot(y - x) - 1e-9 * (1 + std::abs(fx) + std::abs(fy)));
    }
  }
}

TEST_CASE("minibatch gradient") {
  const Problem lin = gen_linreg(LinregParams{2, 20, 5, 1.0, 0.0, 8});
  const Vector x = Vector::LinSpaced(5, -1, 1);
  CHECK((stochastic_subgradient(lin, 1, x, MiniBatch{20, 3}, 7) - subgradient(lin, 1, x)).norm() < 1e-10);
  CHECK(stochastic_subgradient(lin, 1, x, MiniBatch{4, 3}, 7) == stochastic_subgradient(lin, 1, x, MiniBatch{4, 3}, 7));
  CHECK_THROWS_AS(stochastic_subgradient(lin, 1, x, MiniBatch{0, 3}, 7), ConfigError);
  CHECK_THROWS_AS(stochastic_subgradient(lin, 1, x, MiniBatch{21, 3}, 7), ConfigError);

  for (const Problem& p : {gen_linreg(LinregParams{2, 20, 5, 1.0, 0.0, 8}), gen_svm(SvmParams{2, 20, 5, {}, {}, 1.0, 1.0, 8})}) {
    const Vector exact = subgradient(p, 0, x);
    Vector acc = Vector::Zero(p.d);
    const int draws = 10000;
    for (long t = 1; t <= draws; ++t) acc += stochastic_subgradient(p, 0, x, MiniBatch{4, 11}, t);
    acc /= draws;
    CHECK((acc - exact).norm() <= 0.02 * exact.norm());
  }
}

TEST_CASE("lipschitz estimates") {
  // Zero data on a ball: every gradient is zero.
  Problem zero = gen_linreg(LinregParams{2, 3, 4, 0.0, 1.0, 1});
  for (NodeData& nd : zero.nodes) {
    nd.features.setZero();
    nd.targets.setZero();
  }
  CHECK(lipschitz_estimate(zero).value == 0.0);

  // l1 loss with entries in [-1, 1]: bounded by m * d, and certified.
  Problem rob = gen_robust(RobustParams{3, 6, 4, 0.1, 10.0, 0.3, 2});
  for (NodeData& nd : rob.nodes) nd.features = nd.features.cwiseMax(-1.0).cwiseMin(1.0);
  const LipschitzEstimate est = lipschitz_estimate(rob);
  CHECK(est.certified);
  CHECK(est.value <= rob.m * rob.d);

  // The estimate dominates sampled gradient norms on the feasible set.
  std::mt19937_64 gen(4);
  const Problem rob_default = gen_robust(RobustParams{});
  const double L = lipschitz_estimate(rob_default).value;
  for (int s = 0; s < 500; ++s) {
    const Vector x = random_point(rob_default, gen, 3.0);
    for (int i = 0; i < rob_default.n; ++i) CHECK(dual_norm(subgradient(rob_default, i, x), NormKind::l1) <= L);
  }
  const Problem ball = gen_linreg(LinregParams{3, 6, 5, 0.5, 2.0, 6});
  CHECK_FALSE(lipschitz_estimate(ball).certified);
  CHECK(lipschitz_estimate(ball).value <= lipschitz_bound_on_ball(ball, 2.0) * 1.1 + 1e-12);
}

TEST_CASE("classification accuracy") {
  NodeData data{Matrix(4, 2), Vector(4)};
  data.features << 1, 0, -1, 0, 0, 1, 0, -1;
  data.targets << 1, -1, 1, 1;
  Vector x(2);
  x << 1, 0;
  CHECK(classification_accuracy(data, x) == 0.5);  // rows 3 and 4 score zero
}

TEST_CASE("dataset csv round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "dcda_dataset_test";
  std::filesystem::remove_all(dir);
  for (const Problem& p : small_problems()) {
    write_problem_csv(p, dir);
    const Problem back = read_problem_csv(dir, p.loss, p.c_svm);
    CHECK(back.n == p.n);
    CHECK(back.m == p.m);
    CHECK(back.d == p.d);
    for (int i = 0; i < p.n; ++i) {
      CHECK(back.nodes[i].features == p.nodes[i].features);
      CHECK(back.nodes[i].targets == p.nodes[i].targets);
    }
    std::filesystem::remove_all(dir);
  }
}
