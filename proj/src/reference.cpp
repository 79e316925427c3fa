#include "dcda/engine.hpp"

#include "dcda/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace dcda {

namespace {

struct Stacked {
  Matrix features;
  Vector targets;
};

Stacked stack(const Problem& p) {
  Stacked s{Matrix(p.n * p.m, p.d), Vector(p.n * p.m)};
  for (int i = 0; i < p.n; ++i) {
    s.features.middleRows(i * p.m, p.m) = p.nodes[i].features;
    s.targets.segment(i * p.m, p.m) = p.nodes[i].targets;
  }
  return s;
}

Vector global_subgradient(const Problem& p, const Stacked& s, const Vector& x) {
  const Vector fit = s.features * x;
  switch (p.loss) {
    case LossKind::svm_hinge: {
      Vector coef = Vector::Zero(fit.size());
      for (Eigen::Index j = 0; j < fit.size(); ++j)
        if (s.targets[j] * fit[j] < 1.0) coef[j] = -p.c_svm * s.targets[j];
      return static_cast<double>(p.n) / p.d * x + s.features.transpose() * coef;
    }
    case LossKind::least_squares:
      return s.features.transpose() * (fit - s.targets);
    case LossKind::l1_regression: {
      const Vector r = fit - s.targets;
      return s.features.transpose() * r.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
    }
  }
  return Vector::Zero(p.d);
}

ReferenceSolution finish(const Problem& p, Vector x, std::string provenance, bool warning) {
  ReferenceSolution ref;
  ref.f_star = eval_global(p, x);
  ref.psi_star = prox_value_normalized(x, p.prox, p.set);
  ref.x_star = std::move(x);
  ref.provenance = std::move(provenance);
  ref.warning = warning;
  return ref;
}

ReferenceSolution least_squares_cg(const Problem& p) {
  Matrix h = Matrix::Zero(p.d, p.d);
  Vector c = Vector::Zero(p.d);
  for (const NodeData& nd : p.nodes) {
    h.noalias() += nd.features.transpose() * nd.features;
    c.noalias() += nd.features.transpose() * nd.targets;
  }
  Vector x = Vector::Zero(p.d);
  Vector r = c;
  Vector dir = r;
  double rr = r.squaredNorm();
  const double target = 1e-10 * std::max(1.0, c.norm());
  long it = 0;
  const long cap = 50L * p.d + 100;
  bool converged = std::sqrt(rr) <= target;
  for (; !converged && it < cap; ++it) {
    const Vector hd = h * dir;
    const double curvature = dir.dot(hd);
    if (curvature <= 0.0) break;
    const double step = rr / curvature;
    x += step * dir;
    // Recompute the residual from scratch now and then to stop drift.
    r = (it % 20 == 19) ? Vector(c - h * x) : Vector(r - step * hd);
    const double rr_next = r.squaredNorm();
    converged = std::sqrt(rr_next) <= target;
    dir = r + (rr_next / rr) * dir;
    rr = rr_next;
  }
  const double residual = (c - h * x).norm();
  std::ostringstream os;
  os << "normal_equations_cg(iterations=" << it << ",residual=" << residual << ")";
  return finish(p, std::move(x), os.str(), residual > target);
}

// Dual coordinate descent for min (n / 2d) ||x||^2 + C sum hinge, rescaled to
// 0.5 ||x||^2 + U sum hinge with box constraint 0 <= a_j <= U.
ReferenceSolution svm_dual_cd(const Problem& p) {
  const Stacked s = stack(p);
  const Eigen::Index count = s.targets.size();
  const double upper = p.c_svm * p.d / static_cast<double>(p.n);
  Vector a = Vector::Zero(count);
  Vector w = Vector::Zero(p.d);
  const Vector diag = s.features.rowwise().squaredNorm();
  std::vector<Eigen::Index> order(count);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 gen(0xd1a1);
  double violation = 0.0;
  long epoch = 0;
  constexpr long kMaxEpochs = 200000;
  for (; epoch < kMaxEpochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), gen);
    violation = 0.0;
    for (Eigen::Index j : order) {
      if (diag[j] <= 0.0) continue;
      const double label = s.targets[j];
      const double grad = label * s.features.row(j).dot(w) - 1.0;
      double projected = grad;
      if (a[j] <= 0.0) projected = std::min(grad, 0.0);
      else if (a[j] >= upper) projected = std::max(grad, 0.0);
      violation = std::max(violation, std::abs(projected));
      if (projected == 0.0) continue;
      const double next = std::clamp(a[j] - grad / diag[j], 0.0, upper);
      w += (next - a[j]) * label * s.features.row(j).transpose();
      a[j] = next;
    }
    if (violation <= 1e-10) break;
  }
  std::ostringstream os;
  os << "svm_dual_cd(epochs=" << epoch << ",violation=" << violation << ")";
  return finish(p, std::move(w), os.str(), violation > 1e-10);
}

ReferenceSolution long_dual_averaging(const Problem& p, long iterations) {
  const Stacked s = stack(p);
  double lip_sum = 0.0;
  double scale = 1.0;
  if (p.set.kind() == FeasibleSet::Kind::simplex) {
    lip_sum = p.n * lipschitz_bound_on_ball(p, 1.0);
    scale = std::sqrt(2.0 * std::log(std::max(2, p.d)));
  } else {
    const double radius = p.set.kind() == FeasibleSet::Kind::l2_ball ? p.set.radius() : std::sqrt(p.d);
    lip_sum = p.n * lipschitz_bound_on_ball(p, radius);
    scale = radius;
  }
  const double c0 = scale / std::max(lip_sum, 1e-12);
  const double grid[] = {c0 / 9.0, c0 / 3.0, c0, 3.0 * c0, 9.0 * c0};
  const long checkpoint = std::max(1L, iterations / 200);
  const long late = iterations - iterations / 10;

  Vector best_x = prox_project(Vector::Zero(p.d), grid[2], p.prox, p.set);
  double best_f = eval_global(p, best_x);
  double best_c = grid[2];
  bool warning = false;
  if (p.planted && p.set.contains(*p.planted, 1e-9)) {
    const double f = eval_global(p, *p.planted);
    if (f < best_f) {
      best_f = f;
      best_x = *p.planted;
    }
  }

  for (double c : grid) {
    const StepSchedule sched{c};
    Vector z = Vector::Zero(p.d);
    Vector x = prox_project(z, sched.at(0), p.prox, p.set);
    Vector sum = x;
    Vector run_x = x;
    double run_f = eval_global(p, x);
    double run_f_late = run_f;
    for (long t = 1; t <= iterations; ++t) {
      z += global_subgradient(p, s, x);
      x = prox_project(z, sched.at(t), p.prox, p.set);
      sum += x;
      if (t % checkpoint == 0 || t == iterations) {
        for (const Vector& candidate : {Vector(sum / static_cast<double>(t + 1)), x}) {
          const double f = eval_global(p, candidate);
          if (std::isfinite(f) && f < run_f) {
            run_f = f;
            run_x = candidate;
          }
        }
      }
      if (t == late) run_f_late = run_f;
    }
    if (run_f < best_f) {
      best_f = run_f;
      best_x = run_x;
      best_c = c;
      warning = std::abs(run_f_late - run_f) > 1e-6 * std::max(1.0, std::abs(run_f));
    }
  }
  std::ostringstream os;
  os << "dual_averaging(iterations=" << iterations << ",C=" << best_c << ")";
  return finish(p, std::move(best_x), os.str(), warning);
}

}  // namespace

ReferenceSolution centralized_reference(const Problem& problem, const ReferenceOptions& options) {
  problem.validate();
  const bool unconstrained = problem.set.kind() == FeasibleSet::Kind::unconstrained;
  if (problem.loss == LossKind::least_squares && unconstrained) return least_squares_cg(problem);
  if (problem.loss == LossKind::svm_hinge && unconstrained) return svm_dual_cd(problem);
  const long iterations = options.iterations > 0 ? options.iterations : 100 * std::max(1L, options.horizon);
  return long_dual_averaging(problem, iterations);
}

}  // namespace dcda
