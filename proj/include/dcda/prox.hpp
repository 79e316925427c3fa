#pragma once

#include <Eigen/Dense>

#include <string>

namespace dcda {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Primal norm used by the Lipschitz assumption. The dual pairing is l2 <-> l2 and l1 <-> linf.
enum class NormKind { l2, l1 };

enum class ProxKind { squared, entropic };

// Primal-space norm.
double primal_norm(const Vector& v, NormKind norm);

// Dual norm: ||v||_2 for l2, max_k |v_k| for l1. Throws DomainError on non-finite input.
double dual_norm(const Vector& v, NormKind norm);

class FeasibleSet {
 public:
  enum class Kind { unconstrained, l2_ball, simplex };

  static FeasibleSet unconstrained() { return FeasibleSet(Kind::unconstrained, 0.0); }
  static FeasibleSet l2_ball(double radius);
  static FeasibleSet simplex() { return FeasibleSet(Kind::simplex, 0.0); }

  Kind kind() const { return kind_; }
  double radius() const { return radius_; }

  bool contains(const Vector& x, double tol = 1e-12) const;
  std::string name() const;

  friend bool operator==(const FeasibleSet&, const FeasibleSet&) = default;

 private:
  FeasibleSet(Kind kind, double radius) : kind_(kind), radius_(radius) {}

  Kind kind_;
  double radius_;
};

// Norm under which the prox function is 1-strongly convex.
NormKind natural_norm(ProxKind psi);

// psi(x) as written: 0.5 ||x||^2, or sum x_k log x_k - x_k (with 0 log 0 = 0).
double prox_value(const Vector& x, ProxKind psi);

// psi shifted by a constant so that its minimum over `set` is zero. The projection
// is unchanged by the shift; bound evaluators need a non-negative psi.
double prox_value_normalized(const Vector& x, ProxKind psi, const FeasibleSet& set);

// argmin_x <x, z> + psi(x) / alpha over the feasible set. Supported pairs are
// (squared, unconstrained), (squared, l2_ball) and (entropic, simplex); any
// other pair throws ConfigError.
Vector prox_project(const Vector& z, double alpha, ProxKind psi, const FeasibleSet& set);

void check_prox_pair(ProxKind psi, const FeasibleSet& set);

struct StepSchedule {
  double C = 1.0;

  // C / sqrt(t) for t >= 1, C at t = 0.
  double at(long t) const;
};

inline double step_size(long t, const StepSchedule& sched) { return sched.at(t); }

std::string to_string(NormKind norm);
std::string to_string(ProxKind psi);

}  // namespace dcda
