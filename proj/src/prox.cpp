#include "dcda/prox.hpp"

#include "dcda/errors.hpp"

#include <cmath>
#include <sstream>

namespace dcda {

namespace {

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw DomainError(std::string(what) + ": non-finite input");
}

}  // namespace

double primal_norm(const Vector& v, NormKind norm) {
  require_finite(v, "primal_norm");
  return norm == NormKind::l2 ? v.norm() : v.lpNorm<1>();
}

double dual_norm(const Vector& v, NormKind norm) {
  require_finite(v, "dual_norm");
  if (v.size() == 0) return 0.0;
  return norm == NormKind::l2 ? v.norm() : v.lpNorm<Eigen::Infinity>();
}

FeasibleSet FeasibleSet::l2_ball(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ConfigError("l2 ball radius must be positive and finite");
  return FeasibleSet(Kind::l2_ball, radius);
}

bool FeasibleSet::contains(const Vector& x, double tol) const {
  if (!x.allFinite()) return false;
  switch (kind_) {
    case Kind::unconstrained:
      return true;
    case Kind::l2_ball:
      return x.norm() <= radius_ + tol;
    case Kind::simplex:
      return x.minCoeff() >= -tol && std::abs(x.sum() - 1.0) <= tol;
  }
  return false;
}

std::string FeasibleSet::name() const {
  switch (kind_) {
    case Kind::unconstrained:
      return "unconstrained";
    case Kind::l2_ball: {
      std::ostringstream os;
      os.precision(17);
      os << "l2_ball(" << radius_ << ")";
      return os.str();
    }
    case Kind::simplex:
      return "simplex";
  }
  return "?";
}

NormKind natural_norm(ProxKind psi) { return psi == ProxKind::squared ? NormKind::l2 : NormKind::l1; }

double prox_value(const Vector& x, ProxKind psi) {
  if (psi == ProxKind::squared) return 0.5 * x.squaredNorm();
  double acc = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double v = x[k];
    if (v < 0.0) throw DomainError("entropic prox function needs a non-negative argument");
    acc += (v > 0.0 ? v * std::log(v) : 0.0) - v;
  }
  return acc;
}

double prox_value_normalized(const Vector& x, ProxKind psi, const FeasibleSet& set) {
  if (psi == ProxKind::squared) return prox_value(x, psi);
  // On the simplex, sum x log x - x attains its minimum -1 - log d at the barycenter.
  (void)set;
  const double d = static_cast<double>(x.size());
  return prox_value(x, psi) + 1.0 + std::log(d);
}

void check_prox_pair(ProxKind psi, const FeasibleSet& set) {
  const bool ok = (psi == ProxKind::squared && set.kind() != FeasibleSet::Kind::simplex) ||
                  (psi == ProxKind::entropic && set.kind() == FeasibleSet::Kind::simplex);
  if (!ok) throw ConfigError("unsupported prox/set pair: " + to_string(psi) + " with " + set.name());
}

Vector prox_project(const Vector& z, double alpha, ProxKind psi, const FeasibleSet& set) {
  check_prox_pair(psi, set);
  if (!(alpha > 0.0)) throw DomainError("prox_project: alpha must be positive");
  require_finite(z, "prox_project");

  if (psi == ProxKind::squared) {
    Vector x = -alpha * z;
    if (set.kind() == FeasibleSet::Kind::l2_ball) {
      const double r = x.norm();
      if (r > set.radius()) x *= set.radius() / r;
    }
    return x;
  }

  // Softmax of -alpha z with max subtraction.
  Vector logits = -alpha * z;
  const double shift = logits.maxCoeff();
  Vector x = (logits.array() - shift).exp().matrix();
  x /= x.sum();
  return x;
}

double StepSchedule::at(long t) const {
  if (t <= 0) return C;
  return C / std::sqrt(static_cast<double>(t));
}

std::string to_string(NormKind norm) { return norm == NormKind::l2 ? "l2" : "l1"; }
std::string to_string(ProxKind psi) { return psi == ProxKind::squared ? "squared" : "entropic"; }

}  // namespace dcda
