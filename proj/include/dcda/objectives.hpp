#pragma once

#include "dcda/prox.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace dcda {

enum class LossKind { svm_hinge, least_squares, l1_regression };

std::string to_string(LossKind loss);

// Local measurements of one node: m rows of features and one target (or +-1 label) per row.
struct NodeData {
  Matrix features;
  Vector targets;
};

struct Problem {
  LossKind loss = LossKind::least_squares;
  int n = 0;
  int m = 0;
  int d = 0;
  std::vector<NodeData> nodes;
  ProxKind prox = ProxKind::squared;
  FeasibleSet set = FeasibleSet::unconstrained();
  double c_svm = 1.0;
  std::optional<Vector> planted;  // ground truth, when the generator plants one

  NormKind norm() const { return natural_norm(prox); }
  void validate() const;
};

struct SvmParams {
  int n = 10;
  int m = 10;
  int d = 30;
  Vector mu_plus;   // empty: +(1/sqrt(d)) 1
  Vector mu_minus;  // empty: -(1/sqrt(d)) 1
  double sigma = 1.0;  // features ~ N(mu_label, sigma^2 I)
  double c_svm = 1.0;
  std::uint64_t seed = 0;
};

struct LinregParams {
  int n = 10;
  int m = 20;
  int d = 30;
  double noise_sigma = 1.0;
  double radius = 0.0;  // > 0 constrains to an l2 ball
  std::uint64_t seed = 0;
};

struct RobustParams {
  int n = 10;
  int m = 10;
  int d = 20;
  double outlier_prob = 0.1;  // P[b = 0]
  double outlier_sigma = 10.0;
  double inlier_sigma = 0.3;
  std::uint64_t seed = 0;
};

// f_i(x) = ||x||^2 / (2d) + C sum_j max(1 - l_ij x^T z_ij, 0), squared prox.
Problem gen_svm(const SvmParams& params);
// Held-out labelled points drawn from the same class-conditional Gaussians.
NodeData gen_svm_test(const SvmParams& params, int per_class, std::uint64_t seed);
// f_i(x) = 0.5 ||A_i x - z_i||^2 with z_i = A_i x_planted + noise, squared prox.
Problem gen_linreg(const LinregParams& params);
// f_i(x) = ||A_i x - z_i||_1, outlier-contaminated targets, x on the simplex, entropic prox.
Problem gen_robust(const RobustParams& params);

double local_objective(const Problem& problem, int i, const Vector& x);
double eval_global(const Problem& problem, const Vector& x);

// A member of the subdifferential of f_i at x; kinks take the zero element.
Vector subgradient(const Problem& problem, int i, const Vector& x);

struct ExactGradient {};
struct MiniBatch {
  int batch = 4;
  std::uint64_t seed = 0;
};
using GradientMode = std::variant<ExactGradient, MiniBatch>;

std::string describe(const GradientMode& mode);

// Regularizer gradient plus (m/b) times the subgradients of b samples drawn without
// replacement from a stream keyed by (seed, i, t). Unbiased for subgradient().
Vector stochastic_subgradient(const Problem& problem, int i, const Vector& x, const MiniBatch& mode, long t);

struct LipschitzEstimate {
  double value = 0.0;
  bool certified = false;  // false: empirical sup plus 10% margin
};

// Bound on ||g_i||_* over the feasible set. The l1 loss has a closed-form bound
// (largest absolute column sum); the other losses sample 10^4 feasible points
// (unconstrained problems: a ball around the origin sized to contain the solution).
LipschitzEstimate lipschitz_estimate(const Problem& problem, std::uint64_t seed = 0x11b, int samples = 10000);

// Closed-form bound on max_i ||g||_* over the l2 ball of the given radius
// (the radius is ignored for the l1 loss).
double lipschitz_bound_on_ball(const Problem& problem, double radius);

// Fraction of rows with sign(x^T z) equal to the label; sign(0) counts as wrong.
double classification_accuracy(const NodeData& data, const Vector& x);

// One CSV per node (node_<i>.csv): columns f0..f{d-1},target.
void write_problem_csv(const Problem& problem, const std::filesystem::path& dir);
Problem read_problem_csv(const std::filesystem::path& dir, LossKind loss, double c_svm = 1.0);

}  // namespace dcda
