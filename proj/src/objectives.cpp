#include "dcda/objectives.hpp"

#include "dcda/errors.hpp"
#include "dcda/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace dcda {

std::string to_string(LossKind loss) {
  switch (loss) {
    case LossKind::svm_hinge:
      return "svm";
    case LossKind::least_squares:
      return "linreg";
    case LossKind::l1_regression:
      return "robust";
  }
  return "?";
}

void Problem::validate() const {
  if (n < 1 || m < 1 || d < 1) throw ConfigError("problem: n, m and d must be positive");
  if (static_cast<int>(nodes.size()) != n) throw ConfigError("problem: need one dataset per node");
  for (const NodeData& nd : nodes) {
    if (nd.features.rows() != m || nd.features.cols() != d || nd.targets.size() != m)
      throw ConfigError("problem: node dataset has the wrong shape");
  }
  check_prox_pair(prox, set);
}

namespace {

Vector gaussian_vector(std::mt19937_64& gen, int d, double sd = 1.0) {
  std::normal_distribution<double> normal(0.0, sd);
  Vector v(d);
  for (int k = 0; k < d; ++k) v[k] = normal(gen);
  return v;
}

Matrix gaussian_matrix(std::mt19937_64& gen, int rows, int cols) {
  std::normal_distribution<double> normal;
  Matrix a(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) a(r, c) = normal(gen);
  return a;
}

void check_dims(int n, int m, int d) {
  if (n < 1 || m < 1 || d < 1) throw ConfigError("generator: n, m and d must be positive");
}

void check_point(const Problem& problem, int i, const Vector& x) {
  if (i < 0 || i >= problem.n) throw DomainError("node index out of range");
  if (x.size() != problem.d) throw DomainError("dimension mismatch: expected " + std::to_string(problem.d) +
                                               ", got " + std::to_string(x.size()));
}

double sign0(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Loss subgradient of a single sample j (no regularizer), accumulated into g with weight w.
void add_sample_subgradient(const Problem& p, const NodeData& nd, int j, const Vector& x, double w, Vector& g) {
  const auto row = nd.features.row(j);
  const double fit = row.dot(x);
  switch (p.loss) {
    case LossKind::svm_hinge: {
      const double label = nd.targets[j];
      if (label * fit < 1.0) g.noalias() -= (w * p.c_svm * label) * row.transpose();
      break;
    }
    case LossKind::least_squares:
      g.noalias() += (w * (fit - nd.targets[j])) * row.transpose();
      break;
    case LossKind::l1_regression: {
      const double s = sign0(fit - nd.targets[j]);
      if (s != 0.0) g.noalias() += (w * s) * row.transpose();
      break;
    }
  }
}

Vector sample_in_ball(std::mt19937_64& gen, int d, double radius) {
  Vector dir = gaussian_vector(gen, d);
  const double norm = dir.norm();
  if (norm == 0.0) return Vector::Zero(d);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return dir * (radius * std::pow(unit(gen), 1.0 / d) / norm);
}

Vector sample_simplex(std::mt19937_64& gen, int d) {
  std::exponential_distribution<double> expo(1.0);
  Vector v(d);
  for (int k = 0; k < d; ++k) v[k] = expo(gen);
  return v / v.sum();
}

}  // namespace

Problem gen_svm(const SvmParams& params) {
  check_dims(params.n, params.m, params.d);
  if (!(params.sigma >= 0.0)) throw ConfigError("svm: sigma must be non-negative");
  if (!(params.c_svm > 0.0)) throw ConfigError("svm: C must be positive");
  const int d = params.d;
  const Vector mu_plus = params.mu_plus.size() ? params.mu_plus : Vector::Constant(d, 1.0 / std::sqrt(d));
  const Vector mu_minus = params.mu_minus.size() ? params.mu_minus : Vector::Constant(d, -1.0 / std::sqrt(d));
  if (mu_plus.size() != d || mu_minus.size() != d) throw ConfigError("svm: class means must have length d");

  std::mt19937_64 gen(params.seed);
  std::bernoulli_distribution coin(0.5);
  Problem p;
  p.loss = LossKind::svm_hinge;
  p.n = params.n;
  p.m = params.m;
  p.d = d;
  p.c_svm = params.c_svm;
  p.prox = ProxKind::squared;
  p.set = FeasibleSet::unconstrained();
  p.nodes.resize(params.n);
  for (NodeData& nd : p.nodes) {
    nd.features.resize(params.m, d);
    nd.targets.resize(params.m);
    for (int j = 0; j < params.m; ++j) {
      const double label = coin(gen) ? 1.0 : -1.0;
      nd.targets[j] = label;
      nd.features.row(j) = (label > 0 ? mu_plus : mu_minus) + gaussian_vector(gen, d, 1.0) * params.sigma;
    }
  }
  return p;
}

NodeData gen_svm_test(const SvmParams& params, int per_class, std::uint64_t seed) {
  const int d = params.d;
  const Vector mu_plus = params.mu_plus.size() ? params.mu_plus : Vector::Constant(d, 1.0 / std::sqrt(d));
  const Vector mu_minus = params.mu_minus.size() ? params.mu_minus : Vector::Constant(d, -1.0 / std::sqrt(d));
  std::mt19937_64 gen(seed);
  NodeData test;
  test.features.resize(2 * per_class, d);
  test.targets.resize(2 * per_class);
  for (int j = 0; j < 2 * per_class; ++j) {
    const double label = j < per_class ? 1.0 : -1.0;
    test.targets[j] = label;
    test.features.row(j) = (label > 0 ? mu_plus : mu_minus) + gaussian_vector(gen, d, 1.0) * params.sigma;
  }
  return test;
}

Problem gen_linreg(const LinregParams& params) {
  check_dims(params.n, params.m, params.d);
  if (!(params.noise_sigma >= 0.0)) throw ConfigError("linreg: noise sigma must be non-negative");
  std::mt19937_64 gen(params.seed);
  Problem p;
  p.loss = LossKind::least_squares;
  p.n = params.n;
  p.m = params.m;
  p.d = params.d;
  p.prox = ProxKind::squared;
  p.set = params.radius > 0.0 ? FeasibleSet::l2_ball(params.radius) : FeasibleSet::unconstrained();
  p.planted = gaussian_vector(gen, params.d);
  p.nodes.resize(params.n);
  for (NodeData& nd : p.nodes) {
    nd.features = gaussian_matrix(gen, params.m, params.d);
    nd.targets = nd.features * *p.planted + gaussian_vector(gen, params.m, 1.0) * params.noise_sigma;
  }
  return p;
}

Problem gen_robust(const RobustParams& params) {
  check_dims(params.n, params.m, params.d);
  if (!(params.outlier_prob >= 0.0 && params.outlier_prob <= 1.0))
    throw ConfigError("robust: outlier probability must lie in [0, 1]");
  std::mt19937_64 gen(params.seed);
  std::bernoulli_distribution outlier(params.outlier_prob);
  std::normal_distribution<double> normal;
  Problem p;
  p.loss = LossKind::l1_regression;
  p.n = params.n;
  p.m = params.m;
  p.d = params.d;
  p.prox = ProxKind::entropic;
  p.set = FeasibleSet::simplex();
  p.planted = sample_simplex(gen, params.d);
  p.nodes.resize(params.n);
  for (NodeData& nd : p.nodes) {
    nd.features = gaussian_matrix(gen, params.m, params.d);
    nd.targets = nd.features * *p.planted;
    for (int j = 0; j < params.m; ++j) {
      // b = 0 selects the large-variance outlier term.
      const bool is_outlier = outlier(gen);
      const double e = normal(gen);
      nd.targets[j] += is_outlier ? params.outlier_sigma * e : params.inlier_sigma * e;
    }
  }
  return p;
}

double local_objective(const Problem& problem, int i, const Vector& x) {
  check_point(problem, i, x);
  const NodeData& nd = problem.nodes[i];
  const Vector fit = nd.features * x;
  switch (problem.loss) {
    case LossKind::svm_hinge: {
      double hinge = 0.0;
      for (int j = 0; j < problem.m; ++j) hinge += std::max(1.0 - nd.targets[j] * fit[j], 0.0);
      return x.squaredNorm() / (2.0 * problem.d) + problem.c_svm * hinge;
    }
    case LossKind::least_squares:
      return 0.5 * (fit - nd.targets).squaredNorm();
    case LossKind::l1_regression:
      return (fit - nd.targets).lpNorm<1>();
  }
  return 0.0;
}

double eval_global(const Problem& problem, const Vector& x) {
  if (!x.allFinite()) throw DomainError("eval_global: non-finite point");
  double total = 0.0;
  for (int i = 0; i < problem.n; ++i) total += local_objective(problem, i, x);
  return total;
}

Vector subgradient(const Problem& problem, int i, const Vector& x) {
  check_point(problem, i, x);
  const NodeData& nd = problem.nodes[i];
  Vector g = Vector::Zero(problem.d);
  switch (problem.loss) {
    case LossKind::svm_hinge:
      g = x / static_cast<double>(problem.d);
      for (int j = 0; j < problem.m; ++j) add_sample_subgradient(problem, nd, j, x, 1.0, g);
      break;
    case LossKind::least_squares:
      g.noalias() = nd.features.transpose() * (nd.features * x - nd.targets);
      break;
    case LossKind::l1_regression: {
      const Vector r = nd.features * x - nd.targets;
      g.noalias() = nd.features.transpose() * r.unaryExpr([](double v) { return sign0(v); });
      break;
    }
  }
  return g;
}

std::string describe(const GradientMode& mode) {
  if (const auto* mb = std::get_if<MiniBatch>(&mode)) return "minibatch(b=" + std::to_string(mb->batch) + ")";
  return "exact";
}

Vector stochastic_subgradient(const Problem& problem, int i, const Vector& x, const MiniBatch& mode, long t) {
  check_point(problem, i, x);
  if (mode.batch < 1 || mode.batch > problem.m) throw ConfigError("minibatch size must lie in [1, m]");
  const NodeData& nd = problem.nodes[i];
  Vector g = problem.loss == LossKind::svm_hinge ? Vector(x / static_cast<double>(problem.d))
                                                 : Vector(Vector::Zero(problem.d));
  std::vector<int> idx(problem.m);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 gen(rng::mix({mode.seed, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(t)}));
  for (int s = 0; s < mode.batch; ++s) {
    std::uniform_int_distribution<int> pick(s, problem.m - 1);
    std::swap(idx[s], idx[pick(gen)]);
  }
  const double weight = static_cast<double>(problem.m) / mode.batch;
  for (int s = 0; s < mode.batch; ++s) add_sample_subgradient(problem, nd, idx[s], x, weight, g);
  return g;
}

double lipschitz_bound_on_ball(const Problem& problem, double radius) {
  double best = 0.0;
  for (const NodeData& nd : problem.nodes) {
    const Matrix& a = nd.features;
    double bound = 0.0;
    switch (problem.loss) {
      case LossKind::svm_hinge:
        bound = radius / problem.d + problem.c_svm * a.rowwise().norm().sum();
        break;
      case LossKind::least_squares: {
        const double op = Eigen::JacobiSVD<Matrix>(a).singularValues()[0];
        bound = op * op * radius + (a.transpose() * nd.targets).norm();
        break;
      }
      case LossKind::l1_regression:
        if (problem.norm() == NormKind::l1) {
          bound = a.cwiseAbs().colwise().sum().maxCoeff();
        } else {
          const double op = Eigen::JacobiSVD<Matrix>(a).singularValues()[0];
          bound = op * std::sqrt(static_cast<double>(problem.m));
        }
        break;
    }
    best = std::max(best, bound);
  }
  return best;
}

LipschitzEstimate lipschitz_estimate(const Problem& problem, std::uint64_t seed, int samples) {
  if (problem.loss == LossKind::l1_regression) return {lipschitz_bound_on_ball(problem, 0.0), true};

  double radius = 0.0;
  switch (problem.set.kind()) {
    case FeasibleSet::Kind::l2_ball:
      radius = problem.set.radius();
      break;
    case FeasibleSet::Kind::simplex:
      break;
    case FeasibleSet::Kind::unconstrained:
      if (problem.loss == LossKind::svm_hinge) {
        // f(x*) <= f(0) = n m C bounds the regularizer, hence ||x*||^2 <= 2 d m C.
        radius = std::sqrt(2.0 * problem.d * problem.m * problem.c_svm);
      } else {
        radius = 2.0 * std::max(1.0, problem.planted ? problem.planted->norm() : std::sqrt(problem.d));
      }
      break;
  }

  std::mt19937_64 gen(seed);
  double sup = 0.0;
  auto probe = [&](const Vector& x) {
    for (int i = 0; i < problem.n; ++i) sup = std::max(sup, dual_norm(subgradient(problem, i, x), problem.norm()));
  };
  probe(problem.set.kind() == FeasibleSet::Kind::simplex ? Vector::Constant(problem.d, 1.0 / problem.d)
                                                           : Vector::Zero(problem.d));
  for (int s = 0; s < samples; ++s) {
    probe(problem.set.kind() == FeasibleSet::Kind::simplex ? sample_simplex(gen, problem.d)
                                                             : sample_in_ball(gen, problem.d, radius));
  }
  return {1.1 * sup, false};
}

double classification_accuracy(const NodeData& data, const Vector& x) {
  const Vector scores = data.features * x;
  int correct = 0;
  for (Eigen::Index j = 0; j < scores.size(); ++j)
    if (scores[j] * data.targets[j] > 0.0) ++correct;
  return scores.size() ? static_cast<double>(correct) / static_cast<double>(scores.size()) : 0.0;
}

void write_problem_csv(const Problem& problem, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (int i = 0; i < problem.n; ++i) {
    std::ofstream os(dir / ("node_" + std::to_string(i) + ".csv"));
    if (!os) throw ConfigError("cannot write dataset file in " + dir.string());
    os.precision(17);
    for (int k = 0; k < problem.d; ++k) os << 'f' << k << ',';
    os << "target\n";
    const NodeData& nd = problem.nodes[i];
    for (int j = 0; j < problem.m; ++j) {
      for (int k = 0; k < problem.d; ++k) os << nd.features(j, k) << ',';
      os << nd.targets[j] << '\n';
    }
  }
}

Problem read_problem_csv(const std::filesystem::path& dir, LossKind loss, double c_svm) {
  Problem p;
  p.loss = loss;
  p.c_svm = c_svm;
  p.prox = loss == LossKind::l1_regression ? ProxKind::entropic : ProxKind::squared;
  p.set = loss == LossKind::l1_regression ? FeasibleSet::simplex() : FeasibleSet::unconstrained();
  for (int i = 0;; ++i) {
    const auto file = dir / ("node_" + std::to_string(i) + ".csv");
    if (!std::filesystem::exists(file)) break;
    std::ifstream is(file);
    std::string line;
    std::getline(is, line);  // header
    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      std::vector<double> row;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
      rows.push_back(std::move(row));
    }
    if (rows.empty() || rows.front().size() < 2) throw ConfigError("dataset file " + file.string() + " is empty");
    const int m = static_cast<int>(rows.size());
    const int d = static_cast<int>(rows.front().size()) - 1;
    NodeData nd{Matrix(m, d), Vector(m)};
    for (int j = 0; j < m; ++j) {
      if (static_cast<int>(rows[j].size()) != d + 1) throw ConfigError("ragged row in " + file.string());
      for (int k = 0; k < d; ++k) nd.features(j, k) = rows[j][k];
      nd.targets[j] = rows[j][d];
    }
    p.m = m;
    p.d = d;
    p.nodes.push_back(std::move(nd));
  }
  p.n = static_cast<int>(p.nodes.size());
  p.validate();
  return p;
}

}  // namespace dcda
