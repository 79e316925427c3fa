#include "dcda/topology.hpp"

#include "dcda/errors.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

namespace dcda {

Graph::Graph(Matrix adjacency) : adjacency_(std::move(adjacency)) {
  if (adjacency_.rows() != adjacency_.cols() || adjacency_.rows() < 1)
    throw ConfigError("adjacency must be a non-empty square matrix");
  const Eigen::Index n = adjacency_.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (adjacency_(i, i) != 0.0) throw ConfigError("adjacency must have a zero diagonal");
    for (Eigen::Index j = 0; j < n; ++j) {
      const double a = adjacency_(i, j);
      if (a != 0.0 && a != 1.0) throw ConfigError("adjacency entries must be 0 or 1");
      if (a != adjacency_(j, i)) throw ConfigError("adjacency must be symmetric");
    }
  }
}

int Graph::degree(int i) const { return static_cast<int>(adjacency_.row(i).sum()); }

bool Graph::connected() const {
  const int n = nodes();
  std::vector<char> seen(n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int visited = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v = 0; v < n; ++v) {
      if (adjacency_(u, v) != 0.0 && !seen[v]) {
        seen[v] = 1;
        ++visited;
        stack.push_back(v);
      }
    }
  }
  return visited == n;
}

Graph make_full(int n) {
  if (n < 2) throw ConfigError("full graph needs n >= 2");
  return Graph(Matrix::Ones(n, n) - Matrix::Identity(n, n));
}

Graph make_ring(int n, int l) {
  if (l < 1) throw ConfigError("ring graph needs l >= 1");
  if (n < 1) throw ConfigError("ring graph needs n >= 1");
  Matrix a = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const int gap = std::abs(i - j);
      if (std::min(gap, n - gap) <= l) a(i, j) = 1.0;
    }
  }
  return Graph(std::move(a));
}

Graph make_random(int n, double p, std::uint64_t seed) {
  if (n < 1) throw ConfigError("random graph needs n >= 1");
  if (!(p > 0.0 && p <= 1.0)) throw ConfigError("random graph needs 0 < p <= 1");
  std::mt19937_64 gen(seed);
  std::bernoulli_distribution edge(p);
  constexpr int kMaxDraws = 100000;
  for (int draw = 0; draw < kMaxDraws; ++draw) {
    Matrix a = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (edge(gen)) a(i, j) = a(j, i) = 1.0;
    Graph g(std::move(a));
    if (g.connected()) return g;
  }
  throw NumericalError("random graph: no connected draw within 100000 attempts");
}

Matrix mixing_from_adjacency(const Matrix& adjacency) {
  const Eigen::Index n = adjacency.rows();
  const Vector degrees = adjacency.rowwise().sum();
  const double divisor = (n > 0 ? degrees.maxCoeff() : 0.0) + 1.0;
  Matrix laplacian = -adjacency;
  laplacian.diagonal() += degrees;
  return Matrix::Identity(n, n) - laplacian / divisor;
}

bool is_doubly_stochastic(const Matrix& P, double tol) {
  if (P.rows() != P.cols() || !P.allFinite()) return false;
  if (P.minCoeff() < 0.0) return false;
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    if (std::abs(P.row(i).sum() - 1.0) > tol) return false;
    if (std::abs(P.col(i).sum() - 1.0) > tol) return false;
  }
  return true;
}

bool respects_sparsity(const Matrix& P, const Matrix& adjacency) {
  for (Eigen::Index i = 0; i < P.rows(); ++i)
    for (Eigen::Index j = 0; j < P.cols(); ++j)
      if (i != j && P(i, j) > 0.0 && adjacency(i, j) == 0.0) return false;
  return true;
}

double second_singular_value(const Matrix& P, const SpectralOptions& options) {
  const Eigen::Index n = P.rows();
  if (n != P.cols()) throw DomainError("second_singular_value: matrix must be square");
  if (n < 2) return 0.0;

  const Matrix gram = P.transpose() * P;
  auto deflate = [n](Vector& v) { v.array() -= v.sum() / static_cast<double>(n); };

  // Deterministic start vector with components along every non-consensus direction.
  Vector v(n);
  std::mt19937_64 gen(0x5eed);
  std::normal_distribution<double> normal;
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(gen);
  deflate(v);
  v.normalize();

  double lambda = 0.0;
  for (long it = 0; it < options.max_iterations; ++it) {
    Vector w = gram * v;
    deflate(w);
    const double next = v.dot(w);
    const double norm = w.norm();
    if (norm <= 1e-300) return 0.0;
    const double residual = (w - next * v).norm();
    w /= norm;
    const bool settled = std::abs(next - lambda) <= options.tolerance * std::max(1.0, std::abs(next));
    lambda = next;
    v = std::move(w);
    if (settled && residual <= std::sqrt(options.tolerance)) return std::sqrt(std::max(lambda, 0.0));
  }
  std::ostringstream os;
  os << "second_singular_value: power iteration did not converge in " << options.max_iterations
     << " iterations (last estimate " << std::sqrt(std::max(lambda, 0.0)) << ", n = " << n << ")";
  throw NumericalError(os.str());
}

Matrix mixing_product(std::span<const Matrix> sequence, int t, int s) {
  if (s > t) throw DomainError("mixing_product: s must not exceed t");
  if (s < 0 || t >= static_cast<int>(sequence.size())) throw DomainError("mixing_product: index out of range");
  Matrix product = sequence[t];
  for (int r = t - 1; r >= s; --r) product = product * sequence[r];
  return product;
}

}  // namespace dcda
