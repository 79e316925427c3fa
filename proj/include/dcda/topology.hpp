#pragma once

#include "dcda/prox.hpp"

#include <cstdint>
#include <span>
#include <string>

namespace dcda {

// Undirected simple graph stored as a symmetric 0/1 adjacency matrix with zero diagonal.
class Graph {
 public:
  // Validates symmetry, 0/1 entries and the zero diagonal.
  explicit Graph(Matrix adjacency);

  int nodes() const { return static_cast<int>(adjacency_.rows()); }
  const Matrix& adjacency() const { return adjacency_; }
  int degree(int i) const;
  bool connected() const;

 private:
  Matrix adjacency_;
};

Graph make_full(int n);

// Circular lattice: i ~ j iff 0 < min(|i-j|, n-|i-j|) <= l.
Graph make_ring(int n, int l);

// Erdos-Renyi G(n, p), redrawn from the same seeded stream until connected
// (at most 100000 draws).
Graph make_random(int n, double p, std::uint64_t seed);

// P = I - (D - A) / (max_i D_ii + 1) with D = diag(A 1).
Matrix mixing_from_adjacency(const Matrix& adjacency);
inline Matrix mixing_from_graph(const Graph& g) { return mixing_from_adjacency(g.adjacency()); }

bool is_doubly_stochastic(const Matrix& P, double tol = 1e-12);

// Off-diagonal support of P is contained in the support of A.
bool respects_sparsity(const Matrix& P, const Matrix& adjacency);

struct SpectralOptions {
  double tolerance = 1e-10;
  long max_iterations = 100000;
};

// Second largest singular value of a doubly stochastic matrix: power iteration on
// P^T P restricted to the complement of the consensus direction 1/sqrt(n).
// Throws NumericalError when the iteration cap is hit.
double second_singular_value(const Matrix& P, const SpectralOptions& options = {});

// Ordered product P(t) P(t-1) ... P(s) over a sequence indexed by time.
Matrix mixing_product(std::span<const Matrix> sequence, int t, int s);

}  // namespace dcda
