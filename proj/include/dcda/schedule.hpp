#pragma once

#include "dcda/prox.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dcda {

// Coordinates that receive mixing at one time step; every other coordinate uses the identity.
struct CoordinateSlot {
  long t = 0;
  std::vector<int> active;  // ascending, 0-based
};

// Which mixing matrix P^k(t) applies to coordinate k at time t. Coordinates are
// 0-based here; time starts at 1. Immutable once built.
class SharePolicy {
 public:
  enum class Kind { static_sharing, round_robin, randomized };
  enum class RandomMode { subset, all_to_all };

  // Empty policy (d = 0); use one of the factories.
  SharePolicy() = default;

  // One matrix per coordinate (size d) or a single matrix shared by every coordinate.
  static SharePolicy make_static(std::vector<Matrix> per_coordinate, int d);
  // m coordinates per slot in ascending blocks; m must divide d.
  static SharePolicy make_round_robin(Matrix base, int m, int d);
  // A shared-seed uniform m-subset of coordinates mixes with `base` each step (0 <= m <= d).
  static SharePolicy make_randomized_subset(Matrix base, int m, int d, std::uint64_t seed);
  // Each (t, k) independently mixes with (1/n) 11^T with probability rho.
  static SharePolicy make_randomized_all_to_all(int n, double rho, int d, std::uint64_t seed);

  Kind kind() const { return kind_; }
  RandomMode random_mode() const { return mode_; }
  int nodes() const { return n_; }
  int dimension() const { return d_; }
  int block() const { return m_; }
  double rho() const { return rho_; }
  std::uint64_t seed() const { return seed_; }
  const Matrix& base() const { return base_; }

  // Throws DomainError when k is outside [0, d).
  const Matrix& mixing_at(long t, int k) const;
  bool is_active(long t, int k) const;
  CoordinateSlot slot_at(long t) const;

  // E[P^k(t)^2] for randomized policies; ConfigError otherwise.
  Matrix expected_squared_mixing(int k) const;

  // Expected number of coordinates mixed per step (communication budget).
  double expected_active() const;

  std::string describe() const;

 private:
  std::vector<int> subset_at(long t) const;

  Kind kind_ = Kind::static_sharing;
  RandomMode mode_ = RandomMode::subset;
  int n_ = 0;
  int d_ = 0;
  int m_ = 0;
  double rho_ = 1.0;
  std::uint64_t seed_ = 0;
  Matrix base_;
  Matrix identity_;
  Matrix averaging_;
  std::vector<Matrix> per_coordinate_;
};

}  // namespace dcda
