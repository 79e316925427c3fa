#include "dcda/schedule.hpp"

#include "dcda/errors.hpp"
#include "dcda/rng.hpp"
#include "dcda/topology.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

namespace dcda {

namespace {

void require_mixing(const Matrix& P) {
  if (!is_doubly_stochastic(P, 1e-12)) throw ConfigError("share policy: mixing matrix must be doubly stochastic");
}

}  // namespace

SharePolicy SharePolicy::make_static(std::vector<Matrix> per_coordinate, int d) {
  if (d < 1) throw ConfigError("share policy: d must be positive");
  if (per_coordinate.empty()) throw ConfigError("static policy: no mixing matrix given");
  if (per_coordinate.size() != 1 && static_cast<int>(per_coordinate.size()) != d)
    throw ConfigError("static policy: need one matrix or one per coordinate");
  for (const Matrix& P : per_coordinate) require_mixing(P);
  SharePolicy p;
  p.kind_ = Kind::static_sharing;
  p.n_ = static_cast<int>(per_coordinate.front().rows());
  for (const Matrix& P : per_coordinate)
    if (P.rows() != p.n_) throw ConfigError("static policy: matrices must share one size");
  p.d_ = d;
  p.m_ = d;
  p.base_ = per_coordinate.front();
  if (per_coordinate.size() == 1) per_coordinate.assign(d, p.base_);
  p.per_coordinate_ = std::move(per_coordinate);
  p.identity_ = Matrix::Identity(p.n_, p.n_);
  return p;
}

SharePolicy SharePolicy::make_round_robin(Matrix base, int m, int d) {
  if (d < 1) throw ConfigError("share policy: d must be positive");
  if (m < 1 || m > d) throw ConfigError("round robin: need 1 <= m <= d");
  if (d % m != 0) throw ConfigError("round robin: m must divide d");
  require_mixing(base);
  SharePolicy p;
  p.kind_ = Kind::round_robin;
  p.n_ = static_cast<int>(base.rows());
  p.d_ = d;
  p.m_ = m;
  p.base_ = std::move(base);
  p.identity_ = Matrix::Identity(p.n_, p.n_);
  return p;
}

SharePolicy SharePolicy::make_randomized_subset(Matrix base, int m, int d, std::uint64_t seed) {
  if (d < 1) throw ConfigError("share policy: d must be positive");
  if (m < 0 || m > d) throw ConfigError("randomized subset: need 0 <= m <= d");
  require_mixing(base);
  SharePolicy p;
  p.kind_ = Kind::randomized;
  p.mode_ = RandomMode::subset;
  p.n_ = static_cast<int>(base.rows());
  p.d_ = d;
  p.m_ = m;
  p.seed_ = seed;
  p.base_ = std::move(base);
  p.identity_ = Matrix::Identity(p.n_, p.n_);
  return p;
}

SharePolicy SharePolicy::make_randomized_all_to_all(int n, double rho, int d, std::uint64_t seed) {
  if (d < 1) throw ConfigError("share policy: d must be positive");
  if (n < 1) throw ConfigError("share policy: n must be positive");
  if (!(rho > 0.0 && rho <= 1.0)) throw ConfigError("randomized all-to-all: need 0 < rho <= 1");
  SharePolicy p;
  p.kind_ = Kind::randomized;
  p.mode_ = RandomMode::all_to_all;
  p.n_ = n;
  p.d_ = d;
  p.m_ = 0;
  p.rho_ = rho;
  p.seed_ = seed;
  p.identity_ = Matrix::Identity(n, n);
  p.averaging_ = Matrix::Constant(n, n, 1.0 / n);
  p.base_ = p.averaging_;
  return p;
}

std::vector<int> SharePolicy::subset_at(long t) const {
  std::vector<int> all(d_);
  std::iota(all.begin(), all.end(), 0);
  if (m_ == d_) return all;
  // Partial Fisher-Yates from a stream keyed by (seed, t): every node derives the same subset.
  std::mt19937_64 gen(rng::mix({seed_, static_cast<std::uint64_t>(t)}));
  for (int i = 0; i < m_; ++i) {
    std::uniform_int_distribution<int> pick(i, d_ - 1);
    std::swap(all[i], all[pick(gen)]);
  }
  all.resize(m_);
  std::sort(all.begin(), all.end());
  return all;
}

bool SharePolicy::is_active(long t, int k) const {
  if (k < 0 || k >= d_) throw DomainError("share policy: coordinate index out of range");
  switch (kind_) {
    case Kind::static_sharing:
      return true;
    case Kind::round_robin: {
      const long period = d_ / m_;
      const long slot = ((t % period) + period) % period;
      return k >= slot * m_ && k < (slot + 1) * m_;
    }
    case Kind::randomized:
      if (mode_ == RandomMode::all_to_all)
        return rng::keyed_uniform({seed_, static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(k)}) < rho_;
      {
        const std::vector<int> s = subset_at(t);
        return std::binary_search(s.begin(), s.end(), k);
      }
  }
  return false;
}

const Matrix& SharePolicy::mixing_at(long t, int k) const {
  const bool active = is_active(t, k);
  if (kind_ == Kind::static_sharing) return per_coordinate_[k];
  if (!active) return identity_;
  return kind_ == Kind::randomized && mode_ == RandomMode::all_to_all ? averaging_ : base_;
}

CoordinateSlot SharePolicy::slot_at(long t) const {
  CoordinateSlot slot{t, {}};
  if (kind_ == Kind::randomized && mode_ == RandomMode::subset) {
    slot.active = subset_at(t);
    return slot;
  }
  for (int k = 0; k < d_; ++k)
    if (is_active(t, k)) slot.active.push_back(k);
  return slot;
}

Matrix SharePolicy::expected_squared_mixing(int k) const {
  if (kind_ != Kind::randomized) throw ConfigError("expected_squared_mixing needs a randomized policy");
  if (k < 0 || k >= d_) throw DomainError("share policy: coordinate index out of range");
  if (mode_ == RandomMode::all_to_all) return rho_ * averaging_ + (1.0 - rho_) * identity_;
  const double q = static_cast<double>(m_) / d_;
  return q * (base_ * base_) + (1.0 - q) * identity_;
}

double SharePolicy::expected_active() const {
  switch (kind_) {
    case Kind::static_sharing:
      return d_;
    case Kind::round_robin:
      return m_;
    case Kind::randomized:
      return mode_ == RandomMode::all_to_all ? rho_ * d_ : m_;
  }
  return 0.0;
}

std::string SharePolicy::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case Kind::static_sharing:
      os << "static";
      break;
    case Kind::round_robin:
      os << "round_robin(m=" << m_ << ")";
      break;
    case Kind::randomized:
      if (mode_ == RandomMode::subset)
        os << "randomized_subset(m=" << m_ << ")";
      else
        os << "randomized_all_to_all(rho=" << rho_ << ")";
      break;
  }
  return os.str();
}

}  // namespace dcda
