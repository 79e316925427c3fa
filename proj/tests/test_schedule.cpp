#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dcda/errors.hpp"
#include "dcda/schedule.hpp"
#include "dcda/topology.hpp"
#include "oracles.hpp"

#include <set>

using namespace dcda;

TEST_CASE("static policy always returns the assigned matrix") {
  const Matrix P = mixing_from_graph(make_ring(5, 1));
  const SharePolicy s = SharePolicy::make_static({P}, 3);
  for (long t = 1; t < 20; ++t)
    for (int k = 0; k < 3; ++k) {
      CHECK(s.mixing_at(t, k) == P);
      CHECK(s.is_active(t, k));
    }
  CHECK_THROWS_AS(s.mixing_at(1, 3), DomainError);
  CHECK_THROWS_AS(s.mixing_at(1, -1), DomainError);
  CHECK_THROWS_AS(s.expected_squared_mixing(0), ConfigError);

  // Per-coordinate assignment.
  const Matrix Q = mixing_from_graph(make_full(5));
  const SharePolicy pc = SharePolicy::make_static({P, Q}, 2);
  CHECK(pc.mixing_at(4, 0) == P);
  CHECK(pc.mixing_at(4, 1) == Q);
  CHECK_THROWS_AS(SharePolicy::make_static({P, Q}, 3), ConfigError);
  Matrix bad = P;
  bad(0, 0) += 0.1;
  CHECK_THROWS_AS(SharePolicy::make_static({bad}, 3), ConfigError);
}

TEST_CASE("round robin block order") {
  const Matrix P = mixing_from_graph(make_full(3));
  const Matrix I = Matrix::Identity(3, 3);
  const SharePolicy rr = SharePolicy::make_round_robin(P, 2, 4);
  for (long t : {2L, 4L, 10L}) {
    CHECK(rr.slot_at(t).active == std::vector<int>{0, 1});
    CHECK(rr.mixing_at(t, 0) == P);
    CHECK(rr.mixing_at(t, 3) == I);
  }
  for (long t : {1L, 3L, 11L}) CHECK(rr.slot_at(t).active == std::vector<int>{2, 3});
  CHECK_THROWS_AS(SharePolicy::make_round_robin(P, 7, 30), ConfigError);
  CHECK_THROWS_AS(SharePolicy::make_round_robin(P, 0, 30), ConfigError);
}

TEST_CASE("round robin activates every coordinate once per period") {
  const Matrix P = mixing_from_graph(make_ring(6, 1));
  for (int m : {1, 2, 3, 6}) {
    const SharePolicy rr = SharePolicy::make_round_robin(P, m, 6);
    const int kappa = 6 / m;
    for (long start = 1; start < 15; ++start) {
      std::vector<int> count(6, 0);
      for (long t = start; t < start + kappa; ++t)
        for (int k = 0; k < 6; ++k) count[k] += rr.is_active(t, k);
      for (int c : count) CHECK(c == 1);
    }
  }
}

TEST_CASE("randomized subset") {
  const Matrix P = mixing_from_graph(make_ring(5, 1));
  const SharePolicy a = SharePolicy::make_randomized_subset(P, 3, 10, 99);
  const SharePolicy b = SharePolicy::make_randomized_subset(P, 3, 10, 99);
  std::vector<int> hits(10, 0);
  for (long t = 1; t <= 4000; ++t) {
    const auto slot = a.slot_at(t);
    CHECK(slot.active.size() == 3);
    CHECK(std::set<int>(slot.active.begin(), slot.active.end()).size() == 3);
    CHECK(slot.active == b.slot_at(t).active);
    for (int k : slot.active) ++hits[k];
    for (int k = 0; k < 10; ++k) CHECK(a.mixing_at(t, k) == (a.is_active(t, k) ? P : Matrix::Identity(5, 5)));
  }
  // Inclusion frequency is m/d = 0.3 per coordinate.
  for (int h : hits) CHECK(std::abs(h / 4000.0 - 0.3) < 0.04);
  CHECK(SharePolicy::make_randomized_subset(P, 0, 10, 1).slot_at(5).active.empty());
  CHECK(SharePolicy::make_randomized_subset(P, 10, 10, 1).slot_at(5).active.size() == 10);
  CHECK(a.expected_active() == 3.0);
}

TEST_CASE("randomized all-to-all") {
  const SharePolicy always = SharePolicy::make_randomized_all_to_all(4, 1.0, 3, 5);
  const Matrix J = Matrix::Constant(4, 4, 0.25);
  for (long t = 1; t < 30; ++t)
    for (int k = 0; k < 3; ++k) CHECK(always.mixing_at(t, k) == J);

  const SharePolicy half = SharePolicy::make_randomized_all_to_all(4, 0.5, 3, 5);
  int active = 0;
  for (long t = 1; t <= 10000; ++t) active += half.is_active(t, 1);
  CHECK(std::abs(active / 10000.0 - 0.5) < 0.02);
  CHECK_THROWS_AS(SharePolicy::make_randomized_all_to_all(4, 0.0, 3, 5), ConfigError);
  CHECK_THROWS_AS(SharePolicy::make_randomized_all_to_all(4, 1.5, 3, 5), ConfigError);
}

TEST_CASE("expected squared mixing closed forms") {
  const Matrix J4 = Matrix::Constant(4, 4, 0.25);
  CHECK((SharePolicy::make_randomized_all_to_all(4, 1.0, 2, 1).expected_squared_mixing(0) - J4).norm() < 1e-15);
  Matrix expected = 0.5 * Matrix::Constant(2, 2, 0.5) + 0.5 * Matrix::Identity(2, 2);
  CHECK((SharePolicy::make_randomized_all_to_all(2, 0.5, 2, 1).expected_squared_mixing(1) - expected).norm() < 1e-15);
  const Matrix P = mixing_from_graph(make_ring(6, 1));
  CHECK((SharePolicy::make_randomized_subset(P, 4, 4, 1).expected_squared_mixing(2) - P * P).norm() < 1e-15);
}

TEST_CASE("expected squared mixing matches Monte Carlo") {
  const Matrix P = mixing_from_graph(make_ring(5, 1));
  const SharePolicy s = SharePolicy::make_randomized_subset(P, 2, 5, 17);
  Matrix acc = Matrix::Zero(5, 5);
  const int draws = 20000;
  for (long t = 1; t <= draws; ++t) {
    const Matrix& M = s.mixing_at(t, 3);
    acc += M * M;
  }
  CHECK((acc / draws - s.expected_squared_mixing(3)).cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("sigma2 of the expected squared mixing decreases with the sharing rate") {
  const Matrix P = mixing_from_graph(make_ring(8, 1));
  double previous = 1.0 + 1e-12;
  for (int m = 1; m <= 8; ++m) {
    const double s2 = oracle::sigma2_svd(SharePolicy::make_randomized_subset(P, m, 8, 3).expected_squared_mixing(0));
    CHECK(s2 >= 0.0);
    CHECK(s2 <= 1.0);
    CHECK(s2 < previous);
    previous = s2;
  }
  previous = 1.0 + 1e-12;
  for (double rho : {0.1, 0.3, 0.5, 0.9, 1.0}) {
    const Matrix E = SharePolicy::make_randomized_all_to_all(6, rho, 2, 3).expected_squared_mixing(0);
    const double s2 = oracle::sigma2_svd(E);
    CHECK(s2 == doctest::Approx(1.0 - rho).epsilon(1e-12));
    CHECK(s2 < previous);
    previous = s2;
  }
}

TEST_CASE("every returned matrix is doubly stochastic") {
  const Matrix P = mixing_from_graph(make_random(7, 0.4, 2));
  const SharePolicy policies[] = {SharePolicy::make_static({P}, 6), SharePolicy::make_round_robin(P, 3, 6),
                                  SharePolicy::make_randomized_subset(P, 2, 6, 8),
                                  SharePolicy::make_randomized_all_to_all(7, 0.4, 6, 8)};
  for (const SharePolicy& s : policies)
    for (long t = 1; t < 40; ++t)
      for (int k = 0; k < 6; ++k) CHECK(is_doubly_stochastic(s.mixing_at(t, k), 1e-12));
}
