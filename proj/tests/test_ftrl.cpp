#include <algorithm>
#include <cmath>
#include <vector>

#include "bobw/core.hpp"
#include "bobw/ftrl.hpp"
#include "doctest.h"
#include "oracles.hpp"

using bobw::Error;
using bobw::Rng;
using bobw::Vec;
namespace ftrl = bobw::ftrl;

TEST_CASE("phi at the right endpoint equals gamma") {
  CHECK(ftrl::phi(1.0, 4.0) == doctest::Approx(4.0).epsilon(1e-12));
  // x=1: x-1-log x = 0 and the entropy part is gamma*(1 + 0) = gamma.
  CHECK(ftrl::phi(1.0, 7.5) == doctest::Approx(7.5).epsilon(1e-12));
}

TEST_CASE("phi is nonnegative on (0,1]") {
  for (double gamma : {1.0, 4.0, std::log(55.0), 11.5}) {
    for (double x = 1e-6; x <= 1.0; x += 1e-3) {
      REQUIRE(ftrl::phi(x, gamma) >= 0.0);
    }
    CHECK(ftrl::phi(1e-9, gamma) >= 0.0);
  }
}

TEST_CASE("phi(1/T, log T) stays below log T at the minimum horizon") {
  const double t = 55.0;
  const double g = std::log(t);
  CHECK(ftrl::phi(1.0 / t, g) <= g);
}

TEST_CASE("phi rejects arguments outside (0,1]") {
  CHECK_THROWS_AS(ftrl::phi(0.0, 4.0), Error);
  CHECK_THROWS_AS(ftrl::phi(-0.5, 4.0), Error);
  CHECK_THROWS_AS(ftrl::phi(1.5, 4.0), Error);
  CHECK_THROWS_AS(ftrl::phi(0.5, 0.0), Error);
  CHECK_THROWS_AS(ftrl::phi_prime(0.0, 4.0), Error);
  CHECK_THROWS_AS(ftrl::phi_prime(1.0, 4.0), Error);
}

TEST_CASE("phi_prime matches the closed form and central differences") {
  // 1 - 1/x - gamma*log(1-x) at x = 1/2, gamma = 4: -1 + 4 log 2.
  CHECK(ftrl::phi_prime(0.5, 4.0) ==
        doctest::Approx(-1.0 + 4.0 * std::log(2.0)).epsilon(1e-12));
  CHECK(ftrl::phi_prime(0.5, 4.0) == doctest::Approx(1.77259).epsilon(1e-5));
  for (double gamma : {2.0, 4.0, 9.2}) {
    for (double x : {0.05, 0.2, 0.5, 0.8, 0.95}) {
      const double numeric = oracles::central_diff(
          [gamma](double y) { return ftrl::phi(y, gamma); }, x, 1e-6);
      CHECK(ftrl::phi_prime(x, gamma) == doctest::Approx(numeric).epsilon(1e-6));
    }
  }
}

TEST_CASE("phi_prime is strictly increasing and phi_second positive") {
  const double gamma = 4.0;
  double prev = ftrl::phi_prime(1e-4, gamma);
  for (double x = 1e-3; x < 1.0 - 1e-6; x += 1e-3) {
    const double cur = ftrl::phi_prime(x, gamma);
    REQUIRE(cur > prev);
    prev = cur;
  }
  for (double x : {0.1, 0.5, 0.9}) {
    CHECK(ftrl::phi_second(x, gamma) ==
          doctest::Approx(1.0 / (x * x) + gamma / (1.0 - x)).epsilon(1e-12));
    const double numeric = oracles::central_diff(
        [gamma](double y) { return ftrl::phi_prime(y, gamma); }, x, 1e-6);
    CHECK(ftrl::phi_second(x, gamma) == doctest::Approx(numeric).epsilon(1e-5));
  }
}

TEST_CASE("invert_phi_prime round-trips") {
  const double gamma = std::log(100.0);
  for (double x : {1e-6, 1e-3, 0.1, 0.5, 0.9, 0.999}) {
    const double target = ftrl::phi_prime(x, gamma);
    const double back = ftrl::invert_phi_prime(target, gamma, 1e-12, 100);
    CHECK(back == doctest::Approx(x).epsilon(1e-9));
  }
}

static ftrl::SolveResult solve(const Vec& loss, const Vec& betas, double gamma) {
  return ftrl::solve_oftrl(loss, betas, gamma);
}

TEST_CASE("solver returns uniform for constant losses") {
  for (int k : {2, 3, 6}) {
    Vec loss(static_cast<std::size_t>(k), 0.7);
    Vec betas(static_cast<std::size_t>(k), 1.2);
    const auto res = solve(loss, betas, 4.0);
    bobw::validate_simplex(res.p);
    for (double v : res.p) {
      CHECK(v == doctest::Approx(1.0 / k).epsilon(1e-9));
    }
    CHECK(res.kkt_residual <= 1e-9);
  }
}

TEST_CASE("solver is invariant to constant loss shifts") {
  const Vec loss{0.3, 1.1, 2.0};
  Vec shifted = loss;
  for (auto& v : shifted) v += 17.5;
  const Vec betas{1.2, 1.5, 2.0};
  const auto a = solve(loss, betas, 4.0);
  const auto b = solve(shifted, betas, 4.0);
  for (std::size_t i = 0; i < loss.size(); ++i) {
    CHECK(a.p[i] == doctest::Approx(b.p[i]).epsilon(1e-10));
  }
}

TEST_CASE("solver matches the K=2 grid oracle on the worked example") {
  const Vec loss{0.0, 1.0};
  const Vec betas{1.2, 1.2};
  const double gamma = 4.0;
  const auto res = solve(loss, betas, gamma);
  const Vec grid = oracles::grid_min_k2(loss, betas, gamma);
  CHECK(std::abs(res.p[0] - grid[0]) < 1e-5);
  CHECK(std::abs(res.p[1] - grid[1]) < 1e-5);
  CHECK(res.p[0] > 0.5);  // cheaper arm gets more mass
  CHECK(res.kkt_residual <= 1e-9);
}

TEST_CASE("solver KKT conditions hold on random instances") {
  Rng rng(2024);
  for (int trial = 0; trial < 25; ++trial) {
    const int k = 2 + static_cast<int>(rng.uniform01() * 5);
    Vec loss, betas;
    for (int i = 0; i < k; ++i) {
      loss.push_back(rng.uniform01() * 20.0);
      betas.push_back(1.0 + rng.uniform01() * 3.0);
    }
    const double gamma = 1.0 + rng.uniform01() * 10.0;
    const auto res = solve(loss, betas, gamma);
    bobw::validate_simplex(res.p);
    CHECK(res.kkt_residual <= 1e-9);
    // Stationarity: loss_i + beta_i phi'(p_i) is the same constant (-lambda).
    const double c0 = loss[0] + betas[0] * ftrl::phi_prime(res.p[0], gamma);
    for (std::size_t i = 1; i < res.p.size(); ++i) {
      const double ci = loss[i] + betas[i] * ftrl::phi_prime(res.p[i], gamma);
      CHECK(ci == doctest::Approx(c0).epsilon(1e-8));
    }
  }
}

TEST_CASE("solver is permutation-equivariant") {
  const Vec loss{0.2, 1.4, 0.9, 3.0};
  const Vec betas{1.2, 1.3, 2.2, 1.7};
  const double gamma = 5.0;
  const auto base = solve(loss, betas, gamma);
  const std::vector<std::size_t> perm{2, 0, 3, 1};
  Vec ploss(4), pbetas(4);
  for (std::size_t i = 0; i < 4; ++i) {
    ploss[i] = loss[perm[i]];
    pbetas[i] = betas[perm[i]];
  }
  const auto permuted = solve(ploss, pbetas, gamma);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(permuted.p[i] == doctest::Approx(base.p[perm[i]]).epsilon(1e-9));
  }
}

TEST_CASE("solver responds monotonically to a single loss increase") {
  Vec loss{0.5, 0.5, 0.5};
  const Vec betas{1.2, 1.2, 1.2};
  const auto before = solve(loss, betas, 4.0);
  loss[1] += 2.0;
  const auto after = solve(loss, betas, 4.0);
  CHECK(after.p[1] < before.p[1]);
  CHECK(after.p[0] > before.p[0]);
  CHECK(after.p[2] > before.p[2]);
}

TEST_CASE("solver solutions are unique up to tolerance across restarts") {
  const Vec loss{4.0, 0.1, 2.2};
  const Vec betas{1.4, 1.2, 3.0};
  const double gamma = 6.0;
  const auto a = solve(loss, betas, gamma);
  double warm = a.lambda * 0.5 - 3.0;  // deliberately poor warm start
  const auto b = ftrl::solve_oftrl(loss, betas, gamma, {}, &warm);
  for (std::size_t i = 0; i < loss.size(); ++i) {
    CHECK(std::abs(a.p[i] - b.p[i]) <= 10.0 * 1e-9);
  }
}

TEST_CASE("solver rejects invalid inputs") {
  CHECK_THROWS_AS(solve(Vec{1.0}, Vec{1.2}, 4.0), Error);
  CHECK_THROWS_AS(solve(Vec{1.0, 2.0}, Vec{1.2}, 4.0), Error);
  CHECK_THROWS_AS(solve(Vec{1.0, 2.0}, Vec{1.2, -1.0}, 4.0), Error);
  CHECK_THROWS_AS(solve(Vec{1.0, 2.0}, Vec{1.2, 1.2}, 0.0), Error);
}

TEST_CASE("bregman divergence of the regularizer behaves") {
  const Vec betas{1.2, 1.2};
  const double gamma = 4.0;
  const Vec p{0.5, 0.5};
  const Vec q{0.4, 0.6};
  // Nonnegative, zero at equal arguments.
  CHECK(ftrl::bregman(p, p, betas, gamma) == doctest::Approx(0.0).epsilon(1e-14));
  const double d = ftrl::bregman(q, p, betas, gamma);
  CHECK(d > 0.0);
  // Recompose by hand: sum_i beta_i (phi(q_i) - phi(p_i) - phi'(p_i)(q_i-p_i)).
  double hand = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    hand += betas[i] * (ftrl::phi(q[i], gamma) - ftrl::phi(p[i], gamma) -
                        ftrl::phi_prime(p[i], gamma) * (q[i] - p[i]));
  }
  CHECK(d == doctest::Approx(hand).epsilon(1e-10));
}

TEST_CASE("log-barrier gain closed form") {
  CHECK(ftrl::max_gain_logbarrier(0.0, 0.5) == doctest::Approx(0.0).epsilon(1e-14));
  // a=1, x=0.5: g(0.5) = 0.5 - log 1.5.
  CHECK(ftrl::max_gain_logbarrier(1.0, 0.5) ==
        doctest::Approx(0.5 - std::log(1.5)).epsilon(1e-12));
  CHECK(ftrl::max_gain_logbarrier(1.0, 0.5) ==
        doctest::Approx(0.094535).epsilon(1e-4));
  CHECK_THROWS_AS(ftrl::max_gain_logbarrier(-3.0, 0.5), Error);
  CHECK_THROWS_AS(ftrl::max_gain_logbarrier(1.0, 0.0), Error);
}

TEST_CASE("log-barrier gain matches numeric maximization") {
  // max over y in (0,1] of a(x-y) - beta-free divergence with the pure log
  // barrier d(y,x) = y/x - 1 - log(y/x); compare against golden search.
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const double x = 0.05 + 0.9 * rng.uniform01();
    const double a_lo = -0.9 / x;
    const double a = a_lo + (5.0 - a_lo) * rng.uniform01();
    auto objective = [a, x](double y) {
      return a * (x - y) - (y / x - 1.0 - std::log(y / x));
    };
    const double numeric = oracles::golden_max(objective, 1e-9, 200.0 * x + 1.0);
    CHECK(ftrl::max_gain_logbarrier(a, x) ==
          doctest::Approx(numeric).epsilon(1e-6));
  }
}

TEST_CASE("complementary-entropy gain closed form") {
  CHECK(ftrl::max_gain_compentropy(0.0, 0.3) ==
        doctest::Approx(0.0).epsilon(1e-14));
  // a=0.5, x=0.3: 0.7*(e^0.5 - 1.5).
  CHECK(ftrl::max_gain_compentropy(0.5, 0.3) ==
        doctest::Approx(0.7 * (std::exp(0.5) - 1.5)).epsilon(1e-12));
  CHECK(ftrl::max_gain_compentropy(0.5, 0.3) ==
        doctest::Approx(0.104105).epsilon(1e-4));
  CHECK_THROWS_AS(ftrl::max_gain_compentropy(0.5, -0.1), Error);
}

TEST_CASE("complementary-entropy gain is quadratically bounded for a <= 1") {
  for (double x : {0.1, 0.4, 0.8}) {
    for (double a = -3.0; a <= 1.0; a += 0.01) {
      REQUIRE(ftrl::max_gain_compentropy(a, x) <= (1.0 - x) * a * a + 1e-12);
    }
  }
}

TEST_CASE("complementary-entropy gain matches numeric maximization") {
  Rng rng(78);
  for (int trial = 0; trial < 200; ++trial) {
    const double x = 0.05 + 0.9 * rng.uniform01();
    const double a = -3.0 + 6.0 * rng.uniform01();
    // Divergence of psi(y) = (1-y)log(1-y), psi'(x) = -(log(1-x)+1):
    // D(y,x) = psi(y) - psi(x) + (log(1-x)+1)(y-x).
    auto objective = [a, x](double y) {
      const double psi_y = (1.0 - y) * std::log(1.0 - y);
      const double psi_x = (1.0 - x) * std::log(1.0 - x);
      const double slope = std::log(1.0 - x) + 1.0;
      return a * (x - y) - (psi_y - psi_x + slope * (y - x));
    };
    const double numeric = oracles::golden_max(objective, -25.0, 1.0 - 1e-12);
    CHECK(ftrl::max_gain_compentropy(a, x) ==
          doctest::Approx(numeric).epsilon(1e-6));
  }
}

TEST_CASE("linear-log-quadratic maximum closed form") {
  Rng rng(79);
  for (int trial = 0; trial < 200; ++trial) {
    const double a = 0.1 + 10.0 * rng.uniform01();
    const double b = 0.1 + 10.0 * rng.uniform01();
    const double c = 0.1 + 10.0 * rng.uniform01();
    auto objective = [a, b, c](double y) {
      return a * y + b * std::log(y) - c * y * y;
    };
    const double numeric = oracles::golden_max(objective, 1e-12, 400.0);
    CHECK(ftrl::max_linear_log_quadratic(a, b, c) ==
          doctest::Approx(numeric).epsilon(1e-6));
  }
  CHECK_THROWS_AS(ftrl::max_linear_log_quadratic(0.0, 1.0, 1.0), Error);
  CHECK_THROWS_AS(ftrl::max_linear_log_quadratic(1.0, -1.0, 1.0), Error);
  CHECK_THROWS_AS(ftrl::max_linear_log_quadratic(1.0, 1.0, 0.0), Error);
}
