#include <cmath>
#include <vector>

#include "bobw/core.hpp"
#include "bobw/ftrl.hpp"
#include "bobw/policy.hpp"
#include "doctest.h"
#include "oracles.hpp"

using bobw::BobwPolicy;
using bobw::Error;
using bobw::ErrorCode;
using bobw::HintMode;
using bobw::PolicyConfig;
using bobw::Rng;
using bobw::Vec;

static PolicyConfig make_config(int k, std::int64_t t, double eps = 0.2) {
  PolicyConfig c;
  c.num_arms = k;
  c.horizon = t;
  c.epsilon = eps;
  return c;
}

TEST_CASE("initial state matches the contract") {
  BobwPolicy p(make_config(3, 100));
  CHECK(p.gamma() == doctest::Approx(std::log(100.0)).epsilon(1e-15));
  const Vec m = p.hint();
  const Vec b = p.betas();
  for (int i = 0; i < 3; ++i) {
    CHECK(m[static_cast<std::size_t>(i)] == 0.5);
    CHECK(b[static_cast<std::size_t>(i)] == doctest::Approx(1.2).epsilon(1e-15));
  }
  CHECK(p.round() == 0);
}

TEST_CASE("config validation rejects out-of-range parameters") {
  CHECK_THROWS_AS(BobwPolicy(make_config(3, 54)), Error);
  CHECK_THROWS_AS(BobwPolicy(make_config(3, 100, 0.6)), Error);
  CHECK_THROWS_AS(BobwPolicy(make_config(3, 100, 0.0)), Error);
  CHECK_THROWS_AS(BobwPolicy(make_config(1, 100)), Error);
  // Horizon must also cover the arm count.
  CHECK_THROWS_AS(BobwPolicy(make_config(60, 56)), Error);
  CHECK_NOTHROW(BobwPolicy(make_config(60, 60)));
  PolicyConfig ewma = make_config(2, 100);
  ewma.hint_mode = HintMode::Ewma;
  ewma.ewma_eta = 0.5;
  CHECK_THROWS_AS(BobwPolicy{ewma}, Error);
  ewma.ewma_eta = 0.25;
  CHECK_NOTHROW(BobwPolicy{ewma});
}

TEST_CASE("round one is uniform for any K") {
  for (int k : {2, 3, 7}) {
    BobwPolicy p(make_config(k, 200));
    const Vec d = p.select();
    for (double v : d) CHECK(v == doctest::Approx(1.0 / k).epsilon(1e-9));
  }
}

TEST_CASE("estimate_loss applies the importance-weighted correction") {
  const Vec p{0.5, 0.5};
  const Vec m{0.3, 0.7};
  const Vec a = bobw::estimate_loss(p, m, 0, 1.0);
  CHECK(a[0] == doctest::Approx(1.7).epsilon(1e-15));
  CHECK(a[1] == doctest::Approx(0.7).epsilon(1e-15));
  const Vec b = bobw::estimate_loss(p, m, 1, 0.0);
  CHECK(b[0] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(b[1] == doctest::Approx(-0.7).epsilon(1e-15));
  // Zero prediction error returns the hint untouched.
  const Vec c = bobw::estimate_loss(p, m, 0, 0.3);
  CHECK(c[0] == 0.3);
  CHECK(c[1] == 0.7);
}

TEST_CASE("estimator is conditionally unbiased to machine precision") {
  Rng rng(404);
  for (int k : {2, 5, 10}) {
    for (int trial = 0; trial < 50; ++trial) {
      Vec p(static_cast<std::size_t>(k)), m(static_cast<std::size_t>(k)),
          loss(static_cast<std::size_t>(k));
      double s = 0.0;
      for (auto& v : p) {
        v = 0.05 + rng.uniform01();
        s += v;
      }
      for (auto& v : p) v /= s;
      for (auto& v : m) v = rng.uniform01();
      for (auto& v : loss) v = rng.uniform01();
      Vec mixed(static_cast<std::size_t>(k), 0.0);
      for (int arm = 0; arm < k; ++arm) {
        const Vec est =
            bobw::estimate_loss(p, m, arm, loss[static_cast<std::size_t>(arm)]);
        for (std::size_t i = 0; i < est.size(); ++i) {
          mixed[i] += p[static_cast<std::size_t>(arm)] * est[i];
        }
      }
      for (std::size_t i = 0; i < mixed.size(); ++i) {
        REQUIRE(std::abs(mixed[i] - loss[i]) <= 1e-12);
      }
    }
  }
}

TEST_CASE("alpha increment clamps and scales as specified") {
  // (observed - m)^2 = 0.25, p = 0.9, gamma = 4:
  // 0.25 * min{1, 2*0.1/(0.81*4)} = 0.25 * (0.2/3.24).
  CHECK(bobw::alpha_increment(1.0, 0.5, 0.9, 4.0) ==
        doctest::Approx(0.25 * (0.2 / 3.24)).epsilon(1e-12));
  CHECK(bobw::alpha_increment(1.0, 0.5, 0.9, 4.0) ==
        doctest::Approx(0.0154321).epsilon(1e-4));
  // Zero squared error.
  CHECK(bobw::alpha_increment(0.5, 0.5, 0.9, 4.0) == 0.0);
  // Small p: the min clamps at 1, leaving the raw squared error.
  CHECK(bobw::alpha_increment(1.0, 0.5, 0.01, 4.0) == doctest::Approx(0.25));
  // Always within [0, 1].
  Rng rng(500);
  for (int i = 0; i < 2000; ++i) {
    const double v = bobw::alpha_increment(rng.uniform01(), rng.uniform01(),
                                           0.001 + 0.998 * rng.uniform01(),
                                           1.0 + 10.0 * rng.uniform01());
    REQUIRE(v >= 0.0);
    REQUIRE(v <= 1.0);
  }
}

TEST_CASE("update maintains hint, counts, and beta recurrence") {
  BobwPolicy p(make_config(2, 100));
  const double gamma = p.gamma();
  const Vec d1 = p.select();
  p.update(0, 1.0);

  // First pull with observed 1: running mean with prior 1/2 gives 0.75.
  CHECK(p.hint()[0] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(p.hint()[1] == 0.5);
  CHECK(p.counts()[0] == 1);
  CHECK(p.counts()[1] == 0);

  // Cumulative estimates: played arm gets the corrected value, the other
  // arm exactly its hint.
  const double corrected = 0.5 + (1.0 - 0.5) / d1[0];
  CHECK(p.cumulative_estimates()[0] == doctest::Approx(corrected).epsilon(1e-12));
  CHECK(p.cumulative_estimates()[1] == doctest::Approx(0.5).epsilon(1e-15));

  // Beta recurrence: beta^2 - beta0^2 = alpha/gamma exactly.
  const double alpha = bobw::alpha_increment(1.0, 0.5, d1[0], gamma);
  CHECK(p.alpha_sums()[0] == doctest::Approx(alpha).epsilon(1e-15));
  CHECK(p.betas()[0] ==
        doctest::Approx(std::sqrt(1.2 * 1.2 + alpha / gamma)).epsilon(1e-15));
  CHECK(p.betas()[1] == doctest::Approx(1.2).epsilon(1e-15));
}

TEST_CASE("second-round distribution matches a grid solve of the update rule") {
  BobwPolicy p(make_config(2, 100));
  const Vec d1 = p.select();
  p.update(0, 1.0);

  // Hand-update the state: hints, cumulative estimates, betas.
  const double gamma = std::log(100.0);
  const Vec m2{0.75, 0.5};
  const double est0 = 0.5 + (1.0 - 0.5) / d1[0];
  const Vec cum{est0, 0.5};
  const double alpha = bobw::alpha_increment(1.0, 0.5, d1[0], gamma);
  const Vec betas{std::sqrt(1.2 * 1.2 + alpha / gamma), 1.2};
  Vec target(2);
  for (std::size_t i = 0; i < 2; ++i) target[i] = m2[i] + cum[i];

  const Vec grid = oracles::grid_min_k2(target, betas, gamma);
  const Vec d2 = p.select();
  CHECK(std::abs(d2[0] - grid[0]) < 1e-5);
  CHECK(std::abs(d2[1] - grid[1]) < 1e-5);
  // The arm that just revealed a high loss loses mass.
  CHECK(d2[0] < d1[0]);
}

TEST_CASE("ewma hint mode updates only the played arm") {
  PolicyConfig c = make_config(2, 100);
  c.hint_mode = HintMode::Ewma;
  c.ewma_eta = 0.25;
  BobwPolicy p(c);
  p.select();
  p.update(0, 1.0);
  // (1 - eta) * 0.5 + eta * 1 = 0.625.
  CHECK(p.hint()[0] == doctest::Approx(0.625).epsilon(1e-15));
  CHECK(p.hint()[1] == 0.5);
  p.select();
  p.update(0, 0.0);
  CHECK(p.hint()[0] == doctest::Approx(0.75 * 0.625).epsilon(1e-15));
}

TEST_CASE("select/update alternation is enforced") {
  BobwPolicy p(make_config(2, 100));
  CHECK_THROWS_AS(p.update(0, 0.5), Error);
  p.select();
  CHECK_THROWS_AS(p.select(), Error);
  p.update(0, 0.5);
  CHECK_THROWS_AS(p.update(0, 0.5), Error);
  p.select();
  CHECK_THROWS_AS(p.update(5, 0.5), Error);
  CHECK_THROWS_AS(p.update(0, 1.5), Error);
}

TEST_CASE("beta recurrence and alpha range hold over a long random run") {
  PolicyConfig c = make_config(3, 2000);
  BobwPolicy p(c);
  Rng rng(606);
  Vec prev_betas = p.betas();
  Vec prev_alpha = p.alpha_sums();
  const double gamma = p.gamma();
  const double beta0_sq = (1.0 + c.epsilon) * (1.0 + c.epsilon);
  for (int t = 0; t < 600; ++t) {
    const Vec d = p.select();
    bobw::validate_simplex(d);
    const int arm = bobw::sample_arm(d, rng.uniform01());
    const double loss = rng.uniform01();
    p.update(arm, loss);
    const Vec betas = p.betas();
    const Vec alpha = p.alpha_sums();
    for (std::size_t i = 0; i < betas.size(); ++i) {
      REQUIRE(betas[i] >= prev_betas[i]);
      const double inc = alpha[i] - prev_alpha[i];
      REQUIRE(inc >= 0.0);
      REQUIRE(inc <= 1.0 + 1e-15);
      // Exact square recurrence against the policy's own alpha sums.
      REQUIRE(std::abs(betas[i] * betas[i] - (beta0_sq + alpha[i] / gamma)) <=
              1e-12);
    }
    prev_betas = betas;
    prev_alpha = alpha;
  }
}

TEST_CASE("hint-error sum property holds per arm on empirical-mean runs") {
  // For each arm, sum_t alpha_i(t) stays below
  // sum_t 1[I=i](loss - m*)^2 + log(1 + N_i) + 5/4 for reference points m*
  // on a coarse grid.
  PolicyConfig c = make_config(2, 1500);
  BobwPolicy p(c);
  Rng rng(707);
  std::vector<std::vector<double>> observed(2);
  for (int t = 0; t < 1000; ++t) {
    const Vec d = p.select();
    const int arm = bobw::sample_arm(d, rng.uniform01());
    const double loss = rng.uniform01() < 0.5 ? 0.0 : 1.0;
    p.update(arm, loss);
    observed[static_cast<std::size_t>(arm)].push_back(loss);
  }
  for (int i = 0; i < 2; ++i) {
    const auto& obs = observed[static_cast<std::size_t>(i)];
    for (double mstar : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      double rhs = std::log(1.0 + static_cast<double>(obs.size())) + 1.25;
      for (double v : obs) rhs += (v - mstar) * (v - mstar);
      REQUIRE(p.alpha_sums()[static_cast<std::size_t>(i)] <= rhs + 1e-9);
    }
  }
}

TEST_CASE("state snapshots round-trip bit-identically") {
  PolicyConfig c = make_config(3, 500);
  BobwPolicy p(c);
  Rng rng(808);
  for (int t = 0; t < 40; ++t) {
    const Vec d = p.select();
    p.update(bobw::sample_arm(d, rng.uniform01()), rng.uniform01());
  }
  const std::string snap = p.state_json();
  BobwPolicy q = BobwPolicy::from_state_json(snap);
  CHECK(q.round() == p.round());
  CHECK(q.gamma() == p.gamma());
  for (int t = 0; t < 40; ++t) {
    const Vec dp = p.select();
    const Vec dq = q.select();
    for (std::size_t i = 0; i < dp.size(); ++i) REQUIRE(dp[i] == dq[i]);
    const int arm = bobw::sample_arm(dp, 0.37);
    const double loss = (t % 3) * 0.5;
    p.update(arm, loss);
    q.update(arm, loss);
  }
  CHECK(p.state_json() == q.state_json());
}

TEST_CASE("running-mean hint sequences satisfy the square-error bound") {
  // Standalone hint property: for scalar sequences with the prior-1/2
  // running mean, sum((l-m)^2 - (l-m*)^2) <= 5/4 + log T on an m* grid.
  const int t_max = 1000;
  const double cap = 1.25 + std::log(static_cast<double>(t_max));
  Rng rng(909);
  auto run_one = [&](auto next_loss) {
    double sum_losses = 0.0;
    std::vector<double> losses, hints;
    for (int t = 1; t <= t_max; ++t) {
      const double m = (0.5 + sum_losses) / static_cast<double>(t);
      const double l = next_loss(t, m);
      hints.push_back(m);
      losses.push_back(l);
      sum_losses += l;
    }
    for (int gi = 0; gi <= 100; ++gi) {
      const double mstar = gi / 100.0;
      double lhs = 0.0;
      for (int t = 0; t < t_max; ++t) {
        const double em = losses[static_cast<std::size_t>(t)] -
                          hints[static_cast<std::size_t>(t)];
        const double es = losses[static_cast<std::size_t>(t)] - mstar;
        lhs += em * em - es * es;
      }
      REQUIRE(lhs <= cap + 1e-9);
    }
  };
  run_one([&](int, double) { return rng.uniform01(); });
  run_one([](int t, double) { return t % 2 == 0 ? 1.0 : 0.0; });
  // Greedy adversary: always report the loss farthest from the hint.
  run_one([](int, double m) { return m < 0.5 ? 1.0 : 0.0; });
}
