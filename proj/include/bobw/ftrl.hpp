#pragma once
// Inner solver for optimistic FTRL over the probability simplex with the
// hybrid regularizer
//
//   psi(p) = sum_i beta_i * phi(p_i),
//   phi(x) = x - 1 - log x + gamma * (x + (1 - x) * log(1 - x)),
//
// where gamma > 0 and each beta_i > 0. phi combines a log barrier (keeps
// every coordinate strictly positive) with the complementary entropy term
// (controls the mass pushed onto a single arm). The solver minimizes
// <L, p> + psi(p) over the interior of the simplex.

#include "bobw/core.hpp"

namespace bobw::ftrl {

// phi and its derivatives. phi is defined on (0,1], finite at 1 where the
// entropy term vanishes; phi' and phi'' are defined on (0,1).
double phi(double x, double gamma);
double phi_prime(double x, double gamma);   // 1 - 1/x - gamma * log(1-x)
double phi_second(double x, double gamma);  // 1/x^2 + gamma/(1-x)

struct SolveOptions {
  // Accepted KKT residual, relative to max(1, spread of L). The reported
  // residual in SolveResult is always the raw absolute value.
  double tol = 1e-9;
  int max_outer = 200;  // bisection steps on the normalization multiplier
  int max_inner = 100;  // Newton steps per coordinate inversion
  double p_min = 1e-12; // coordinate bracket is (p_min, 1 - p_min)
};

struct SolveResult {
  Vec p;
  // Dual variable of the simplex constraint: L_i + beta_i*phi'(p_i) + lambda = 0.
  double lambda = 0.0;
  // max_i |L_i + beta_i*phi'(p_i) + lambda| + |sum p - 1| at the returned point.
  double kkt_residual = 0.0;
  int outer_iterations = 0;
};

// Minimizes <L, p> + sum_i beta_i*phi(p_i, gamma) over the simplex interior.
// Inner loop inverts phi' per coordinate (safeguarded Newton); outer loop
// bisects the dual variable, whose normalization defect sum_i p_i(lambda) - 1
// is strictly decreasing. warm_lambda, when given, seeds the outer bracket
// (pass the lambda returned for a nearby instance, e.g. the previous round).
// Throws ConvergenceFailure if the residual target is not reached.
SolveResult solve_oftrl(const Vec& loss, const Vec& betas, double gamma,
                        const SolveOptions& opts = {},
                        const double* warm_lambda = nullptr);

// Unique x in (p_min, 1-p_min) with phi'(x) ~= target (clamped at the
// bracket ends when the target lies outside phi' of the bracket).
// x0 in (0,1) seeds Newton; pass a negative value for the default guess.
double invert_phi_prime(double target, double gamma, double p_min,
                        int max_iter, double x0 = -1.0);

// Bregman divergence of psi between q and p, both strictly inside (0,1)^K.
double bregman(const Vec& q, const Vec& p, const Vec& betas, double gamma);

// Closed forms for three one-dimensional concave maxima that drive the
// regret analysis. Each is exact, so they double as oracle targets.

// max over y > 0 of a*(x - y) - D1(y, x), where D1 is the Bregman divergence
// of -log. Equals g(a*x) with g(u) = u - log(1 + u); needs a*x >= -1 and
// returns +inf at equality (the gain is unbounded there).
double max_gain_logbarrier(double a, double x);

// max over y < 1 of a*(x - y) - D2(y, x), where D2 is the Bregman divergence
// of (1-x)*log(1-x). Equals (1 - x) * h(a) with h(u) = exp(u) - u - 1.
double max_gain_compentropy(double a, double x);

// max over y > 0 of a*y + b*log(y) - c*y^2 for a, b, c > 0:
//   y* = (a + sqrt(a^2 + 8 b c)) / (4 c),  value = (a*y* - b)/2 + b*log(y*).
double max_linear_log_quadratic(double a, double b, double c);

}  // namespace bobw::ftrl
