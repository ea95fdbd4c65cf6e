#include "bobw/ftrl.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace bobw::ftrl {

namespace {

void check_gamma(double gamma) {
  if (!std::isfinite(gamma) || !(gamma > 0.0)) {
    fail(ErrorCode::DomainError, "gamma must be positive and finite");
  }
}

// Inverts phi' for one fixed (gamma, p_min). Caches phi' at the bracket ends
// so repeated inversions inside the solver do not re-evaluate them.
class PhiInverter {
 public:
  PhiInverter(double gamma, double p_min, int max_iter)
      : gamma_(gamma),
        lo_(p_min),
        hi_(1.0 - p_min),
        f_lo_(phi_prime(p_min, gamma)),
        f_hi_(phi_prime(1.0 - p_min, gamma)),
        max_iter_(max_iter) {}

  double invert(double target, double x0) const {
    if (target <= f_lo_) return lo_;
    if (target >= f_hi_) return hi_;
    double lo = lo_, hi = hi_;
    double x;
    if (x0 > lo && x0 < hi) {
      x = x0;
    } else if (target <= 0.0) {
      // Barrier regime: 1 - 1/x = target, ignoring the entropy part.
      x = std::min(hi, 1.0 / (1.0 - target));
    } else {
      // Entropy regime: -gamma*log(1-x) = target.
      x = std::min(hi, std::max(0.5, 1.0 - std::exp(-target / gamma_)));
    }
    const double atol = 1e-12 * std::max(1.0, std::abs(target));
    for (int it = 0; it < max_iter_; ++it) {
      const double f = phi_prime(x, gamma_) - target;
      if (std::abs(f) <= atol) return x;
      if (f > 0.0) hi = x;
      else lo = x;
      double xn = x - f / phi_second(x, gamma_);
      if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
      if (xn == x) return x;  // no representable progress left
      x = xn;
    }
    return x;  // best effort; the caller checks the final residual
  }

 private:
  double gamma_, lo_, hi_, f_lo_, f_hi_;
  int max_iter_;
};

}  // namespace

double phi(double x, double gamma) {
  check_gamma(gamma);
  if (!(x > 0.0) || x > 1.0 || !std::isfinite(x)) {
    fail(ErrorCode::DomainError, "phi domain is (0,1]");
  }
  const double ent = (x >= 1.0) ? 0.0 : (1.0 - x) * std::log1p(-x);
  return x - 1.0 - std::log(x) + gamma * (x + ent);
}

double phi_prime(double x, double gamma) {
  check_gamma(gamma);
  if (!(x > 0.0) || !(x < 1.0)) {
    fail(ErrorCode::DomainError, "phi_prime domain is (0,1)");
  }
  return 1.0 - 1.0 / x - gamma * std::log1p(-x);
}

double phi_second(double x, double gamma) {
  check_gamma(gamma);
  if (!(x > 0.0) || !(x < 1.0)) {
    fail(ErrorCode::DomainError, "phi_second domain is (0,1)");
  }
  return 1.0 / (x * x) + gamma / (1.0 - x);
}

double invert_phi_prime(double target, double gamma, double p_min,
                        int max_iter, double x0) {
  check_gamma(gamma);
  if (!(p_min > 0.0) || !(p_min < 0.5)) {
    fail(ErrorCode::InvalidArgument, "p_min must lie in (0, 0.5)");
  }
  return PhiInverter(gamma, p_min, max_iter).invert(target, x0);
}

SolveResult solve_oftrl(const Vec& loss, const Vec& betas, double gamma,
                        const SolveOptions& opts, const double* warm_lambda) {
  const std::size_t K = loss.size();
  if (K < 2) fail(ErrorCode::InvalidArgument, "need at least 2 arms");
  if (betas.size() != K) {
    fail(ErrorCode::InvalidArgument, "loss and betas sizes differ");
  }
  check_gamma(gamma);
  double beta_sum = 0.0;
  for (double b : betas) {
    if (!std::isfinite(b) || !(b > 0.0)) {
      fail(ErrorCode::DomainError, "betas must be positive and finite");
    }
    beta_sum += b;
  }
  for (double v : loss) {
    if (!std::isfinite(v)) fail(ErrorCode::DomainError, "loss entries must be finite");
  }

  // Shift losses so the minimum is 0. The argmin is invariant; lambda moves
  // by the shift and is mapped back before returning.
  const double lmin = *std::min_element(loss.begin(), loss.end());
  const double lmax = *std::max_element(loss.begin(), loss.end());
  const double spread = lmax - lmin;
  Vec L(K);
  for (std::size_t i = 0; i < K; ++i) L[i] = loss[i] - lmin;

  const PhiInverter inv(gamma, opts.p_min, opts.max_inner);
  Vec x(K, -1.0);
  auto defect = [&](double lam) {
    double s = 0.0;
    for (std::size_t i = 0; i < K; ++i) {
      const double theta = -(lam + L[i]) / betas[i];
      x[i] = inv.invert(theta, x[i]);
      s += x[i];
    }
    return s - 1.0;
  };

  double lam0;
  if (warm_lambda != nullptr && std::isfinite(*warm_lambda)) {
    lam0 = *warm_lambda + lmin;
  } else {
    // Uniform point heuristic: lambda ~ -avg(beta) * phi'(1/K).
    lam0 = -(beta_sum / static_cast<double>(K)) *
           phi_prime(1.0 / static_cast<double>(K), gamma);
  }

  int outer = 0;
  double s0 = defect(lam0);
  ++outer;
  double lo, hi;  // defect(lo) > 0 > defect(hi)
  double w = 1.0;
  if (s0 > 0.0) {
    lo = lam0;
    hi = lam0 + w;
    while (defect(hi) > 0.0) {
      lo = hi;
      w *= 2.0;
      hi += w;
      if (++outer > opts.max_outer) {
        fail(ErrorCode::ConvergenceFailure, "could not bracket the multiplier");
      }
    }
    ++outer;
  } else {
    hi = lam0;
    lo = lam0 - w;
    while (defect(lo) <= 0.0) {
      hi = lo;
      w *= 2.0;
      lo -= w;
      if (++outer > opts.max_outer) {
        fail(ErrorCode::ConvergenceFailure, "could not bracket the multiplier");
      }
    }
    ++outer;
  }

  double lam = lam0;
  double s = s0;
  while (outer < opts.max_outer) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;  // interval exhausted in doubles
    lam = mid;
    s = defect(lam);
    ++outer;
    if (s > 0.0) lo = lam;
    else hi = lam;
    if (std::abs(s) <= 1e-13) break;
  }

  Vec p = x;
  double psum = std::accumulate(p.begin(), p.end(), 0.0);
  double rmax = 0.0;
  for (std::size_t i = 0; i < K; ++i) {
    rmax = std::max(rmax, std::abs(L[i] + betas[i] * phi_prime(p[i], gamma) + lam));
  }
  const double residual = rmax + std::abs(psum - 1.0);
  const double scale = std::max(1.0, spread + std::abs(lam));
  if (!(residual <= opts.tol * scale)) {
    std::ostringstream os;
    os << "KKT residual " << residual << " above tolerance " << opts.tol
       << " at scale " << scale << " after " << outer << " iterations";
    fail(ErrorCode::ConvergenceFailure, os.str());
  }
  return SolveResult{std::move(p), lam - lmin, residual, outer};
}

double bregman(const Vec& q, const Vec& p, const Vec& betas, double gamma) {
  if (q.size() != p.size() || q.size() != betas.size()) {
    fail(ErrorCode::InvalidArgument, "bregman argument sizes differ");
  }
  double d = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!(q[i] > 0.0) || !(q[i] < 1.0) || !(p[i] > 0.0) || !(p[i] < 1.0)) {
      fail(ErrorCode::DomainError, "bregman arguments must lie in (0,1)^K");
    }
    d += betas[i] * (phi(q[i], gamma) - phi(p[i], gamma) -
                     phi_prime(p[i], gamma) * (q[i] - p[i]));
  }
  return d;
}

double max_gain_logbarrier(double a, double x) {
  if (!(x > 0.0) || x > 1.0) fail(ErrorCode::DomainError, "x must lie in (0,1]");
  if (!std::isfinite(a)) fail(ErrorCode::DomainError, "a must be finite");
  const double u = a * x;
  if (u < -1.0) {
    fail(ErrorCode::DomainError, "a must be at least -1/x");
  }
  // At u == -1 the supremum is infinite; log1p(-1) = -inf gives +inf here.
  return u - std::log1p(u);
}

double max_gain_compentropy(double a, double x) {
  if (!(x > 0.0) || x > 1.0) fail(ErrorCode::DomainError, "x must lie in (0,1]");
  if (!std::isfinite(a)) fail(ErrorCode::DomainError, "a must be finite");
  return (1.0 - x) * (std::expm1(a) - a);
}

double max_linear_log_quadratic(double a, double b, double c) {
  if (!(a > 0.0) || !(b > 0.0) || !(c > 0.0)) {
    fail(ErrorCode::DomainError, "requires a, b, c > 0");
  }
  const double disc = std::sqrt(a * a + 8.0 * b * c);
  const double ystar = (a + disc) / (4.0 * c);
  return 0.5 * (a * ystar - b) + b * std::log(ystar);
}

}  // namespace bobw::ftrl
