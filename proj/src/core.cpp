#include "bobw/core.hpp"

#include <cmath>
#include <sstream>

namespace bobw {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::NotSimplex: return "NotSimplex";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::StateError: return "StateError";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::SpecError: return "SpecError";
    case ErrorCode::MissingGroundTruth: return "MissingGroundTruth";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, std::string(error_code_name(code)) + ": " + message);
}

void validate_simplex(const Vec& p, double tol) {
  if (p.size() < 2) {
    fail(ErrorCode::NotSimplex,
         "distribution needs at least 2 arms, got " + std::to_string(p.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double x = p[i];
    if (!std::isfinite(x) || x <= 0.0 || x >= 1.0) {
      std::ostringstream os;
      os << "entry " << i << " = " << x << " is outside (0,1)";
      fail(ErrorCode::NotSimplex, os.str());
    }
    sum += x;
  }
  if (std::abs(sum - 1.0) > tol) {
    std::ostringstream os;
    os << "sum deviates from 1 by " << std::abs(sum - 1.0) << " (tol " << tol << ")";
    fail(ErrorCode::NotSimplex, os.str());
  }
}

void validate_loss_value(double v) {
  if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
    std::ostringstream os;
    os << "loss " << v << " is outside [0,1]";
    fail(ErrorCode::DomainError, os.str());
  }
}

void validate_loss_vector(const Vec& losses) {
  for (double v : losses) validate_loss_value(v);
}

int sample_arm(const Vec& weights, double u) {
  if (weights.empty()) fail(ErrorCode::InvalidArgument, "empty weight vector");
  if (!(u >= 0.0 && u < 1.0)) {
    fail(ErrorCode::DomainError, "uniform draw " + std::to_string(u) + " outside [0,1)");
  }
  double cum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] >= 0.0)) {
      fail(ErrorCode::InvalidArgument, "negative weight at index " + std::to_string(i));
    }
    cum += weights[i];
    if (u < cum) return static_cast<int>(i);
  }
  // Rounding can leave cum slightly below 1; land on the last arm.
  return static_cast<int>(weights.size()) - 1;
}

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial,
                          std::uint64_t stream) {
  std::uint64_t z = mix64(master ^ 0xa0761d6478bd642fULL);
  z = mix64(z + 0x9e3779b97f4a7c15ULL * (trial + 1));
  z = mix64(z + 0x9e3779b97f4a7c15ULL * (stream + 1));
  return z;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform01() - 1.0;
    v = 2.0 * uniform01() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

double Rng::gamma(double shape) {
  if (!(shape > 0.0)) fail(ErrorCode::DomainError, "gamma shape must be > 0");
  if (shape < 1.0) {
    // Boost: Gamma(a) = Gamma(a+1) * U^(1/a).
    double u = uniform01();
    while (u <= 0.0) u = uniform01();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform01();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
      return d * v;
    }
  }
}

double Rng::beta(double a, double b) {
  const double x = gamma(a);
  const double y = gamma(b);
  const double s = x + y;
  if (s <= 0.0) return 0.5;
  return x / s;
}

}  // namespace bobw
