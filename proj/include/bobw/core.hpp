#pragma once
// Shared basics: error codes, simplex validation, inverse-CDF arm sampling,
// and the seeded RNG streams used by experiments.

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace bobw {

using Vec = std::vector<double>;

enum class ErrorCode {
  InvalidArgument,
  DomainError,
  NotSimplex,
  ConfigError,
  StateError,
  ConvergenceFailure,
  SpecError,
  MissingGroundTruth,
  IoError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

// Tolerance on |sum(p) - 1| accepted by validate_simplex.
inline constexpr double kSimplexSumTol = 1e-9;

// Throws NotSimplex unless every entry is strictly inside (0,1) and the sum
// is 1 within tol. Point masses do not pass; they are handled as raw weight
// vectors by sample_arm.
void validate_simplex(const Vec& p, double tol = kSimplexSumTol);

// Throws DomainError unless v is finite and in [0,1].
void validate_loss_value(double v);
void validate_loss_vector(const Vec& losses);

// Inverse-CDF sampling: walks the cumulative sum of `weights` (nonnegative,
// summing to ~1; point masses allowed) and returns the first index whose
// cumulative weight exceeds u. u must lie in [0,1).
int sample_arm(const Vec& weights, double u);

// SplitMix64 finalizer (stateless bit mixer).
std::uint64_t mix64(std::uint64_t z);

// Counter-based seed derivation. The seed of (master, trial, stream) never
// depends on how many trials run or on the thread schedule, so adding trials
// or changing --workers leaves existing streams untouched.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial,
                          std::uint64_t stream);

// Seeded random stream with the handful of samplers the simulators need.
// Wraps mt19937_64; all float draws go through uniform01 so replays are
// stable for a fixed build.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform on [0,1), 53 bits.
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double normal();               // standard normal, Marsaglia polar method
  double gamma(double shape);    // Marsaglia-Tsang, any shape > 0
  double beta(double a, double b);

  std::uint64_t next_u64() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace bobw
