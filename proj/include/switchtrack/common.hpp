#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace switchtrack {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Thrown when a problem document or argument violates a structural requirement.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when a computation loses numerical meaning (rank deficiency,
// non-finite intermediates, training blow-up).
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// A rollout left the guarded region around the sampling box.
class DivergenceError : public NumericalError {
public:
  DivergenceError(const std::string& msg, long khat_, Vec state_)
      : NumericalError(msg), khat(khat_), state(std::move(state_)) {}
  long khat;
  Vec state;
};

enum class Exec { Serial, Parallel };

// How batch kernels run. threads == 0 means "whatever OpenMP gives us".
struct ExecPolicy {
  Exec mode = Exec::Parallel;
  int threads = 0;
};

// splitmix64; used to derive independent, reproducible substreams from one
// user-facing seed (per training step, per inner iteration, per sample slot).
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::mt19937_64 seeded_engine(std::uint64_t seed,
                                     std::initializer_list<std::uint64_t> stream = {}) {
  std::uint64_t s = seed ^ 0x6a09e667f3bcc909ULL;
  std::uint64_t mixed = splitmix64(s);
  for (std::uint64_t part : stream) {
    s ^= part + 0x9e3779b97f4a7c15ULL + (s << 6) + (s >> 2);
    mixed = splitmix64(s);
  }
  return std::mt19937_64(mixed);
}

// Uniform doubles built directly from the engine's bits so results do not
// depend on the standard library's distribution implementation.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Round-trip-exact decimal rendering (17 significant digits).
std::string format_full(double x);

}  // namespace switchtrack
