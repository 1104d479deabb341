#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>

namespace fourtop {

// Reduced stiffness system could not be factorized (under-constrained mesh,
// bad modulus field, ...).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite intermediate or a failed numeric iteration.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Deterministic uniform generator. std::uniform_real_distribution is
// implementation-defined, so the 53-bit mapping is done by hand; seeded runs
// stay reproducible across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool coin_flip() { return (gen_() & 1ull) != 0; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace fourtop
