#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace panelcp {

// Counter-based random number generator (Philox4x32-10).
//
// Every draw is a pure function of (seed, stream, counter), so substreams can
// be handed to worker threads in any order without changing the numbers they
// produce. Streams are derived by hashing a parent stream id with an integer
// tag; the harness documents its tag layout in experiment.cpp.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  // Independent generator for the given tag. Splitting is cheap and does not
  // advance this generator.
  Rng split(std::uint64_t tag) const;

  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53 random bits.
  double uniform();

  // Uniform on [lo, hi).
  double uniform(double lo, double hi);

  // Standard normal via Box-Muller (explicit, to stay deterministic across
  // standard libraries).
  double normal();

  double normal(double mean, double sd);

  // Integer in [0, n), n >= 1.
  std::uint64_t uniform_index(std::uint64_t n);

  std::vector<double> normal_vector(std::size_t n);

  // Fisher-Yates shuffle of 0..n-1.
  std::vector<int> permutation(int n);

  static std::uint64_t mix(std::uint64_t a, std::uint64_t b);

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int block_pos_ = 4;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace panelcp
