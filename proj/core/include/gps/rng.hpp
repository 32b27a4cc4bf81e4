#pragma once

#include <cstdint>
#include <vector>

namespace gps {

// Counter-based splitmix64 generator. One root seed expands into
// independent streams with fork(); the whole state is a single word, so
// checkpoints stay portable and bit-exact across runs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next_u64();

  // Uniform double in [0, 1), built from the top 53 bits.
  double uniform();
  double uniform(double lo, double hi);

  // Uniform integer in [0, n). n must be positive.
  int uniform_int(int n);

  // Independent stream derived from this state and a stream tag.
  // Does not advance this generator.
  Rng fork(std::uint64_t stream) const;

  // In-place Fisher-Yates shuffle.
  void shuffle(std::vector<int>& values);

  std::uint64_t state() const { return state_; }
  void set_state(std::uint64_t s) { state_ = s; }

 private:
  std::uint64_t state_;
};

}  // namespace gps
