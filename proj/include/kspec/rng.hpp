#pragma once

#include <cstdint>
#include <limits>

namespace kspec {

// Matrix roles used to key independent streams for one trial.
enum class Role : std::uint64_t {
  Data = 1,
  Gaussian = 2,
  Wigner = 3,
  MonteCarlo = 4,
  Test = 5,
};

std::uint64_t mix64(std::uint64_t x);

// Key for the stream of (master seed, trial, role).
std::uint64_t stream_key(std::uint64_t master_seed, std::uint64_t trial, Role role);

// Counter-based splitmix64 stream. Draw i is mix64(key + (i+1)*golden), so a
// stream is fully determined by its key and position.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(std::uint64_t key) : key_(key) {}
  Stream(std::uint64_t master_seed, std::uint64_t trial, Role role)
      : key_(stream_key(master_seed, trial, role)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  // uniform in [0, 1)
  double uniform();
  // +1 or -1 with equal probability
  double sign();

  std::uint64_t position() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace kspec
