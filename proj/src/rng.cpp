#include "kspec/rng.hpp"

namespace kspec {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t stream_key(std::uint64_t master_seed, std::uint64_t trial, Role role) {
  std::uint64_t h = mix64(master_seed + kGolden);
  h = mix64(h ^ (trial + 0x632BE59BD9B4E019ULL));
  h = mix64(h ^ (static_cast<std::uint64_t>(role) * 0xD6E8FEB86659FD93ULL));
  return h;
}

Stream::result_type Stream::operator()() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double Stream::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

double Stream::sign() { return ((*this)() >> 63) ? 1.0 : -1.0; }

}  // namespace kspec
