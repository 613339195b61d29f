#include "codedrebal/rng.hpp"

namespace codedrebal {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_trial_seed(std::uint64_t master_seed,
                                std::uint64_t index) {
  return splitmix64(master_seed ^ splitmix64(index ^ 0x5452494cULL));
}

namespace {

std::uint64_t engine_seed(const RngSpec& spec) {
  std::uint64_t h = splitmix64(spec.master_seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(spec.stream));
  return splitmix64(h ^ spec.trial);
}

}  // namespace

Rng::Rng(const RngSpec& spec) : engine_(engine_seed(spec)) {}

std::uint64_t Rng::uniform_below(std::uint64_t n) {
  // Lemire, "Fast random integer generation in an interval" (2019).
  unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(engine_()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace codedrebal
