#pragma once

#include <cstdint>
#include <random>

namespace codedrebal {

/// Which phase of a trial a random stream feeds. Each phase gets its own
/// stream so that, e.g., changing the binning never perturbs the placement.
enum class StreamLabel : std::uint8_t {
  kPlacement = 1,
  kRemovalBinning = 2,
  kAdditionBinning = 3,
  kTrial = 4,
};

struct RngSpec {
  std::uint64_t master_seed = 0;
  StreamLabel stream = StreamLabel::kPlacement;
  std::uint64_t trial = 0;

  RngSpec with_stream(StreamLabel s) const { return {master_seed, s, trial}; }
};

std::uint64_t splitmix64(std::uint64_t x);

/// Seed of trial `index` under `master_seed`. Distinct indices give
/// statistically independent streams.
std::uint64_t derive_trial_seed(std::uint64_t master_seed, std::uint64_t index);

/// Engine whose output depends only on the RngSpec. Bounded draws use
/// Lemire's rejection method, so results do not depend on the standard
/// library's distribution implementations.
class Rng {
 public:
  explicit Rng(const RngSpec& spec);

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, n). Requires n >= 1.
  std::uint64_t uniform_below(std::uint64_t n);

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace codedrebal
