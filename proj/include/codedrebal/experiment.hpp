#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "codedrebal/analysis.hpp"
#include "codedrebal/database.hpp"

namespace codedrebal {

enum class OutputFormat { kJson, kCsv };

inline constexpr std::uint64_t kDefaultBits = 1'000'000;
inline constexpr std::size_t kDefaultRemovalTrials = 30;
inline constexpr std::size_t kDefaultAdditionTrials = 100;
inline constexpr double kDefaultUniformityTolerance = 0.02;
inline constexpr double kDefaultBalanceTolerance = 0.01;

struct ExperimentConfig {
  unsigned num_nodes = 6;
  unsigned replication = 3;
  std::uint64_t num_bits = kDefaultBits;
  EventKind event = EventKind::kRemoval;
  NodeId removed_node = 0;  // removal only
  std::size_t trials = kDefaultRemovalTrials;
  std::uint64_t master_seed = 0;
  OutputFormat format = OutputFormat::kJson;
  std::optional<double> uniformity_tolerance;
  std::optional<double> balance_tolerance;
  unsigned threads = 1;
};

/// Field-level problems; empty when the config is usable.
std::vector<std::string> validate_config(const ExperimentConfig& config);

struct TrialResult {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  LoadReport load;
  DistributionCheck distribution;
  std::vector<NodeCount> storage_before;
  std::vector<NodeCount> storage_after;
  double wall_ms = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<TrialResult> trials;  // ordered by trial index
  double mean_load = 0.0;
  double std_load = 0.0;  // sample standard deviation; 0 for one trial
  double theoretical_asymptote = 0.0;
  double bound = 0.0;  // finite-F bound (removal) or the exact load 1 (addition)
  DistributionCheck pooled_uniformity;
  bool uniformity_within_tolerance = true;
};

/// Each trial builds a fresh database from derive_trial_seed(master, index),
/// applies the event, and analyses the result. Throws kConfigInvalid before
/// doing any work, and kProtocolViolation if a trial breaks an invariant.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// One trial on its own; `index` selects the seed.
TrialResult run_trial(const ExperimentConfig& config, std::size_t index);

struct EmitOptions {
  bool include_timing = false;
};

std::string emit_results(const ExperimentResult& result, OutputFormat format,
                         EmitOptions options = {});

/// Writes `text` to `path`; throws kIoFailure naming the path.
void write_text_file(const std::string& path, const std::string& text);

/// Human-readable transmission schedule of a single run on a small file.
std::string removal_walkthrough(unsigned num_nodes, unsigned replication,
                                std::uint64_t num_bits, NodeId removed,
                                std::uint64_t seed);
std::string addition_walkthrough(unsigned num_nodes, unsigned replication,
                                 std::uint64_t num_bits, std::uint64_t seed);

}  // namespace codedrebal
