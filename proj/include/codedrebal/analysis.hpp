#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "codedrebal/addition.hpp"
#include "codedrebal/node_set.hpp"
#include "codedrebal/removal.hpp"

namespace codedrebal {

enum class EventKind { kRemoval, kAddition };

/// Transmitted bits of one rebalancing run and the matching theory.
struct LoadReport {
  EventKind kind = EventKind::kRemoval;
  unsigned num_nodes = 0;  // K before the event
  unsigned replication = 0;
  std::uint64_t num_bits = 0;  // F

  std::uint64_t total_transmitted_bits = 0;
  std::size_t num_codewords = 0;

  // Expected storage of the departing (lambda F) or joining (lambda_add F)
  // node. measured_load = total_transmitted_bits / normalizer.
  double normalizer = 0.0;
  double measured_load = 0.0;

  // Same load against the realized number of bits that had to move
  // (|D_k| for removal, bits received by the new node for addition).
  std::uint64_t moved_bits = 0;
  double realized_load = 0.0;

  double theoretical_asymptote = 0.0;
  std::optional<double> finite_bound;  // removal only

  // Binning directory size; reported, never added to the load.
  std::uint64_t metadata_bits = 0;
};

/// 1 / (r-1).
double removal_asymptote(unsigned replication);

/// Expected-load upper bound for finite F:
/// r C(K-1, K-r-1) (Fq + sqrt(2Fq(1-q) ln(r-1))) / (lambda F).
double removal_finite_bound(unsigned num_nodes, unsigned replication,
                            std::uint64_t num_bits);

LoadReport removal_load(std::span<const RemovalCodeword> codewords,
                        unsigned num_nodes, unsigned replication,
                        std::uint64_t num_bits);

LoadReport addition_load(std::span<const AdditionCodeword> codewords,
                         unsigned num_nodes, unsigned replication,
                         std::uint64_t num_bits);

/// Upper bound on E[max] of r_vars identically distributed B(n, p):
/// np + sqrt(2 np(1-p) ln r_vars), exactly np for a single variable.
double binomial_max_bound(std::uint64_t n, double p, unsigned r_vars);

struct PacketSizeLaw {
  double probability = 0.0;  // q (removal) or q' (addition)
  double mean = 0.0;         // F q
  double variance = 0.0;     // F q (1 - q)
};

PacketSizeLaw packet_size_law(unsigned num_nodes, unsigned replication,
                              std::uint64_t num_bits, EventKind event);

/// Observed node-set frequencies against a uniform law on `support`.
struct DistributionCheck {
  std::vector<NodeSet> support;
  std::vector<double> expected_probability;
  std::vector<std::uint64_t> observed_counts;
  std::uint64_t total = 0;
  double max_relative_error = 0.0;
  double chi_square = 0.0;
  std::size_t degrees_of_freedom = 0;
};

/// Throws kOutOfSupport if any placement lies outside `support`.
DistributionCheck uniformity_check(std::span<const NodeSet> placements,
                                   std::span<const NodeSet> support);

/// Recomputes the statistics from already tabulated counts.
DistributionCheck uniformity_from_counts(std::vector<NodeSet> support,
                                         std::vector<std::uint64_t> counts);

/// Sums counts of checks that share one support.
DistributionCheck pool(std::span<const DistributionCheck> checks);

}  // namespace codedrebal
