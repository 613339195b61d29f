#include "codedrebal/analysis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>
#include <unordered_map>
#include <utility>

#include "codedrebal/error.hpp"

namespace codedrebal {

namespace {

void require_removal_range(unsigned num_nodes, unsigned replication) {
  if (replication < 2 || replication + 1 > num_nodes) {
    throw Error(ErrorCode::kReplicationOutOfRange,
                "removal needs 2 <= r <= K-1, got r=" +
                    std::to_string(replication) +
                    " K=" + std::to_string(num_nodes));
  }
}

void require_addition_range(unsigned num_nodes, unsigned replication) {
  if (replication < 1 || replication > num_nodes) {
    throw Error(ErrorCode::kReplicationOutOfRange,
                "addition needs 1 <= r <= K, got r=" +
                    std::to_string(replication) +
                    " K=" + std::to_string(num_nodes));
  }
}

// Bits needed to name one of `choices` boxes.
std::uint64_t index_bits(std::uint64_t choices) {
  return choices <= 1 ? 0 : static_cast<std::uint64_t>(std::bit_width(choices - 1));
}

}  // namespace

double removal_asymptote(unsigned replication) {
  require_removal_range(replication + 1, replication);
  return 1.0 / static_cast<double>(replication - 1);
}

double removal_finite_bound(unsigned num_nodes, unsigned replication,
                            std::uint64_t num_bits) {
  require_removal_range(num_nodes, replication);
  if (num_bits == 0) {
    throw Error(ErrorCode::kMismatchedParameters, "F must be at least 1");
  }
  const double q = packet_size_law(num_nodes, replication, num_bits,
                                   EventKind::kRemoval)
                       .probability;
  // Largest of r-1 packet sizes, each B(F, q).
  const double per_codeword =
      replication == 2 ? static_cast<double>(num_bits) * q
                       : binomial_max_bound(num_bits, q, replication - 1);
  const double codewords = static_cast<double>(replication) *
                           static_cast<double>(binomial(
                               num_nodes - 1, num_nodes - replication - 1));
  const double lambda_f = static_cast<double>(replication) *
                          static_cast<double>(num_bits) /
                          static_cast<double>(num_nodes);
  return codewords * per_codeword / lambda_f;
}

LoadReport removal_load(std::span<const RemovalCodeword> codewords,
                        unsigned num_nodes, unsigned replication,
                        std::uint64_t num_bits) {
  require_removal_range(num_nodes, replication);
  if (num_bits == 0 || codewords.empty()) {
    throw Error(ErrorCode::kMismatchedParameters,
                "a removal load needs F >= 1 and at least one codeword");
  }
  const std::uint64_t expected =
      replication * binomial(num_nodes - 1, num_nodes - replication - 1);
  if (codewords.size() != expected) {
    throw Error(ErrorCode::kMismatchedParameters,
                "expected " + std::to_string(expected) + " codewords, got " +
                    std::to_string(codewords.size()));
  }

  LoadReport rep;
  rep.kind = EventKind::kRemoval;
  rep.num_nodes = num_nodes;
  rep.replication = replication;
  rep.num_bits = num_bits;
  rep.num_codewords = codewords.size();
  for (const auto& cw : codewords) {
    if (cw.constituents.size() != replication - 1) {
      throw Error(ErrorCode::kMismatchedParameters,
                  "codeword from node " + std::to_string(cw.sender) + " has " +
                      std::to_string(cw.constituents.size()) +
                      " packets, expected r-1");
    }
    rep.total_transmitted_bits += cw.length();
    for (const auto& c : cw.constituents) rep.moved_bits += c.length;
  }
  rep.normalizer = static_cast<double>(replication) *
                   static_cast<double>(num_bits) /
                   static_cast<double>(num_nodes);
  rep.measured_load =
      static_cast<double>(rep.total_transmitted_bits) / rep.normalizer;
  rep.realized_load =
      rep.moved_bits == 0 ? 0.0
                          : static_cast<double>(rep.total_transmitted_bits) /
                                static_cast<double>(rep.moved_bits);
  rep.theoretical_asymptote = removal_asymptote(replication);
  rep.finite_bound = removal_finite_bound(num_nodes, replication, num_bits);
  rep.metadata_bits =
      rep.moved_bits *
      index_bits(static_cast<std::uint64_t>(num_nodes - replication) *
                 (replication - 1));
  return rep;
}

LoadReport addition_load(std::span<const AdditionCodeword> codewords,
                         unsigned num_nodes, unsigned replication,
                         std::uint64_t num_bits) {
  require_addition_range(num_nodes, replication);
  if (num_bits == 0 || codewords.empty()) {
    throw Error(ErrorCode::kMismatchedParameters,
                "an addition load needs F >= 1 and at least one codeword");
  }
  const std::uint64_t expected =
      num_nodes * binomial(num_nodes - 1, num_nodes - replication);
  if (codewords.size() != expected) {
    throw Error(ErrorCode::kMismatchedParameters,
                "expected " + std::to_string(expected) + " codewords, got " +
                    std::to_string(codewords.size()));
  }

  LoadReport rep;
  rep.kind = EventKind::kAddition;
  rep.num_nodes = num_nodes;
  rep.replication = replication;
  rep.num_bits = num_bits;
  rep.num_codewords = codewords.size();
  for (const auto& cw : codewords) {
    rep.total_transmitted_bits += cw.length();
    for (const auto& c : cw.constituents) rep.moved_bits += c.length;
  }
  rep.normalizer = static_cast<double>(replication) *
                   static_cast<double>(num_bits) /
                   static_cast<double>(num_nodes + 1);
  rep.measured_load =
      static_cast<double>(rep.total_transmitted_bits) / rep.normalizer;
  rep.realized_load =
      rep.moved_bits == 0 ? 0.0
                          : static_cast<double>(rep.total_transmitted_bits) /
                                static_cast<double>(rep.moved_bits);
  rep.theoretical_asymptote = 1.0;
  rep.metadata_bits = num_bits * index_bits(num_nodes + 1);
  return rep;
}

double binomial_max_bound(std::uint64_t n, double p, unsigned r_vars) {
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorCode::kInvalidProbability,
                "p must lie in (0, 1), got " + std::to_string(p));
  }
  if (n < 1 || r_vars < 1) {
    throw Error(ErrorCode::kInvalidParameters,
                "need n >= 1 and at least one variable");
  }
  const double mean = static_cast<double>(n) * p;
  if (r_vars == 1) return mean;
  return mean + std::sqrt(2.0 * mean * (1.0 - p) *
                          std::log(static_cast<double>(r_vars)));
}

PacketSizeLaw packet_size_law(unsigned num_nodes, unsigned replication,
                              std::uint64_t num_bits, EventKind event) {
  double boxes = 0.0;
  if (event == EventKind::kRemoval) {
    require_removal_range(num_nodes, replication);
    boxes = static_cast<double>(binomial(num_nodes, replication)) *
            (num_nodes - replication) * (replication - 1);
  } else {
    require_addition_range(num_nodes, replication);
    boxes = static_cast<double>(binomial(num_nodes, num_nodes - replication)) *
            (num_nodes + 1);
  }
  PacketSizeLaw law;
  law.probability = 1.0 / boxes;
  law.mean = static_cast<double>(num_bits) * law.probability;
  law.variance = law.mean * (1.0 - law.probability);
  return law;
}

DistributionCheck uniformity_from_counts(std::vector<NodeSet> support,
                                         std::vector<std::uint64_t> counts) {
  if (support.empty() || support.size() != counts.size()) {
    throw Error(ErrorCode::kInvalidParameters,
                "support and counts must be non-empty and the same size");
  }
  DistributionCheck check;
  check.support = std::move(support);
  check.observed_counts = std::move(counts);
  const double p = 1.0 / static_cast<double>(check.support.size());
  check.expected_probability.assign(check.support.size(), p);
  check.degrees_of_freedom = check.support.size() - 1;
  for (auto c : check.observed_counts) check.total += c;
  if (check.total == 0) return check;

  const auto total = static_cast<double>(check.total);
  for (auto c : check.observed_counts) {
    const double observed = static_cast<double>(c);
    const double expected = total * p;
    check.max_relative_error =
        std::max(check.max_relative_error,
                 std::abs(observed - expected) / expected);
    check.chi_square += (observed - expected) * (observed - expected) / expected;
  }
  return check;
}

DistributionCheck uniformity_check(std::span<const NodeSet> placements,
                                   std::span<const NodeSet> support) {
  std::unordered_map<NodeSet, std::size_t> index;
  for (std::size_t i = 0; i < support.size(); ++i) index.emplace(support[i], i);
  std::vector<std::uint64_t> counts(support.size(), 0);
  for (std::size_t i = 0; i < placements.size(); ++i) {
    auto it = index.find(placements[i]);
    if (it == index.end()) {
      throw Error(ErrorCode::kOutOfSupport,
                  "bit " + std::to_string(i) + " is stored at " +
                      placements[i].to_string() +
                      ", outside the expected support");
    }
    ++counts[it->second];
  }
  return uniformity_from_counts({support.begin(), support.end()},
                                std::move(counts));
}

DistributionCheck pool(std::span<const DistributionCheck> checks) {
  if (checks.empty()) {
    throw Error(ErrorCode::kInvalidParameters, "nothing to pool");
  }
  std::vector<std::uint64_t> counts(checks.front().support.size(), 0);
  for (const auto& c : checks) {
    if (c.support != checks.front().support) {
      throw Error(ErrorCode::kMismatchedParameters,
                  "pooled checks must share one support");
    }
    for (std::size_t i = 0; i < counts.size(); ++i) {
      counts[i] += c.observed_counts[i];
    }
  }
  return uniformity_from_counts(checks.front().support, std::move(counts));
}

}  // namespace codedrebal
