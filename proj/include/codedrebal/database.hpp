#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "codedrebal/node_set.hpp"
#include "codedrebal/rng.hpp"

namespace codedrebal {

/// Index of a bit within the file, in [0, F).
using BitIndex = std::uint32_t;

/// F binary symbols, one byte (0 or 1) per bit.
struct FileInstance {
  std::vector<std::uint8_t> values;

  std::size_t num_bits() const { return values.size(); }
};

/// Per-bit storing sets. `nodes` is the set of live node ids; after a
/// removal the survivors keep their original ids.
struct PlacementMap {
  NodeSet nodes;
  unsigned replication = 0;
  std::vector<NodeSet> node_sets;

  std::size_t num_nodes() const { return nodes.size(); }
  /// Storage fraction r / K.
  double storage_fraction() const {
    return static_cast<double>(replication) / static_cast<double>(num_nodes());
  }
};

/// The per-bit node sets are authoritative; per-node views are derived on
/// demand so they cannot drift out of sync.
struct Database {
  PlacementMap placement;
  FileInstance file;

  std::size_t num_bits() const { return file.num_bits(); }
  std::size_t num_nodes() const { return placement.num_nodes(); }
  unsigned replication() const { return placement.replication; }
  NodeSet nodes() const { return placement.nodes; }
  NodeSet storing_nodes(BitIndex i) const { return placement.node_sets[i]; }
};

/// Random placement on nodes {1..K}: every bit independently picks one of the
/// C(K, r) r-subsets uniformly, and a uniform random value.
Database build_database(unsigned num_nodes, unsigned replication,
                        std::size_t num_bits, const RngSpec& rng);

/// Bits stored exactly at nodes() \ m, i.e. absent from every node of m.
/// Empty when m is not a subset of the live nodes.
std::vector<BitIndex> exclusive_group(const Database& db, NodeSet m);

/// D_n. Throws kUnknownNode when n is not live.
std::vector<BitIndex> node_contents(const Database& db, NodeId n);

struct NodeCount {
  NodeId node = 0;
  std::uint64_t bits = 0;

  bool operator==(const NodeCount&) const = default;
};

/// |D_n| for every live node, in ascending id order.
std::vector<NodeCount> storage_counts(const Database& db);

struct BalanceReport {
  // Exact replication check: every N_i has exactly r live members.
  bool replication_ok = true;
  std::size_t replication_violations = 0;
  std::vector<BitIndex> offending_bits;  // first few only

  // Statistical balance check against lambda * F.
  bool balance_ok = true;
  double expected_per_node = 0.0;
  double tolerance = 0.0;
  double max_relative_deviation = 0.0;
  std::vector<NodeCount> node_counts;

  bool passed() const { return replication_ok && balance_ok; }
};

inline constexpr std::size_t kMaxReportedOffenders = 16;

/// Never throws on a bad database; failures are reported.
BalanceReport verify_r_balanced(const Database& db, double tolerance);

}  // namespace codedrebal
