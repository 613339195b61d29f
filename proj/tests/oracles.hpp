#pragma once

// Test-only reference computations. Nothing here calls into the protocol
// code paths it is used to check.

#include <bit>
#include <cstdint>
#include <vector>

#include "codedrebal/database.hpp"
#include "codedrebal/node_set.hpp"
#include "codedrebal/removal.hpp"

namespace codedrebal::testing {

/// Every subset of `universe` with `size` members, by scanning all masks.
inline std::vector<NodeSet> brute_force_subsets(NodeSet universe,
                                                std::size_t size) {
  std::vector<NodeSet> out;
  const NodeId top = universe.max();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (top + 1));
       mask += 2) {
    if ((mask & ~universe.mask()) != 0) continue;
    if (static_cast<std::size_t>(std::popcount(mask)) != size) continue;
    out.push_back(NodeSet::from_mask(mask));
  }
  return out;
}

/// Number of transmissions the removal loop makes: one per (m', sender)
/// with m' a (K-r-1)-subset of the survivors and the sender outside m'.
inline std::size_t count_removal_transmissions(unsigned num_nodes,
                                               unsigned replication,
                                               NodeId removed) {
  const NodeSet survivors = NodeSet::range(1, num_nodes).without(removed);
  std::size_t count = 0;
  for (NodeSet rest : brute_force_subsets(survivors, num_nodes - replication - 1)) {
    for (NodeId sender : survivors) {
      if (!rest.contains(sender)) ++count;
    }
  }
  return count;
}

/// Number of addition transmissions: one per (mover, class not containing it).
inline std::size_t count_addition_transmissions(unsigned num_nodes,
                                                unsigned replication) {
  const NodeSet nodes = NodeSet::range(1, num_nodes);
  std::size_t count = 0;
  for (NodeId mover : nodes) {
    for (NodeSet m : brute_force_subsets(nodes, num_nodes - replication)) {
      if (!m.contains(mover)) ++count;
    }
  }
  return count;
}

/// Straight-line placement after a removal: each bit of the removed node is
/// put directly at its box's target; nothing is encoded or decoded.
inline std::vector<NodeSet> removal_placement_oracle(
    const Database& before, const BinDirectoryRemoval& dir) {
  std::vector<NodeSet> out = before.placement.node_sets;
  const NodeId k = dir.removed_node();
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (auto label = dir.label_of(static_cast<BitIndex>(i))) {
      out[i].erase(k);
      out[i].insert(label->target);
    }
  }
  return out;
}

}  // namespace codedrebal::testing
