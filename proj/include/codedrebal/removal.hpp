#pragma once

// Coded rebalancing after a single node leaves.
//
// Every bit the departing node k held belongs to some class m (the K-r live
// nodes that never stored it). Each such bit is binned uniformly into one of
// the (K-r)(r-1) boxes (p, m \ {p}, a) with p in m and a one of the r-1
// surviving holders. For each m' of size K-r-1 the r nodes outside m' u {k}
// each broadcast one XOR of r-1 packets; every target decodes its own packet
// from the XOR because it already stores all the others.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "codedrebal/codeword.hpp"
#include "codedrebal/database.hpp"
#include "codedrebal/node_set.hpp"
#include "codedrebal/rng.hpp"

namespace codedrebal {

/// Box W^holder_[target, remainder]. Bits in it are missing at `target` and
/// every member of `remainder`, and `holder` broadcasts them.
struct RemovalBoxLabel {
  NodeId target = 0;
  NodeSet remainder;
  NodeId holder = 0;

  /// The originating class m = remainder u {target}.
  NodeSet class_set() const { return remainder.with(target); }

  /// "W^5_[1,23]"
  std::string to_string() const;

  auto operator<=>(const RemovalBoxLabel&) const = default;
};

struct RemovalBoxLabelHash {
  std::size_t operator()(const RemovalBoxLabel& l) const noexcept;
};

using RemovalCodeword = Codeword<RemovalBoxLabel>;
using RemovalRecovery = RecoveredPacket<RemovalBoxLabel>;

/// Shared, global binning of D_k. Its transfer to the other nodes is
/// metadata and is never charged to the communication load.
class BinDirectoryRemoval {
 public:
  static constexpr std::uint32_t kUnassigned = 0xffffffffu;

  NodeId removed_node() const { return removed_; }
  NodeSet survivors() const { return survivors_; }
  unsigned replication() const { return replication_; }
  std::size_t num_bits() const { return slot_of_bit_.size(); }
  std::size_t num_assigned() const { return num_assigned_; }

  /// Box label of bit i, or nullopt when i was not stored at the removed node.
  std::optional<RemovalBoxLabel> label_of(BitIndex i) const;

  /// Every valid box, in canonical order: m' lexicographic, then holder,
  /// then target. The r-1 boxes of one codeword are contiguous.
  std::span<const RemovalBoxLabel> labels() const { return labels_; }
  std::optional<std::size_t> slot_of(const RemovalBoxLabel& label) const;
  /// Bits assigned to the box at `slot`, ascending.
  std::span<const BitIndex> packet(std::size_t slot) const {
    return packets_[slot];
  }

  /// Throws kInvalidLabel unless `label` is one of this directory's boxes.
  void validate(const RemovalBoxLabel& label) const;

 private:
  friend BinDirectoryRemoval bin_removal(const Database&, NodeId,
                                         const RngSpec&);

  NodeId removed_ = 0;
  NodeSet survivors_;
  unsigned replication_ = 0;
  std::size_t num_assigned_ = 0;
  std::vector<std::uint32_t> slot_of_bit_;
  std::vector<RemovalBoxLabel> labels_;
  std::vector<std::vector<BitIndex>> packets_;
  std::unordered_map<RemovalBoxLabel, std::uint32_t, RemovalBoxLabelHash>
      slot_index_;
};

/// The (K-r)(r-1) boxes of class m after node k leaves, ordered by target
/// then holder.
std::vector<RemovalBoxLabel> removal_boxes_for_class(NodeSet survivors,
                                                     NodeSet m);

/// Requires 2 <= r <= K-1 and k live.
BinDirectoryRemoval bin_removal(const Database& db, NodeId k,
                                const RngSpec& rng);

PacketContents packet_contents(const BinDirectoryRemoval& dir,
                               const RemovalBoxLabel& label,
                               const Database& db);

/// One codeword per (m', sender): r * C(K-1, K-r-1) in total, in the
/// directory's canonical order.
std::vector<RemovalCodeword> encode_removal(const Database& db,
                                            const BinDirectoryRemoval& dir);

/// What `node` recovers from `codeword` using only bits it already stores.
RemovalRecovery decode_removal(NodeId node, const RemovalCodeword& codeword,
                               const Database& db,
                               const BinDirectoryRemoval& dir);

/// Decodes every codeword at every target, checks each recovered value
/// against the file, and commits the new placement in one step.
/// Throws kDecodeVerificationFailure on any mismatch or missing delivery.
Database commit_removal(const Database& db, const BinDirectoryRemoval& dir,
                        std::span<const RemovalCodeword> codewords);

struct RemovalOutcome {
  Database database;
  std::vector<RemovalCodeword> codewords;
  BinDirectoryRemoval directory;
};

/// bin -> encode -> decode everywhere -> commit. The result lives on the
/// surviving nodes and has every bit at exactly r of them again.
RemovalOutcome apply_removal_rebalance(const Database& db, NodeId k,
                                       const RngSpec& rng);

}  // namespace codedrebal
