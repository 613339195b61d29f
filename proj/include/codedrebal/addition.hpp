#pragma once

// Rebalancing when an empty node K+1 joins.
//
// Each class W_m is split uniformly over K+1 boxes. The r boxes of the U
// family name a current holder p that hands the bit to the new node and
// drops its own copy. The K-r+1 boxes of the V family mark bits that stay
// where they are. Only U packets are transmitted, uncoded.

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

enum class BoxFamily : std::uint8_t { kU, kV };

/// U: W_[node, m], node = the mover p in [K] \ m.
/// V: W_[node, (m u {K+1}) \ node], node = the stay marker in m u {K+1}.
struct AdditionBoxLabel {
  BoxFamily family = BoxFamily::kU;
  NodeSet class_set;
  NodeId node = 0;
  NodeId new_node = 0;

  /// m for U; (m u {K+1}) \ node for V.
  NodeSet remainder() const;
  /// "W_[1,23]" or "W_[2,35]"
  std::string to_string() const;

  auto operator<=>(const AdditionBoxLabel&) const = default;
};

using AdditionCodeword = Codeword<AdditionBoxLabel>;

class BinDirectoryAddition {
 public:
  NodeSet nodes() const { return nodes_; }
  NodeId new_node() const { return new_node_; }
  unsigned replication() const { return replication_; }
  std::size_t num_bits() const { return slot_of_bit_.size(); }

  /// Box of bit i. Every bit of the file has one.
  const AdditionBoxLabel& label_of(BitIndex i) const {
    return labels_[slot_of_bit_[i]];
  }

  /// All boxes: classes in lexicographic order, each class as its r U boxes
  /// (ascending mover) followed by its K-r+1 V boxes (ascending marker).
  std::span<const AdditionBoxLabel> labels() const { return labels_; }
  std::optional<std::size_t> slot_of(const AdditionBoxLabel& label) const;
  std::span<const BitIndex> packet(std::size_t slot) const {
    return packets_[slot];
  }

  /// Throws kInvalidLabel unless `label` is one of this directory's boxes.
  void validate(const AdditionBoxLabel& label) const;

 private:
  friend BinDirectoryAddition bin_addition(const Database&, const RngSpec&);

  NodeSet nodes_;
  NodeId new_node_ = 0;
  unsigned replication_ = 0;
  std::vector<std::uint32_t> slot_of_bit_;
  std::vector<AdditionBoxLabel> labels_;
  std::vector<std::vector<BitIndex>> packets_;
  std::unordered_map<NodeSet, std::uint32_t> class_base_;
};

/// The K+1 boxes of class m, U family first.
std::vector<AdditionBoxLabel> addition_boxes_for_class(NodeSet nodes,
                                                       NodeId new_node,
                                                       NodeSet m);

/// The joining node gets id max(live) + 1.
BinDirectoryAddition bin_addition(const Database& db, const RngSpec& rng);

PacketContents packet_contents(const BinDirectoryAddition& dir,
                               const AdditionBoxLabel& label,
                               const Database& db);

/// One raw codeword per (mover p, class m not containing p), movers
/// ascending: K * C(K-1, K-r) in total. V packets are never sent.
std::vector<AdditionCodeword> encode_addition(const Database& db,
                                              const BinDirectoryAddition& dir);

/// The new node stores every received packet and each mover drops its copy,
/// all in one commit. Throws kDecodeVerificationFailure if a payload differs
/// from the file or a U bit is not delivered exactly once.
Database commit_addition(const Database& db, const BinDirectoryAddition& dir,
                         std::span<const AdditionCodeword> codewords);

struct AdditionOutcome {
  Database database;
  std::vector<AdditionCodeword> codewords;
  BinDirectoryAddition directory;
};

AdditionOutcome apply_addition_rebalance(const Database& db,
                                         const RngSpec& rng);

}  // namespace codedrebal
