#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "codedrebal/database.hpp"
#include "codedrebal/node_set.hpp"

namespace codedrebal {

/// A packet named inside a codeword, with its true (unpadded) length.
template <typename Label>
struct PacketRef {
  Label label;
  std::size_t length = 0;
};

/// One broadcast transmission. The payload is the position-wise XOR of the
/// constituent packets, each zero-padded at the tail to the longest one; a
/// single-constituent codeword carries the raw packet.
template <typename Label>
struct Codeword {
  NodeId sender = 0;
  NodeSet group;       // m' for removal, the class m for addition
  NodeSet recipients;  // nodes that keep what they decode
  std::vector<PacketRef<Label>> constituents;
  std::vector<std::uint8_t> payload;

  /// Bits on the wire; zero-length codewords are recorded but never sent.
  std::size_t length() const { return payload.size(); }
};

/// A packet a node reconstructed, in canonical (ascending bit) order.
template <typename Label>
struct RecoveredPacket {
  Label label;
  std::vector<BitIndex> bits;
  std::vector<std::uint8_t> values;
};

/// Bits of one box with their values, ascending by bit index.
struct PacketContents {
  std::vector<BitIndex> bits;
  std::vector<std::uint8_t> values;
};

}  // namespace codedrebal
