#include "codedrebal/removal.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "codedrebal/error.hpp"

namespace codedrebal {

std::string RemovalBoxLabel::to_string() const {
  const std::string rest = remainder.empty() ? "-" : remainder.label();
  return "W^" + std::to_string(holder) + "_[" + std::to_string(target) + "," +
         rest + "]";
}

std::size_t RemovalBoxLabelHash::operator()(
    const RemovalBoxLabel& l) const noexcept {
  std::uint64_t h = l.remainder.mask();
  h ^= (static_cast<std::uint64_t>(l.target) << 6 | l.holder) *
       0x9e3779b97f4a7c15ULL;
  return std::hash<std::uint64_t>{}(h ^ (h >> 29));
}

std::optional<RemovalBoxLabel> BinDirectoryRemoval::label_of(
    BitIndex i) const {
  if (i >= slot_of_bit_.size() || slot_of_bit_[i] == kUnassigned) {
    return std::nullopt;
  }
  return labels_[slot_of_bit_[i]];
}

std::optional<std::size_t> BinDirectoryRemoval::slot_of(
    const RemovalBoxLabel& label) const {
  auto it = slot_index_.find(label);
  if (it == slot_index_.end()) return std::nullopt;
  return it->second;
}

void BinDirectoryRemoval::validate(const RemovalBoxLabel& label) const {
  if (!slot_of(label)) {
    throw Error(ErrorCode::kInvalidLabel,
                label.to_string() + " is not a box after removing node " +
                    std::to_string(removed_));
  }
}

std::vector<RemovalBoxLabel> removal_boxes_for_class(NodeSet survivors,
                                                     NodeSet m) {
  std::vector<RemovalBoxLabel> boxes;
  const NodeSet holders = survivors - m;
  for (NodeId target : m) {
    for (NodeId holder : holders) {
      boxes.push_back({target, m.without(target), holder});
    }
  }
  return boxes;
}

BinDirectoryRemoval bin_removal(const Database& db, NodeId k,
                                const RngSpec& rng_spec) {
  const NodeSet nodes = db.nodes();
  if (!nodes.contains(k)) {
    throw Error(ErrorCode::kUnknownNode, "cannot remove node " +
                                             std::to_string(k) + " from " +
                                             nodes.to_string());
  }
  const auto num_nodes = static_cast<unsigned>(db.num_nodes());
  const unsigned r = db.replication();
  if (r < 2 || r + 1 > num_nodes) {
    throw Error(ErrorCode::kReplicationOutOfRange,
                "removal needs 2 <= r <= K-1, got r=" + std::to_string(r) +
                    " K=" + std::to_string(num_nodes));
  }

  BinDirectoryRemoval dir;
  dir.removed_ = k;
  dir.survivors_ = nodes.without(k);
  dir.replication_ = r;
  dir.slot_of_bit_.assign(db.num_bits(), BinDirectoryRemoval::kUnassigned);

  for_each_subset(dir.survivors_, num_nodes - r - 1, [&](NodeSet rest) {
    const NodeSet senders = dir.survivors_ - rest;
    for (NodeId holder : senders) {
      for (NodeId target : senders) {
        if (target == holder) continue;
        RemovalBoxLabel label{target, rest, holder};
        dir.slot_index_.emplace(label,
                                static_cast<std::uint32_t>(dir.labels_.size()));
        dir.labels_.push_back(label);
      }
    }
  });
  dir.packets_.resize(dir.labels_.size());

  Rng rng(rng_spec);
  const std::uint64_t boxes_per_class =
      static_cast<std::uint64_t>(num_nodes - r) * (r - 1);
  const auto& sets = db.placement.node_sets;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const NodeSet stored = sets[i];
    if (!stored.contains(k)) continue;
    if (stored.size() != r || !nodes.contains(stored)) {
      throw Error(ErrorCode::kInvalidParameters,
                  "bit " + std::to_string(i) + " is stored at " +
                      stored.to_string() + ", not r live nodes");
    }
    const NodeSet holders = stored.without(k);
    const NodeSet m = dir.survivors_ - holders;
    const std::uint64_t u = rng.uniform_below(boxes_per_class);
    const NodeId target = m.nth(u / (r - 1));
    const NodeId holder = holders.nth(u % (r - 1));
    const std::uint32_t slot =
        dir.slot_index_.at(RemovalBoxLabel{target, m.without(target), holder});
    dir.packets_[slot].push_back(static_cast<BitIndex>(i));
    dir.slot_of_bit_[i] = slot;
    ++dir.num_assigned_;
  }
  return dir;
}

namespace {

void check_directory(const Database& db, const BinDirectoryRemoval& dir) {
  const NodeId k = dir.removed_node();
  if (dir.num_bits() != db.num_bits() || !db.nodes().contains(k) ||
      dir.survivors() != db.nodes().without(k) ||
      dir.replication() != db.replication()) {
    throw Error(ErrorCode::kDirectoryMismatch,
                "directory for removal of node " + std::to_string(k) +
                    " does not describe this database");
  }
}

// Every bit of box W^a_[p, m'] must sit exactly at the live nodes outside
// m' u {p}, which include k.
void check_packet_classes(const Database& db, const BinDirectoryRemoval& dir) {
  const NodeSet nodes = db.nodes();
  for (std::size_t slot = 0; slot < dir.labels().size(); ++slot) {
    const NodeSet expected = nodes - dir.labels()[slot].class_set();
    for (BitIndex bit : dir.packet(slot)) {
      if (db.storing_nodes(bit) != expected) {
        throw Error(ErrorCode::kDirectoryMismatch,
                    "bit " + std::to_string(bit) + " in " +
                        dir.labels()[slot].to_string() + " is stored at " +
                        db.storing_nodes(bit).to_string());
      }
    }
  }
}

}  // namespace

PacketContents packet_contents(const BinDirectoryRemoval& dir,
                               const RemovalBoxLabel& label,
                               const Database& db) {
  const auto slot = dir.slot_of(label);
  if (!slot) {
    dir.validate(label);
    return {};
  }
  PacketContents out;
  const auto bits = dir.packet(*slot);
  out.bits.assign(bits.begin(), bits.end());
  out.values.reserve(bits.size());
  for (BitIndex b : bits) out.values.push_back(db.file.values[b]);
  return out;
}

std::vector<RemovalCodeword> encode_removal(const Database& db,
                                            const BinDirectoryRemoval& dir) {
  check_directory(db, dir);
  check_packet_classes(db, dir);

  const std::size_t per_codeword = dir.replication() - 1;
  const auto labels = dir.labels();
  std::vector<RemovalCodeword> out;
  out.reserve(labels.size() / per_codeword);
  for (std::size_t first = 0; first < labels.size(); first += per_codeword) {
    RemovalCodeword cw;
    cw.sender = labels[first].holder;
    cw.group = labels[first].remainder;
    std::size_t longest = 0;
    for (std::size_t s = first; s < first + per_codeword; ++s) {
      const std::size_t len = dir.packet(s).size();
      cw.constituents.push_back({labels[s], len});
      cw.recipients.insert(labels[s].target);
      longest = std::max(longest, len);
    }
    cw.payload.assign(longest, 0);
    for (std::size_t s = first; s < first + per_codeword; ++s) {
      const auto bits = dir.packet(s);
      for (std::size_t t = 0; t < bits.size(); ++t) {
        cw.payload[t] ^= db.file.values[bits[t]];
      }
    }
    out.push_back(std::move(cw));
  }
  return out;
}

RemovalRecovery decode_removal(NodeId node, const RemovalCodeword& codeword,
                               const Database& db,
                               const BinDirectoryRemoval& dir) {
  const PacketRef<RemovalBoxLabel>* wanted = nullptr;
  for (const auto& c : codeword.constituents) {
    if (c.label.target == node) wanted = &c;
  }
  if (wanted == nullptr) {
    throw Error(ErrorCode::kNotARecipient,
                "node " + std::to_string(node) +
                    " is not a target of the codeword sent by node " +
                    std::to_string(codeword.sender));
  }

  std::vector<std::uint8_t> buffer = codeword.payload;
  std::span<const BitIndex> own_bits;
  for (const auto& c : codeword.constituents) {
    const auto slot = dir.slot_of(c.label);
    if (!slot || dir.packet(*slot).size() != c.length ||
        c.length > buffer.size()) {
      throw Error(ErrorCode::kDirectoryMismatch,
                  "constituent " + c.label.to_string() +
                      " disagrees with the directory");
    }
    const auto bits = dir.packet(*slot);
    if (&c == wanted) {
      own_bits = bits;
      continue;
    }
    // Side information: the node XORs out packets it already stores.
    for (std::size_t t = 0; t < bits.size(); ++t) {
      if (!db.storing_nodes(bits[t]).contains(node)) {
        throw Error(ErrorCode::kDecodeVerificationFailure,
                    "node " + std::to_string(node) + " lacks bit " +
                        std::to_string(bits[t]) + " of " +
                        c.label.to_string());
      }
      buffer[t] ^= db.file.values[bits[t]];
    }
  }

  RemovalRecovery out;
  out.label = wanted->label;
  out.bits.assign(own_bits.begin(), own_bits.end());
  out.values.assign(buffer.begin(),
                    buffer.begin() + static_cast<std::ptrdiff_t>(wanted->length));
  return out;
}

Database commit_removal(const Database& db, const BinDirectoryRemoval& dir,
                        std::span<const RemovalCodeword> codewords) {
  check_directory(db, dir);
  const NodeId k = dir.removed_node();

  Database next;
  next.file = db.file;
  next.placement.nodes = dir.survivors();
  next.placement.replication = db.replication();
  next.placement.node_sets = db.placement.node_sets;

  std::vector<std::uint8_t> delivered(db.num_bits(), 0);
  for (const auto& cw : codewords) {
    for (const auto& c : cw.constituents) {
      const RemovalRecovery rec = decode_removal(c.label.target, cw, db, dir);
      for (std::size_t t = 0; t < rec.bits.size(); ++t) {
        const BitIndex bit = rec.bits[t];
        if (rec.values[t] != db.file.values[bit]) {
          throw Error(ErrorCode::kDecodeVerificationFailure,
                      "node " + std::to_string(c.label.target) +
                          " decoded a wrong value for bit " +
                          std::to_string(bit) + " from " + c.label.to_string());
        }
        if (delivered[bit]++ != 0) {
          throw Error(ErrorCode::kDecodeVerificationFailure,
                      "bit " + std::to_string(bit) + " delivered twice");
        }
        next.placement.node_sets[bit] =
            db.storing_nodes(bit).without(k).with(c.label.target);
      }
    }
  }
  for (std::size_t i = 0; i < db.num_bits(); ++i) {
    if (db.placement.node_sets[i].contains(k) && delivered[i] == 0) {
      throw Error(ErrorCode::kDecodeVerificationFailure,
                  "bit " + std::to_string(i) + " of the removed node was never "
                  "delivered");
    }
  }
  return next;
}

RemovalOutcome apply_removal_rebalance(const Database& db, NodeId k,
                                       const RngSpec& rng) {
  BinDirectoryRemoval dir = bin_removal(db, k, rng);
  std::vector<RemovalCodeword> codewords = encode_removal(db, dir);
  Database next = commit_removal(db, dir, codewords);
  return {std::move(next), std::move(codewords), std::move(dir)};
}

}  // namespace codedrebal
