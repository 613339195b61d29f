#include "codedrebal/addition.hpp"

#include <string>
#include <utility>

#include "codedrebal/error.hpp"

namespace codedrebal {

NodeSet AdditionBoxLabel::remainder() const {
  if (family == BoxFamily::kU) return class_set;
  return class_set.with(new_node).without(node);
}

std::string AdditionBoxLabel::to_string() const {
  const NodeSet rest = remainder();
  return "W_[" + std::to_string(node) + "," +
         (rest.empty() ? std::string("-") : rest.label()) + "]";
}

std::vector<AdditionBoxLabel> addition_boxes_for_class(NodeSet nodes,
                                                       NodeId new_node,
                                                       NodeSet m) {
  std::vector<AdditionBoxLabel> boxes;
  for (NodeId p : nodes - m) {
    boxes.push_back({BoxFamily::kU, m, p, new_node});
  }
  for (NodeId a : m.with(new_node)) {
    boxes.push_back({BoxFamily::kV, m, a, new_node});
  }
  return boxes;
}

std::optional<std::size_t> BinDirectoryAddition::slot_of(
    const AdditionBoxLabel& label) const {
  auto it = class_base_.find(label.class_set);
  if (it == class_base_.end()) return std::nullopt;
  const std::size_t per_class = nodes_.size() + 1;
  for (std::size_t s = it->second; s < it->second + per_class; ++s) {
    if (labels_[s] == label) return s;
  }
  return std::nullopt;
}

void BinDirectoryAddition::validate(const AdditionBoxLabel& label) const {
  if (!slot_of(label)) {
    throw Error(ErrorCode::kInvalidLabel,
                label.to_string() + " is not a box for class " +
                    label.class_set.to_string());
  }
}

BinDirectoryAddition bin_addition(const Database& db, const RngSpec& rng_spec) {
  const NodeSet nodes = db.nodes();
  const auto num_nodes = static_cast<unsigned>(nodes.size());
  const unsigned r = db.replication();
  if (r < 1 || r > num_nodes) {
    throw Error(ErrorCode::kInvalidParameters,
                "addition needs 1 <= r <= K, got r=" + std::to_string(r) +
                    " K=" + std::to_string(num_nodes));
  }
  if (nodes.max() + 1 > kMaxNodeId) {
    throw Error(ErrorCode::kInvalidParameters,
                "no node id left for the joining node");
  }

  BinDirectoryAddition dir;
  dir.nodes_ = nodes;
  dir.new_node_ = nodes.max() + 1;
  dir.replication_ = r;
  for_each_subset(nodes, num_nodes - r, [&](NodeSet m) {
    dir.class_base_.emplace(m, static_cast<std::uint32_t>(dir.labels_.size()));
    for (const auto& box : addition_boxes_for_class(nodes, dir.new_node_, m)) {
      dir.labels_.push_back(box);
    }
  });
  dir.packets_.resize(dir.labels_.size());
  dir.slot_of_bit_.resize(db.num_bits());

  Rng rng(rng_spec);
  const auto& sets = db.placement.node_sets;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const NodeSet stored = sets[i];
    if (stored.size() != r || !nodes.contains(stored)) {
      throw Error(ErrorCode::kInvalidParameters,
                  "bit " + std::to_string(i) + " is stored at " +
                      stored.to_string() + ", not r live nodes");
    }
    // Within a class the slots are laid out as the U movers (= stored,
    // ascending) followed by the V markers, so a uniform offset is a
    // uniform box.
    const auto offset = rng.uniform_below(num_nodes + 1);
    const std::uint32_t slot =
        dir.class_base_.at(nodes - stored) + static_cast<std::uint32_t>(offset);
    dir.packets_[slot].push_back(static_cast<BitIndex>(i));
    dir.slot_of_bit_[i] = slot;
  }
  return dir;
}

namespace {

void check_directory(const Database& db, const BinDirectoryAddition& dir) {
  if (dir.num_bits() != db.num_bits() || dir.nodes() != db.nodes() ||
      dir.replication() != db.replication()) {
    throw Error(ErrorCode::kDirectoryMismatch,
                "addition directory does not describe this database");
  }
}

}  // namespace

PacketContents packet_contents(const BinDirectoryAddition& dir,
                               const AdditionBoxLabel& label,
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

std::vector<AdditionCodeword> encode_addition(const Database& db,
                                              const BinDirectoryAddition& dir) {
  check_directory(db, dir);
  const NodeSet nodes = db.nodes();
  const std::size_t class_size = nodes.size() - db.replication();
  std::vector<AdditionCodeword> out;
  for (NodeId mover : nodes) {
    for_each_subset(nodes.without(mover), class_size, [&](NodeSet m) {
      const AdditionBoxLabel label{BoxFamily::kU, m, mover, dir.new_node()};
      const auto slot = dir.slot_of(label);
      if (!slot) dir.validate(label);
      const auto bits = dir.packet(*slot);
      AdditionCodeword cw;
      cw.sender = mover;
      cw.group = m;
      cw.recipients = NodeSet::of({dir.new_node()});
      cw.constituents.push_back({label, bits.size()});
      cw.payload.reserve(bits.size());
      for (BitIndex b : bits) {
        if (db.storing_nodes(b) != nodes - m) {
          throw Error(ErrorCode::kDirectoryMismatch,
                      "bit " + std::to_string(b) + " in " + label.to_string() +
                          " is stored at " + db.storing_nodes(b).to_string());
        }
        cw.payload.push_back(db.file.values[b]);
      }
      out.push_back(std::move(cw));
    });
  }
  return out;
}

Database commit_addition(const Database& db, const BinDirectoryAddition& dir,
                         std::span<const AdditionCodeword> codewords) {
  check_directory(db, dir);
  const NodeId joining = dir.new_node();

  Database next;
  next.file = db.file;
  next.placement.nodes = db.nodes().with(joining);
  next.placement.replication = db.replication();
  next.placement.node_sets = db.placement.node_sets;

  std::vector<std::uint8_t> delivered(db.num_bits(), 0);
  for (const auto& cw : codewords) {
    for (const auto& c : cw.constituents) {
      const auto slot = dir.slot_of(c.label);
      if (!slot || c.label.family != BoxFamily::kU ||
          c.label.node != cw.sender) {
        throw Error(ErrorCode::kDirectoryMismatch,
                    "codeword from node " + std::to_string(cw.sender) +
                        " carries unexpected packet " + c.label.to_string());
      }
      const auto bits = dir.packet(*slot);
      if (bits.size() != c.length || cw.payload.size() != c.length) {
        throw Error(ErrorCode::kDecodeVerificationFailure,
                    c.label.to_string() + " arrived with the wrong length");
      }
      for (std::size_t t = 0; t < bits.size(); ++t) {
        if (cw.payload[t] != db.file.values[bits[t]]) {
          throw Error(ErrorCode::kDecodeVerificationFailure,
                      "bit " + std::to_string(bits[t]) + " of " +
                          c.label.to_string() + " arrived corrupted");
        }
        if (delivered[bits[t]]++ != 0) {
          throw Error(ErrorCode::kDecodeVerificationFailure,
                      "bit " + std::to_string(bits[t]) + " delivered twice");
        }
        next.placement.node_sets[bits[t]] =
            db.storing_nodes(bits[t]).without(cw.sender).with(joining);
      }
    }
  }
  for (std::size_t i = 0; i < db.num_bits(); ++i) {
    const bool moves =
        dir.label_of(static_cast<BitIndex>(i)).family == BoxFamily::kU;
    if (moves && delivered[i] == 0) {
      throw Error(ErrorCode::kDecodeVerificationFailure,
                  "bit " + std::to_string(i) + " was never handed over");
    }
  }
  return next;
}

AdditionOutcome apply_addition_rebalance(const Database& db,
                                         const RngSpec& rng) {
  BinDirectoryAddition dir = bin_addition(db, rng);
  std::vector<AdditionCodeword> codewords = encode_addition(db, dir);
  Database next = commit_addition(db, dir, codewords);
  return {std::move(next), std::move(codewords), std::move(dir)};
}

}  // namespace codedrebal
