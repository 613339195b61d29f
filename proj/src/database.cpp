#include "codedrebal/database.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "codedrebal/error.hpp"

namespace codedrebal {

Database build_database(unsigned num_nodes, unsigned replication,
                        std::size_t num_bits, const RngSpec& rng_spec) {
  if (num_nodes < 1 || num_nodes > kMaxNodeId) {
    throw Error(ErrorCode::kInvalidParameters,
                "K must be in [1, " + std::to_string(kMaxNodeId) + "], got " +
                    std::to_string(num_nodes));
  }
  if (replication < 1 || replication > num_nodes) {
    throw Error(ErrorCode::kInvalidParameters,
                "r must be in [1, K], got r=" + std::to_string(replication) +
                    " K=" + std::to_string(num_nodes));
  }
  if (num_bits == 0) {
    throw Error(ErrorCode::kInvalidParameters, "F must be at least 1");
  }
  if (num_bits > 0xffffffffULL) {
    throw Error(ErrorCode::kInvalidParameters, "F exceeds 32-bit bit indices");
  }

  Database db;
  db.placement.nodes = NodeSet::range(1, num_nodes);
  db.placement.replication = replication;
  db.placement.node_sets.resize(num_bits);
  db.file.values.resize(num_bits);

  Rng rng(rng_spec);

  // Partial Fisher-Yates: the first r slots after r swaps form a uniform
  // r-subset whatever order the array starts in, so the array is reused.
  std::array<NodeId, kMaxNodeId> ids{};
  for (unsigned i = 0; i < num_nodes; ++i) ids[i] = i + 1;
  for (auto& set : db.placement.node_sets) {
    NodeSet s;
    for (unsigned j = 0; j < replication; ++j) {
      const auto pick = j + rng.uniform_below(num_nodes - j);
      std::swap(ids[j], ids[pick]);
      s.insert(ids[j]);
    }
    set = s;
  }

  std::uint64_t word = 0;
  for (std::size_t i = 0; i < num_bits; ++i) {
    if (i % 64 == 0) word = rng.next();
    db.file.values[i] = static_cast<std::uint8_t>((word >> (i % 64)) & 1U);
  }
  return db;
}

std::vector<BitIndex> exclusive_group(const Database& db, NodeSet m) {
  std::vector<BitIndex> out;
  if (!db.nodes().contains(m)) return out;
  const NodeSet target = db.nodes() - m;
  const auto& sets = db.placement.node_sets;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (sets[i] == target) out.push_back(static_cast<BitIndex>(i));
  }
  return out;
}

std::vector<BitIndex> node_contents(const Database& db, NodeId n) {
  if (!db.nodes().contains(n)) {
    throw Error(ErrorCode::kUnknownNode,
                "node " + std::to_string(n) + " is not in " +
                    db.nodes().to_string());
  }
  std::vector<BitIndex> out;
  const auto& sets = db.placement.node_sets;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (sets[i].contains(n)) out.push_back(static_cast<BitIndex>(i));
  }
  return out;
}

std::vector<NodeCount> storage_counts(const Database& db) {
  std::array<std::uint64_t, kMaxNodeId + 1> counts{};
  for (NodeSet s : db.placement.node_sets) {
    for (NodeId n : s) ++counts[n];
  }
  std::vector<NodeCount> out;
  for (NodeId n : db.nodes()) out.push_back({n, counts[n]});
  return out;
}

BalanceReport verify_r_balanced(const Database& db, double tolerance) {
  BalanceReport report;
  report.tolerance = tolerance;
  const NodeSet live = db.nodes();
  const auto& sets = db.placement.node_sets;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (sets[i].size() != db.replication() || !live.contains(sets[i])) {
      report.replication_ok = false;
      ++report.replication_violations;
      if (report.offending_bits.size() < kMaxReportedOffenders) {
        report.offending_bits.push_back(static_cast<BitIndex>(i));
      }
    }
  }

  report.node_counts = storage_counts(db);
  if (db.num_nodes() == 0) {
    report.balance_ok = false;
    return report;
  }
  report.expected_per_node =
      db.placement.storage_fraction() * static_cast<double>(db.num_bits());
  for (const auto& c : report.node_counts) {
    const double dev =
        std::abs(static_cast<double>(c.bits) - report.expected_per_node) /
        report.expected_per_node;
    report.max_relative_deviation = std::max(report.max_relative_deviation, dev);
  }
  report.balance_ok = report.max_relative_deviation <= tolerance;
  return report;
}

}  // namespace codedrebal
