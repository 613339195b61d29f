#include "codedrebal/addition.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "codedrebal/analysis.hpp"
#include "codedrebal/error.hpp"
#include "codedrebal/removal.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace codedrebal {
namespace {

using testing::error_of;

RngSpec placement(std::uint64_t s) { return {s, StreamLabel::kPlacement, 0}; }
RngSpec binning(std::uint64_t s) {
  return {s, StreamLabel::kAdditionBinning, 0};
}

std::vector<std::string> names(const std::vector<AdditionBoxLabel>& boxes) {
  std::vector<std::string> out;
  for (const auto& b : boxes) out.push_back(b.to_string());
  return out;
}

TEST(AdditionBinningTest, ExampleBoxesForClass23) {
  // K=4, r=2, node 5 joins. W_23 is held by {1,4}.
  const auto boxes =
      addition_boxes_for_class(NodeSet::range(1, 4), 5, NodeSet::of({2, 3}));
  EXPECT_EQ(names(boxes), (std::vector<std::string>{
                              "W_[1,23]", "W_[4,23]", "W_[2,35]", "W_[3,25]",
                              "W_[5,23]"}));
  EXPECT_EQ(boxes[0].family, BoxFamily::kU);
  EXPECT_EQ(boxes[2].family, BoxFamily::kV);
}

TEST(AdditionBinningTest, BoxesPerClass) {
  for (unsigned k = 1; k <= 8; ++k) {
    for (unsigned r = 1; r <= k; ++r) {
      const NodeSet nodes = NodeSet::range(1, k);
      for (NodeSet m : testing::brute_force_subsets(nodes, k - r)) {
        const auto boxes = addition_boxes_for_class(nodes, k + 1, m);
        ASSERT_EQ(boxes.size(), k + 1u);
        const auto u = std::count_if(boxes.begin(), boxes.end(), [](auto& b) {
          return b.family == BoxFamily::kU;
        });
        EXPECT_EQ(static_cast<unsigned>(u), r);
        for (const auto& b : boxes) {
          if (b.family == BoxFamily::kU) {
            EXPECT_FALSE(m.contains(b.node));
          } else {
            EXPECT_TRUE(m.with(k + 1).contains(b.node));
            EXPECT_EQ(b.remainder().size(), k - r);
          }
        }
      }
    }
  }
}

TEST(AdditionBinningTest, EveryBitGetsABoxOfItsClass) {
  const Database db = build_database(5, 2, 20'000, placement(1));
  const auto dir = bin_addition(db, binning(1));
  EXPECT_EQ(dir.new_node(), 6u);
  EXPECT_EQ(dir.labels().size(), binomial(5, 3) * 6);
  std::vector<int> seen(db.num_bits(), 0);
  for (std::size_t s = 0; s < dir.labels().size(); ++s) {
    for (BitIndex b : dir.packet(s)) {
      ++seen[b];
      EXPECT_EQ(dir.labels()[s], dir.label_of(b));
      EXPECT_EQ(dir.labels()[s].class_set, db.nodes() - db.storing_nodes(b));
    }
  }
  for (int n : seen) ASSERT_EQ(n, 1);
}

TEST(AdditionBinningTest, NewNodeIdFollowsLargestLiveId) {
  const Database db = build_database(4, 2, 200, placement(2));
  const Database shrunk =
      apply_removal_rebalance(db, 2, {2, StreamLabel::kRemovalBinning, 0})
          .database;
  ASSERT_EQ(shrunk.nodes(), NodeSet::of({1, 3, 4}));
  const auto dir = bin_addition(shrunk, binning(2));
  EXPECT_EQ(dir.new_node(), 5u);
  const auto out = apply_addition_rebalance(shrunk, binning(2));
  EXPECT_EQ(out.database.nodes(), NodeSet::of({1, 3, 4, 5}));
  EXPECT_TRUE(verify_r_balanced(out.database, 1.0).replication_ok);
}

TEST(AdditionBinningTest, InvalidLabel) {
  const Database db = build_database(4, 2, 100, placement(3));
  const auto dir = bin_addition(db, binning(3));
  EXPECT_EQ(error_of([&] {
              packet_contents(dir,
                              {BoxFamily::kU, NodeSet::of({2, 3}), 2, 5}, db);
            }),
            ErrorCode::kInvalidLabel);
  EXPECT_EQ(error_of([&] {
              packet_contents(dir, {BoxFamily::kU, NodeSet::of({2}), 1, 5}, db);
            }),
            ErrorCode::kInvalidLabel);
}

TEST(EncodeAdditionTest, ExampleNode1Sends) {
  const Database db = build_database(4, 2, 6000, placement(4));
  const auto dir = bin_addition(db, binning(4));
  const auto cws = encode_addition(db, dir);
  ASSERT_EQ(cws.size(), 12u);
  std::vector<std::string> from_1;
  for (const auto& cw : cws) {
    ASSERT_EQ(cw.constituents.size(), 1u);
    EXPECT_EQ(cw.recipients, NodeSet::of({5}));
    if (cw.sender == 1) from_1.push_back(cw.constituents[0].label.to_string());
  }
  EXPECT_EQ(from_1,
            (std::vector<std::string>{"W_[1,23]", "W_[1,24]", "W_[1,34]"}));
}

TEST(EncodeAdditionTest, CodewordCountMatchesLoopCount) {
  for (unsigned k = 1; k <= 8; ++k) {
    for (unsigned r = 1; r <= k; ++r) {
      const Database db = build_database(k, r, 300, placement(k + r));
      const auto cws = encode_addition(db, bin_addition(db, binning(r)));
      EXPECT_EQ(cws.size(), testing::count_addition_transmissions(k, r))
          << "K=" << k << " r=" << r;
    }
  }
}

TEST(EncodeAdditionTest, PayloadIsRawPacket) {
  const Database db = build_database(5, 3, 5000, placement(5));
  const auto dir = bin_addition(db, binning(5));
  for (const auto& cw : encode_addition(db, dir)) {
    const auto& label = cw.constituents[0].label;
    EXPECT_EQ(label.family, BoxFamily::kU);
    EXPECT_EQ(label.node, cw.sender);
    EXPECT_EQ(label.class_set, cw.group);
    EXPECT_EQ(cw.payload, packet_contents(dir, label, db).values);
  }
}

TEST(EncodeAdditionTest, SingleBitLoadIsZeroOrFull) {
  // One bit lands in a U box with probability r/(K+1); then the load is
  // 1 / (r/(K+1)) = 2.5 for K=4, r=2.
  std::set<double> loads;
  for (std::uint64_t s = 0; s < 40; ++s) {
    const Database db = build_database(4, 2, 1, placement(s));
    const auto out = apply_addition_rebalance(db, binning(s));
    EXPECT_EQ(out.codewords.size(), 12u);
    loads.insert(addition_load(out.codewords, 4, 2, 1).measured_load);
  }
  EXPECT_EQ(loads, (std::set<double>{0.0, 2.5}));
}

TEST(ApplyAdditionTest, UAndVBitsLandWhereExpected) {
  const Database db = build_database(4, 2, 10'000, placement(6));
  const auto out = apply_addition_rebalance(db, binning(6));
  EXPECT_EQ(out.database.nodes(), NodeSet::range(1, 5));
  for (std::size_t i = 0; i < db.num_bits(); ++i) {
    const auto b = static_cast<BitIndex>(i);
    const auto& label = out.directory.label_of(b);
    const NodeSet before = db.storing_nodes(b);
    const NodeSet after = out.database.storing_nodes(b);
    if (label.family == BoxFamily::kU) {
      ASSERT_EQ(after, before.without(label.node).with(5));
    } else {
      ASSERT_EQ(after, before);
    }
  }
}

TEST(ApplyAdditionTest, NewNodeStoresExactlyWhatWasSent) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Database db = build_database(6, 3, 30'000, placement(s));
    const auto out = apply_addition_rebalance(db, binning(s));
    const auto load = addition_load(out.codewords, 6, 3, 30'000);
    EXPECT_EQ(node_contents(out.database, 7).size(),
              load.total_transmitted_bits);
    EXPECT_EQ(load.moved_bits, load.total_transmitted_bits);
    EXPECT_TRUE(verify_r_balanced(out.database, 0.05).replication_ok);
  }
}

TEST(ApplyAdditionTest, PostAdditionPlacementIsUniform) {
  const Database db = build_database(4, 2, 1'000'000, placement(7));
  const auto out = apply_addition_rebalance(db, binning(7));
  std::map<NodeSet, std::size_t> freq;
  for (NodeSet s : out.database.placement.node_sets) ++freq[s];
  ASSERT_EQ(freq.size(), 10u);
  for (const auto& [set, count] : freq) {
    EXPECT_NEAR(static_cast<double>(count) / 1e6, 0.1, 0.02 * 0.1)
        << set.to_string();
  }
}

TEST(ApplyAdditionTest, CorruptedPayloadIsDetected) {
  const Database db = build_database(4, 2, 3000, placement(8));
  const auto dir = bin_addition(db, binning(8));
  auto cws = encode_addition(db, dir);
  auto it = std::find_if(cws.begin(), cws.end(),
                         [](const auto& c) { return c.length() > 0; });
  ASSERT_NE(it, cws.end());
  it->payload.back() ^= 1;
  EXPECT_EQ(error_of([&] { commit_addition(db, dir, cws); }),
            ErrorCode::kDecodeVerificationFailure);
}

TEST(ApplyAdditionTest, MissingOrDuplicatedCodewordIsDetected) {
  const Database db = build_database(4, 2, 3000, placement(9));
  const auto dir = bin_addition(db, binning(9));
  auto cws = encode_addition(db, dir);
  auto dup = cws;
  dup.push_back(cws.front());
  EXPECT_NE(error_of([&] { commit_addition(db, dir, dup); }), std::nullopt);
  cws.erase(cws.begin());
  EXPECT_EQ(error_of([&] { commit_addition(db, dir, cws); }),
            ErrorCode::kDecodeVerificationFailure);
}

TEST(ApplyAdditionTest, DirectoryMismatch) {
  const Database db = build_database(4, 2, 3000, placement(10));
  const Database other = build_database(5, 2, 3000, placement(10));
  const auto dir = bin_addition(db, binning(10));
  EXPECT_EQ(error_of([&] { encode_addition(other, dir); }),
            ErrorCode::kDirectoryMismatch);
}

}  // namespace
}  // namespace codedrebal
