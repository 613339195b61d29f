#include "codedrebal/experiment.hpp"

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "codedrebal/error.hpp"
#include "test_util.hpp"

namespace codedrebal {
namespace {

using testing::error_of;

ExperimentConfig small_removal() {
  ExperimentConfig c;
  c.num_nodes = 6;
  c.replication = 3;
  c.num_bits = 20'000;
  c.event = EventKind::kRemoval;
  c.removed_node = 6;
  c.trials = 6;
  c.master_seed = 42;
  return c;
}

ExperimentConfig small_addition() {
  ExperimentConfig c;
  c.num_nodes = 4;
  c.replication = 2;
  c.num_bits = 20'000;
  c.event = EventKind::kAddition;
  c.trials = 5;
  c.master_seed = 7;
  return c;
}

bool mentions(const std::vector<std::string>& issues, const std::string& key) {
  return std::any_of(issues.begin(), issues.end(), [&](const std::string& s) {
    return s.rfind(key, 0) == 0;
  });
}

TEST(ValidateConfigTest, AcceptsDefaults) {
  ExperimentConfig c = small_removal();
  EXPECT_TRUE(validate_config(c).empty());
  EXPECT_TRUE(validate_config(small_addition()).empty());
}

TEST(ValidateConfigTest, ReportsEachBadField) {
  ExperimentConfig c = small_removal();
  c.replication = 6;
  c.removed_node = 9;
  c.trials = 0;
  c.num_bits = 0;
  c.uniformity_tolerance = -1.0;
  c.threads = 0;
  const auto issues = validate_config(c);
  EXPECT_TRUE(mentions(issues, "replication"));
  EXPECT_TRUE(mentions(issues, "event"));
  EXPECT_TRUE(mentions(issues, "trials"));
  EXPECT_TRUE(mentions(issues, "bits"));
  EXPECT_TRUE(mentions(issues, "uniformity tolerance"));
  EXPECT_TRUE(mentions(issues, "threads"));

  ExperimentConfig a = small_addition();
  a.replication = 5;
  EXPECT_TRUE(mentions(validate_config(a), "replication"));
  a.replication = 4;
  EXPECT_TRUE(validate_config(a).empty());

  EXPECT_EQ(error_of([&] { run_experiment(c); }), ErrorCode::kConfigInvalid);
}

TEST(RunExperimentTest, RemovalSummary) {
  const ExperimentResult res = run_experiment(small_removal());
  ASSERT_EQ(res.trials.size(), 6u);
  EXPECT_DOUBLE_EQ(res.theoretical_asymptote, 0.5);
  double sum = 0;
  for (std::size_t t = 0; t < res.trials.size(); ++t) {
    const auto& tr = res.trials[t];
    EXPECT_EQ(tr.trial, t);
    EXPECT_EQ(tr.seed, derive_trial_seed(42, t));
    EXPECT_EQ(tr.load.num_codewords, 30u);
    EXPECT_GE(tr.load.realized_load, 0.5);
    EXPECT_EQ(tr.storage_before.size(), 6u);
    EXPECT_EQ(tr.storage_after.size(), 5u);
    sum += tr.load.measured_load;
  }
  EXPECT_DOUBLE_EQ(res.mean_load, sum / 6);
  EXPECT_GT(res.std_load, 0.0);
  EXPECT_EQ(res.pooled_uniformity.total, 6u * 20'000u);
  EXPECT_EQ(res.pooled_uniformity.support.size(), 10u);
}

TEST(RunExperimentTest, TrialsAreIndependentOfEachOther) {
  const ExperimentConfig c = small_removal();
  const ExperimentResult res = run_experiment(c);
  const TrialResult third = run_trial(c, 3);
  EXPECT_EQ(third.load.total_transmitted_bits,
            res.trials[3].load.total_transmitted_bits);
  EXPECT_NE(res.trials[2].load.total_transmitted_bits,
            res.trials[3].load.total_transmitted_bits);
}

TEST(EmitTest, JsonIsByteIdenticalAcrossRunsAndThreads) {
  ExperimentConfig c = small_removal();
  const std::string a = emit_results(run_experiment(c), OutputFormat::kJson);
  const std::string b = emit_results(run_experiment(c), OutputFormat::kJson);
  c.threads = 3;
  const std::string d = emit_results(run_experiment(c), OutputFormat::kJson);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, d);

  ExperimentConfig other = small_removal();
  other.master_seed = 43;
  EXPECT_NE(a, emit_results(run_experiment(other), OutputFormat::kJson));
}

TEST(EmitTest, JsonSchema) {
  const auto doc = nlohmann::json::parse(
      emit_results(run_experiment(small_addition()), OutputFormat::kJson));
  ASSERT_TRUE(doc.contains("config"));
  EXPECT_EQ(doc["config"]["nodes"], 4);
  EXPECT_EQ(doc["config"]["replication"], 2);
  EXPECT_EQ(doc["config"]["bits"], 20'000);
  EXPECT_EQ(doc["config"]["event"], "add");
  EXPECT_EQ(doc["config"]["trials"], 5);
  EXPECT_EQ(doc["config"]["seed"], 7);

  ASSERT_EQ(doc["trials"].size(), 5u);
  for (const char* key :
       {"trial", "seed", "total_bits", "num_codewords", "normalizer", "load",
        "moved_bits", "realized_load", "metadata_bits", "max_rel_err",
        "chi_square", "storage_before", "storage_after"}) {
    EXPECT_TRUE(doc["trials"][0].contains(key)) << key;
  }
  EXPECT_FALSE(doc["trials"][0].contains("wall_ms"));
  EXPECT_EQ(doc["trials"][0]["num_codewords"], 12);
  EXPECT_EQ(doc["trials"][0]["storage_after"].size(), 5u);

  const auto& summary = doc["summary"];
  for (const char* key :
       {"mean_load", "std_load", "theoretical_asymptote", "bound", "uniformity"}) {
    EXPECT_TRUE(summary.contains(key)) << key;
  }
  EXPECT_EQ(summary["uniformity"]["degrees_of_freedom"], 9);
  EXPECT_TRUE(summary["uniformity"].contains("within_tolerance"));
}

TEST(EmitTest, TimingIsOptIn) {
  const auto res = run_experiment(small_addition());
  const auto doc = nlohmann::json::parse(
      emit_results(res, OutputFormat::kJson, {.include_timing = true}));
  EXPECT_TRUE(doc["trials"][0].contains("wall_ms"));
}

TEST(EmitTest, CsvHasHeaderAndOneRowPerTrial) {
  const ExperimentConfig c = small_removal();
  const auto res = run_experiment(c);
  std::istringstream in(emit_results(res, OutputFormat::kCsv));
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), c.trials + 1);
  EXPECT_EQ(lines[0], "trial,seed,total_bits,num_codewords,load,max_rel_err");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    EXPECT_EQ(std::count(lines[i].begin(), lines[i].end(), ','), 5);
    EXPECT_EQ(lines[i].substr(0, lines[i].find(',')), std::to_string(i - 1));
  }
}

TEST(EmitTest, UnwritablePath) {
  EXPECT_EQ(error_of([] {
              write_text_file("/nonexistent-dir/for/sure/out.json", "{}");
            }),
            ErrorCode::kIoFailure);
}

TEST(WalkthroughTest, RemovalExample) {
  const std::string text = removal_walkthrough(6, 3, 120, 6, 1);
  EXPECT_NE(text.find("Schedule (30 transmissions)"), std::string::npos);
  EXPECT_NE(text.find("X_{5,23} from node 5 = W^5_[1,23]("), std::string::npos);
  EXPECT_NE(text.find("xor W^5_[4,23]("), std::string::npos);
  EXPECT_NE(text.find("node 1 decodes W^5_[1,23]"), std::string::npos);
  EXPECT_NE(text.find("node 4 decodes W^5_[4,23]"), std::string::npos);
  EXPECT_NE(text.find("Replication restored to 3 on {1,2,3,4,5}: yes"),
            std::string::npos);
}

TEST(WalkthroughTest, AdditionExample) {
  const std::string text = addition_walkthrough(4, 2, 60, 1);
  EXPECT_NE(text.find("Addition of node 5"), std::string::npos);
  EXPECT_NE(text.find("Schedule (12 transmissions)"), std::string::npos);
  const auto node1 = text.find("  node 1:\n");
  ASSERT_NE(node1, std::string::npos);
  const auto node2 = text.find("  node 2:\n");
  ASSERT_NE(node2, std::string::npos);
  const std::string section = text.substr(node1, node2 - node1);
  EXPECT_NE(section.find("W_[1,23]("), std::string::npos);
  EXPECT_NE(section.find("W_[1,24]("), std::string::npos);
  EXPECT_NE(section.find("W_[1,34]("), std::string::npos);
  EXPECT_NE(section.find("-> node 5, deleted at node 1"), std::string::npos);
}

}  // namespace
}  // namespace codedrebal
