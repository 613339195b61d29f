// Command-line driver for rebalancing experiments.
//
//   rebalance_sim --nodes 6 --replication 3 --event remove:6 --trials 30
//   rebalance_sim --nodes 4 --replication 2 --event add --format csv
//   rebalance_sim --example 1

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "codedrebal/error.hpp"
#include "codedrebal/experiment.hpp"

namespace {

using codedrebal::Error;
using codedrebal::ErrorCode;
using codedrebal::EventKind;
using codedrebal::ExperimentConfig;

// "add" or "remove:<id>".
std::optional<std::string> parse_event(const std::string& text,
                                       ExperimentConfig& config) {
  if (text == "add") {
    config.event = EventKind::kAddition;
    return std::nullopt;
  }
  const std::string prefix = "remove:";
  if (text.rfind(prefix, 0) == 0 && text.size() > prefix.size()) {
    const std::string id = text.substr(prefix.size());
    if (id.find_first_not_of("0123456789") != std::string::npos ||
        id.size() > 4) {
      return "event: node id must be a positive integer, got '" + id + "'";
    }
    config.event = EventKind::kRemoval;
    config.removed_node = static_cast<codedrebal::NodeId>(std::stoul(id));
    return std::nullopt;
  }
  return "event: expected 'add' or 'remove:<id>', got '" + text + "'";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coded data rebalancing simulator"};

  ExperimentConfig config;
  std::string event = "remove:6";
  std::optional<std::size_t> trials;
  std::string format = "json";
  std::string out_path;
  bool walkthrough = false;
  bool timing = false;
  int example = 0;
  double uniformity_tol = 0.0;
  double balance_tol = 0.0;

  app.add_option("--nodes", config.num_nodes, "Number of nodes K")
      ->capture_default_str();
  app.add_option("--replication", config.replication, "Replication factor r")
      ->capture_default_str();
  app.add_option("--bits", config.num_bits, "File size F in bits")
      ->capture_default_str();
  app.add_option("--event", event, "remove:<id> or add")->capture_default_str();
  app.add_option("--trials", trials,
                 "Trials (default 30 for removal, 100 for addition)");
  app.add_option("--seed", config.master_seed, "Master seed")
      ->capture_default_str();
  app.add_option("--format", format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  app.add_option("--out", out_path, "Write results here instead of stdout");
  auto* utol = app.add_option("--uniformity-tolerance", uniformity_tol,
                              "Max relative error for the pooled uniformity "
                              "check (default 0.02)");
  auto* btol = app.add_option("--balance-tolerance", balance_tol,
                              "Relative per-node storage tolerance "
                              "(default 0.01)");
  app.add_option("--threads", config.threads, "Worker threads")
      ->capture_default_str();
  app.add_flag("--timing", timing, "Include per-trial wall time in JSON");
  app.add_flag("--walkthrough", walkthrough,
               "Print the transmission schedule of one run instead");
  app.add_option("--example", example,
                 "1: remove node 6 from K=6, r=3; 2: add a node to K=4, r=2")
      ->check(CLI::IsMember({1, 2}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (example == 1) {
      std::cout << codedrebal::removal_walkthrough(6, 3, 120, 6,
                                                   config.master_seed);
      return 0;
    }
    if (example == 2) {
      std::cout << codedrebal::addition_walkthrough(4, 2, 60,
                                                    config.master_seed);
      return 0;
    }

    if (auto problem = parse_event(event, config)) {
      std::cerr << "config-invalid: " << *problem << "\n";
      return 2;
    }
    config.format = format == "csv" ? codedrebal::OutputFormat::kCsv
                                    : codedrebal::OutputFormat::kJson;
    config.trials = trials.value_or(config.event == EventKind::kRemoval
                                        ? codedrebal::kDefaultRemovalTrials
                                        : codedrebal::kDefaultAdditionTrials);
    if (*utol) config.uniformity_tolerance = uniformity_tol;
    if (*btol) config.balance_tolerance = balance_tol;

    if (auto issues = codedrebal::validate_config(config); !issues.empty()) {
      for (const auto& i : issues) std::cerr << "config-invalid: " << i << "\n";
      return 2;
    }

    if (walkthrough) {
      std::cout << (config.event == EventKind::kRemoval
                        ? codedrebal::removal_walkthrough(
                              config.num_nodes, config.replication,
                              config.num_bits, config.removed_node,
                              config.master_seed)
                        : codedrebal::addition_walkthrough(
                              config.num_nodes, config.replication,
                              config.num_bits, config.master_seed));
      return 0;
    }

    const auto result = codedrebal::run_experiment(config);
    const std::string text =
        codedrebal::emit_results(result, config.format, {timing});
    if (out_path.empty()) {
      std::cout << text;
    } else {
      codedrebal::write_text_file(out_path, text);
    }
    return result.uniformity_within_tolerance ? 0 : 3;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return e.code() == ErrorCode::kConfigInvalid ? 2 : 1;
  }
}
