#include "codedrebal/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>
#include <utility>

#include <json.hpp>

#include "codedrebal/addition.hpp"
#include "codedrebal/error.hpp"
#include "codedrebal/removal.hpp"

namespace codedrebal {

namespace {

double uniformity_tolerance(const ExperimentConfig& c) {
  return c.uniformity_tolerance.value_or(kDefaultUniformityTolerance);
}

double balance_tolerance(const ExperimentConfig& c) {
  return c.balance_tolerance.value_or(kDefaultBalanceTolerance);
}

std::string event_string(const ExperimentConfig& c) {
  if (c.event == EventKind::kAddition) return "add";
  return "remove:" + std::to_string(c.removed_node);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::ordered_json counts_json(const std::vector<NodeCount>& counts) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& c : counts) {
    arr.push_back({{"node", c.node}, {"bits", c.bits}});
  }
  return arr;
}

}  // namespace

std::vector<std::string> validate_config(const ExperimentConfig& c) {
  std::vector<std::string> issues;
  if (c.num_nodes < 1 || c.num_nodes > kMaxNodeId - 1) {
    issues.push_back("nodes: must be in [1, " + std::to_string(kMaxNodeId - 1) +
                     "], got " + std::to_string(c.num_nodes));
  }
  if (c.num_bits < 1 || c.num_bits > 0xffffffffULL) {
    issues.push_back("bits: must be in [1, 2^32 - 1], got " +
                     std::to_string(c.num_bits));
  }
  if (c.trials < 1) issues.push_back("trials: must be at least 1");
  if (c.event == EventKind::kRemoval) {
    if (c.replication < 2 || c.replication + 1 > c.num_nodes) {
      issues.push_back("replication: removal needs 2 <= r <= K-1, got r=" +
                       std::to_string(c.replication) +
                       " K=" + std::to_string(c.num_nodes));
    }
    if (c.removed_node < 1 || c.removed_node > c.num_nodes) {
      issues.push_back("event: removed node must be in [1, " +
                       std::to_string(c.num_nodes) + "], got " +
                       std::to_string(c.removed_node));
    }
  } else if (c.replication < 1 || c.replication > c.num_nodes) {
    issues.push_back("replication: addition needs 1 <= r <= K, got r=" +
                     std::to_string(c.replication) +
                     " K=" + std::to_string(c.num_nodes));
  }
  if (c.uniformity_tolerance && !(*c.uniformity_tolerance > 0.0)) {
    issues.push_back("uniformity tolerance: must be positive");
  }
  if (c.balance_tolerance && !(*c.balance_tolerance > 0.0)) {
    issues.push_back("balance tolerance: must be positive");
  }
  if (c.threads < 1) issues.push_back("threads: must be at least 1");
  return issues;
}

TrialResult run_trial(const ExperimentConfig& config, std::size_t index) {
  const auto start = std::chrono::steady_clock::now();
  TrialResult result;
  result.trial = index;
  result.seed = derive_trial_seed(config.master_seed, index);
  const RngSpec base{result.seed, StreamLabel::kPlacement, index};

  const Database db = build_database(config.num_nodes, config.replication,
                                     config.num_bits, base);
  result.storage_before = storage_counts(db);

  Database after;
  std::vector<NodeSet> support;
  if (config.event == EventKind::kRemoval) {
    RemovalOutcome out = apply_removal_rebalance(
        db, config.removed_node, base.with_stream(StreamLabel::kRemovalBinning));
    result.load = removal_load(out.codewords, config.num_nodes,
                               config.replication, config.num_bits);
    // Padding only adds bits: against the bits that really moved the load
    // can never drop below 1/(r-1).
    if (result.load.realized_load * (config.replication - 1) <
        1.0 - 1e-12) {
      throw Error(ErrorCode::kProtocolViolation,
                  "trial " + std::to_string(index) + " sent " +
                      std::to_string(result.load.total_transmitted_bits) +
                      " bits for " + std::to_string(result.load.moved_bits) +
                      " moved bits, below the 1/(r-1) floor");
    }
    support = subsets_of_size(out.database.nodes(), config.replication);
    after = std::move(out.database);
  } else {
    AdditionOutcome out = apply_addition_rebalance(
        db, base.with_stream(StreamLabel::kAdditionBinning));
    result.load = addition_load(out.codewords, config.num_nodes,
                                config.replication, config.num_bits);
    const NodeId joining = out.directory.new_node();
    std::uint64_t received = 0;
    for (NodeSet s : out.database.placement.node_sets) {
      if (s.contains(joining)) ++received;
    }
    if (received != result.load.total_transmitted_bits) {
      throw Error(ErrorCode::kProtocolViolation,
                  "trial " + std::to_string(index) + ": new node stores " +
                      std::to_string(received) + " bits but " +
                      std::to_string(result.load.total_transmitted_bits) +
                      " were sent");
    }
    support = subsets_of_size(out.database.nodes(), config.replication);
    after = std::move(out.database);
  }

  const BalanceReport balance =
      verify_r_balanced(after, balance_tolerance(config));
  if (!balance.replication_ok) {
    throw Error(ErrorCode::kProtocolViolation,
                "trial " + std::to_string(index) + ": " +
                    std::to_string(balance.replication_violations) +
                    " bits without exactly r live holders");
  }
  result.storage_after = balance.node_counts;
  result.distribution = uniformity_check(after.placement.node_sets, support);
  result.wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  if (auto issues = validate_config(config); !issues.empty()) {
    std::string msg;
    for (const auto& i : issues) msg += (msg.empty() ? "" : "; ") + i;
    throw Error(ErrorCode::kConfigInvalid, msg);
  }

  ExperimentResult res;
  res.config = config;
  res.trials.resize(config.trials);
  std::vector<std::exception_ptr> failures(config.trials);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < config.trials; i = next++) {
      try {
        res.trials[i] = run_trial(config, i);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(config.threads, config.trials));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    for (unsigned w = 0; w < workers; ++w) threads.emplace_back(worker);
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  double sum = 0.0;
  for (const auto& t : res.trials) sum += t.load.measured_load;
  const auto n = static_cast<double>(res.trials.size());
  res.mean_load = sum / n;
  if (res.trials.size() > 1) {
    double sq = 0.0;
    for (const auto& t : res.trials) {
      sq += (t.load.measured_load - res.mean_load) *
            (t.load.measured_load - res.mean_load);
    }
    res.std_load = std::sqrt(sq / (n - 1.0));
  }
  res.theoretical_asymptote = res.trials.front().load.theoretical_asymptote;
  res.bound = res.trials.front().load.finite_bound.value_or(1.0);

  std::vector<DistributionCheck> checks;
  checks.reserve(res.trials.size());
  for (const auto& t : res.trials) checks.push_back(t.distribution);
  res.pooled_uniformity = pool(checks);
  res.uniformity_within_tolerance =
      res.pooled_uniformity.max_relative_error <= uniformity_tolerance(config);
  return res;
}

std::string emit_results(const ExperimentResult& result, OutputFormat format,
                         EmitOptions options) {
  if (format == OutputFormat::kCsv) {
    std::ostringstream os;
    os << "trial,seed,total_bits,num_codewords,load,max_rel_err\n";
    for (const auto& t : result.trials) {
      os << t.trial << ',' << t.seed << ',' << t.load.total_transmitted_bits
         << ',' << t.load.num_codewords << ','
         << format_double(t.load.measured_load) << ','
         << format_double(t.distribution.max_relative_error) << '\n';
    }
    return os.str();
  }

  using nlohmann::ordered_json;
  const auto& c = result.config;
  ordered_json doc;
  doc["config"] = {
      {"nodes", c.num_nodes},
      {"replication", c.replication},
      {"bits", c.num_bits},
      {"event", event_string(c)},
      {"trials", c.trials},
      {"seed", c.master_seed},
      {"uniformity_tolerance", uniformity_tolerance(c)},
      {"balance_tolerance", balance_tolerance(c)},
  };

  auto trials = ordered_json::array();
  for (const auto& t : result.trials) {
    ordered_json row = {
        {"trial", t.trial},
        {"seed", t.seed},
        {"total_bits", t.load.total_transmitted_bits},
        {"num_codewords", t.load.num_codewords},
        {"normalizer", t.load.normalizer},
        {"load", t.load.measured_load},
        {"moved_bits", t.load.moved_bits},
        {"realized_load", t.load.realized_load},
        {"metadata_bits", t.load.metadata_bits},
        {"max_rel_err", t.distribution.max_relative_error},
        {"chi_square", t.distribution.chi_square},
        {"storage_before", counts_json(t.storage_before)},
        {"storage_after", counts_json(t.storage_after)},
    };
    if (options.include_timing) row["wall_ms"] = t.wall_ms;
    trials.push_back(std::move(row));
  }
  doc["trials"] = std::move(trials);

  const auto& u = result.pooled_uniformity;
  doc["summary"] = {
      {"mean_load", result.mean_load},
      {"std_load", result.std_load},
      {"theoretical_asymptote", result.theoretical_asymptote},
      {"bound", result.bound},
      {"uniformity",
       {{"max_rel_err", u.max_relative_error},
        {"chi_square", u.chi_square},
        {"degrees_of_freedom", u.degrees_of_freedom},
        {"within_tolerance", result.uniformity_within_tolerance}}},
  };
  return doc.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kIoFailure, "cannot open " + path + " for writing");
  }
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::kIoFailure, "failed writing " + path);
}

std::string removal_walkthrough(unsigned num_nodes, unsigned replication,
                                std::uint64_t num_bits, NodeId removed,
                                std::uint64_t seed) {
  const RngSpec spec{seed, StreamLabel::kPlacement, 0};
  const Database db = build_database(num_nodes, replication, num_bits, spec);
  const RemovalOutcome out = apply_removal_rebalance(
      db, removed, spec.with_stream(StreamLabel::kRemovalBinning));

  std::ostringstream os;
  os << "Removal of node " << removed << ": K=" << num_nodes
     << " r=" << replication << " F=" << num_bits << " seed=" << seed << "\n";
  os << "Node " << removed << " stored " << out.directory.num_assigned()
     << " bits in classes:";
  for_each_subset(db.nodes().without(removed), num_nodes - replication,
                  [&](NodeSet m) {
                    os << " W_" << m.label() << "("
                       << exclusive_group(db, m).size() << ")";
                  });
  os << "\n\nSchedule (" << out.codewords.size() << " transmissions):\n";
  for (const auto& cw : out.codewords) {
    os << "  X_{" << cw.sender << ","
       << (cw.group.empty() ? std::string("-") : cw.group.label())
       << "} from node " << cw.sender << " = ";
    for (std::size_t i = 0; i < cw.constituents.size(); ++i) {
      const auto& c = cw.constituents[i];
      os << (i ? " xor " : "") << c.label.to_string() << "(" << c.length
         << ")";
    }
    os << " -> " << cw.length() << " bits;";
    for (const auto& c : cw.constituents) {
      os << " node " << c.label.target << " decodes "
         << c.label.to_string() << ";";
    }
    os << "\n";
  }

  const LoadReport load =
      removal_load(out.codewords, num_nodes, replication, num_bits);
  const BalanceReport bal = verify_r_balanced(out.database, 1.0);
  os << "\nTransmitted " << load.total_transmitted_bits << " bits for "
     << load.moved_bits << " moved bits; load "
     << format_double(load.measured_load) << " (asymptote "
     << format_double(load.theoretical_asymptote) << ")\n";
  os << "Replication restored to " << replication << " on "
     << out.database.nodes().to_string() << ": "
     << (bal.replication_ok ? "yes" : "NO") << "\n";
  return os.str();
}

std::string addition_walkthrough(unsigned num_nodes, unsigned replication,
                                 std::uint64_t num_bits, std::uint64_t seed) {
  const RngSpec spec{seed, StreamLabel::kPlacement, 0};
  const Database db = build_database(num_nodes, replication, num_bits, spec);
  const AdditionOutcome out = apply_addition_rebalance(
      db, spec.with_stream(StreamLabel::kAdditionBinning));
  const NodeId joining = out.directory.new_node();

  std::ostringstream os;
  os << "Addition of node " << joining << ": K=" << num_nodes
     << " r=" << replication << " F=" << num_bits << " seed=" << seed << "\n";
  os << "\nSchedule (" << out.codewords.size() << " transmissions):\n";
  NodeId last_sender = 0;
  for (const auto& cw : out.codewords) {
    if (cw.sender != last_sender) {
      os << "  node " << cw.sender << ":\n";
      last_sender = cw.sender;
    }
    const auto& c = cw.constituents.front();
    os << "    " << c.label.to_string() << "(" << c.length << ") -> node "
       << joining << ", deleted at node " << cw.sender << "\n";
  }

  const LoadReport load =
      addition_load(out.codewords, num_nodes, replication, num_bits);
  const BalanceReport bal = verify_r_balanced(out.database, 1.0);
  os << "\nTransmitted " << load.total_transmitted_bits << " bits; load "
     << format_double(load.measured_load) << " (asymptote 1)\n";
  os << "Replication kept at " << replication << " on "
     << out.database.nodes().to_string() << ": "
     << (bal.replication_ok ? "yes" : "NO") << "\n";
  return os.str();
}

}  // namespace codedrebal
