#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedsim/dataset.hpp"
#include "fedsim/ledger.hpp"
#include "fedsim/metrics.hpp"
#include "fedsim/strategies.hpp"
#include "fedsim/strategy_config.hpp"

namespace fedsim {

struct ClientRoundRecord {
  bool selected = false;      // trained this round
  bool participated = false;  // update reached the aggregation
  int num_updates = 0;
  std::uint64_t bytes_down = 0;
  std::uint64_t bytes_up = 0;
  double val_f1 = 0.0;        // of the aggregated global model, on val
  double val_accuracy = 0.0;
  double val_loss = 0.0;
};

struct RoundRecord {
  int round = 0;
  std::vector<int> selected;
  std::vector<ClientRoundRecord> clients;
  std::uint64_t work_units = 0;  // sum of mu_i * batch_size
  std::uint64_t model_hash = 0;  // post-aggregation snapshot
  bool aggregated = true;        // false when no update passed the filter
};

struct ExperimentResult {
  std::string strategy;
  StrategyConfig config;
  std::uint64_t seed = 0;
  int rounds_executed = 0;
  std::vector<RoundRecord> rounds;
  TransportLedger ledger;
  FlatParams final_model;
  std::uint64_t initial_model_hash = 0;
  std::vector<std::string> client_names;
  std::vector<EvalMetrics> test_metrics;  // final model on each test split
  std::string stop_reason;                // "round_cap" or "flad_patience"
  int best_round = -1;                    // FLAD: round whose snapshot was restored
};

struct RunOptions {
  std::uint64_t seed = 0;
  int round_cap = 0;  // must be >= 1; FLAD may stop earlier on patience
  int threads = 1;
};

// Runs the full federated process: per round, evaluate-select-train-
// aggregate with every transfer passing through the byte ledger. Identical
// inputs produce identical results for any worker count.
ExperimentResult run_federation(const Federation& federation, StrategyKind kind,
                                const StrategyConfig& config, const RunOptions& options);

// The comparison protocol: FLAD first, then every other strategy for exactly
// as many rounds as FLAD executed, all from the same initial model.
std::vector<ExperimentResult> run_comparison(const Federation& federation,
                                             const StrategyConfig& config,
                                             const RunOptions& options);

}  // namespace fedsim
