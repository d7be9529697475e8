#pragma once

#include <memory>
#include <vector>

#include "fedsim/dataset.hpp"
#include "fedsim/metrics.hpp"
#include "fedsim/strategy_config.hpp"
#include "fedsim/strategy_ops.hpp"

namespace fedsim {

// Everything a client worker needs for one round; built by the coordinator,
// executed without touching shared state.
struct ClientTask {
  int client_id = 0;
  int round = 0;
  int epochs = 0;
  int steps = 0;  // 0 means ceil(|train| / batch_size)
  GradModifier modifier;
  bool compute_variate = false;  // SCAFFOLD option-I variate at the global model
  bool ala_merge = false;        // FedALA: blend prev local and global first
  FlatParams ala_theta;
  FlatParams ala_prev_local;
  std::size_t ala_split_offset = 0;
  std::uint64_t rng_seed = 0;
};

struct ClientJobResult {
  ClientUpdate update;
  FlatParams new_c_local;  // SCAFFOLD
  FlatParams new_theta;    // FedALA
};

// One federated-learning algorithm: selection, per-client work and
// aggregation. The engine owns the round loop and the transport accounting;
// strategy state changes only between rounds on the coordinator thread.
class Strategy {
 public:
  virtual ~Strategy() = default;

  virtual StrategyKind kind() const = 0;

  // Whether the server ships the global model to every client each round
  // (evaluation-driven methods) or only to the selected subset.
  virtual bool broadcasts_to_all() const = 0;

  // Picks this round's training set. global_evals holds each client's
  // metrics for the current global model on its validation split.
  virtual std::vector<int> select(const std::vector<EvalMetrics>& global_evals,
                                  int round, Rng& rng) = 0;

  virtual ClientTask make_task(int client_id, int round, const FlatParams& global) = 0;

  // Client-side filter applied after training; only passing updates are
  // uploaded and aggregated.
  virtual bool contributes(const ClientUpdate&) const { return true; }

  // Called with every result of the round (sorted by client id) before
  // aggregation; commits per-client strategy state.
  virtual void observe_results(const std::vector<ClientJobResult>&, const FlatParams&) {}

  virtual FlatParams aggregate(const FlatParams& global,
                               const std::vector<ClientUpdate>& participants) = 0;

  virtual void end_round(const FlatParams&, const FlatParams&) {}
};

std::unique_ptr<Strategy> make_strategy(StrategyKind kind, const StrategyConfig& config,
                                        const Federation& federation,
                                        std::size_t param_count,
                                        std::size_t ala_split_offset);

}  // namespace fedsim
