#include "fedsim/strategies.hpp"

#include <algorithm>
#include <stdexcept>

namespace fedsim {

namespace {

class RandomSelectionStrategy : public Strategy {
 public:
  RandomSelectionStrategy(const StrategyConfig& config, std::size_t num_clients)
      : config_(config), num_clients_(static_cast<int>(num_clients)) {}

  bool broadcasts_to_all() const override { return false; }

  std::vector<int> select(const std::vector<EvalMetrics>&, int, Rng& rng) override {
    return random_select(num_clients_, config_.selection_ratio, rng);
  }

  ClientTask make_task(int client_id, int round, const FlatParams&) override {
    ClientTask task;
    task.client_id = client_id;
    task.round = round;
    task.epochs = config_.local_epochs;
    task.steps = 0;
    return task;
  }

  FlatParams aggregate(const FlatParams& global,
                       const std::vector<ClientUpdate>& participants) override {
    return fedavg_aggregate(global, participants);
  }

 protected:
  StrategyConfig config_;
  int num_clients_;
};

class FedAvgStrategy final : public RandomSelectionStrategy {
 public:
  using RandomSelectionStrategy::RandomSelectionStrategy;
  StrategyKind kind() const override { return StrategyKind::kFedAvg; }
};

class FedProxStrategy final : public RandomSelectionStrategy {
 public:
  using RandomSelectionStrategy::RandomSelectionStrategy;
  StrategyKind kind() const override { return StrategyKind::kFedProx; }

  ClientTask make_task(int client_id, int round, const FlatParams& global) override {
    ClientTask task = RandomSelectionStrategy::make_task(client_id, round, global);
    task.modifier = fedprox_modifier(global, config_.prox_lambda);
    return task;
  }
};

class ScaffoldStrategy final : public RandomSelectionStrategy {
 public:
  ScaffoldStrategy(const StrategyConfig& config, std::size_t num_clients,
                   std::size_t param_count)
      : RandomSelectionStrategy(config, num_clients),
        state_(num_clients, param_count) {}

  StrategyKind kind() const override { return StrategyKind::kScaffold; }

  ClientTask make_task(int client_id, int round, const FlatParams& global) override {
    ClientTask task = RandomSelectionStrategy::make_task(client_id, round, global);
    task.modifier = scaffold_modifier(state_, client_id);
    task.compute_variate = true;
    return task;
  }

  void observe_results(const std::vector<ClientJobResult>& results,
                       const FlatParams&) override {
    deltas_.clear();
    for (const auto& r : results) {
      const auto id = static_cast<std::size_t>(r.update.client_id);
      FlatParams delta = r.new_c_local;
      delta -= state_.c_local[id];
      deltas_.push_back(delta);
      state_.c_local[id] = r.new_c_local;
    }
  }

  FlatParams aggregate(const FlatParams& global,
                       const std::vector<ClientUpdate>& participants) override {
    return scaffold_aggregate(global, participants, config_.global_lr);
  }

  void end_round(const FlatParams&, const FlatParams&) override {
    state_.c_global = scaffold_update_global_variate(
        state_.c_global, deltas_, static_cast<std::size_t>(num_clients_));
    deltas_.clear();
  }

 private:
  ScaffoldState state_;
  std::vector<FlatParams> deltas_;
};

class FedAlaStrategy final : public RandomSelectionStrategy {
 public:
  FedAlaStrategy(const StrategyConfig& config, std::size_t num_clients,
                 std::size_t param_count, std::size_t split_offset)
      : RandomSelectionStrategy(config, num_clients), split_offset_(split_offset) {
    AlaClientState init;
    init.theta = FlatParams(param_count - split_offset, 1.0);
    clients_.assign(num_clients, init);
  }

  StrategyKind kind() const override { return StrategyKind::kFedAla; }

  ClientTask make_task(int client_id, int round, const FlatParams& global) override {
    ClientTask task = RandomSelectionStrategy::make_task(client_id, round, global);
    const auto& state = clients_[static_cast<std::size_t>(client_id)];
    task.ala_merge = !state.prev_local.empty();
    task.ala_theta = state.theta;
    task.ala_prev_local = state.prev_local;
    task.ala_split_offset = split_offset_;
    return task;
  }

  void observe_results(const std::vector<ClientJobResult>& results,
                       const FlatParams&) override {
    for (const auto& r : results) {
      auto& state = clients_[static_cast<std::size_t>(r.update.client_id)];
      if (!r.new_theta.empty()) state.theta = r.new_theta;
      state.prev_local = r.update.params;
    }
  }

 private:
  std::size_t split_offset_;
  std::vector<AlaClientState> clients_;
};

class DaflStrategy final : public Strategy {
 public:
  DaflStrategy(const StrategyConfig& config, std::size_t num_clients)
      : config_(config), num_clients_(static_cast<int>(num_clients)) {}

  StrategyKind kind() const override { return StrategyKind::kDafl; }
  bool broadcasts_to_all() const override { return true; }

  // Every client trains every round; the threshold filter runs client-side
  // after training.
  std::vector<int> select(const std::vector<EvalMetrics>&, int, Rng&) override {
    std::vector<int> all(static_cast<std::size_t>(num_clients_));
    for (int i = 0; i < num_clients_; ++i) all[static_cast<std::size_t>(i)] = i;
    return all;
  }

  ClientTask make_task(int client_id, int round, const FlatParams&) override {
    ClientTask task;
    task.client_id = client_id;
    task.round = round;
    task.epochs = config_.local_epochs;
    return task;
  }

  bool contributes(const ClientUpdate& update) const override {
    return dafl_filter(update.local_val_accuracy, config_.dafl_beta);
  }

  FlatParams aggregate(const FlatParams&,
                       const std::vector<ClientUpdate>& participants) override {
    return dafl_aggregate(participants);
  }

 private:
  StrategyConfig config_;
  int num_clients_;
};

class FedSbsStrategy final : public Strategy {
 public:
  FedSbsStrategy(const StrategyConfig& config, const Federation& federation)
      : config_(config) {
    state_.epsilon = config.sbs_epsilon_init;
    state_.selection_counts.assign(federation.size(), 0);
    state_.ig_scores.assign(federation.size(), 0.0);
    local_val_loss_.assign(federation.size(), -1.0);  // -1: never trained
    for (const auto& client : federation) {
      proportions_.push_back(client.class_proportions);
    }
  }

  StrategyKind kind() const override { return StrategyKind::kFedSbs; }
  bool broadcasts_to_all() const override { return true; }

  std::vector<int> select(const std::vector<EvalMetrics>& global_evals, int,
                          Rng& rng) override {
    for (std::size_t i = 0; i < global_evals.size(); ++i) {
      const double global_loss = global_evals[i].mean_loss;
      // A client that has never trained still holds the model it last
      // received, so its local loss is the global one.
      const double local_loss =
          local_val_loss_[i] >= 0.0 ? local_val_loss_[i] : global_loss;
      const double phi = sbs_imbalance(proportions_[i], local_loss);
      state_.ig_scores[i] = sbs_information_gain(global_loss, local_loss, phi);
    }
    return sbs_select(state_, state_.ig_scores, config_.sbs_clients_per_round,
                      config_.sbs_penalty_tau, rng);
  }

  ClientTask make_task(int client_id, int round, const FlatParams& global) override {
    ClientTask task;
    task.client_id = client_id;
    task.round = round;
    task.epochs = config_.local_epochs;
    task.modifier = sbs_modifier(global, state_.prev_global, config_.sbs_lambda);
    return task;
  }

  void observe_results(const std::vector<ClientJobResult>& results,
                       const FlatParams&) override {
    for (const auto& r : results) {
      local_val_loss_[static_cast<std::size_t>(r.update.client_id)] =
          r.update.local_val_loss;
    }
  }

  FlatParams aggregate(const FlatParams& global,
                       const std::vector<ClientUpdate>& participants) override {
    return sbs_aggregate(global, state_.prev_global, participants, config_.global_lr);
  }

  void end_round(const FlatParams& old_global, const FlatParams&) override {
    state_.prev_global = old_global;
    state_.epsilon =
        std::max(config_.sbs_epsilon_min, state_.epsilon * config_.sbs_epsilon_decay);
  }

 private:
  StrategyConfig config_;
  SbsState state_;
  std::vector<double> local_val_loss_;
  std::vector<std::vector<double>> proportions_;
};

class FladStrategy final : public Strategy {
 public:
  FladStrategy(const StrategyConfig& config, std::size_t num_clients)
      : config_(config), directives_(num_clients) {}

  StrategyKind kind() const override { return StrategyKind::kFlad; }
  bool broadcasts_to_all() const override { return true; }

  std::vector<int> select(const std::vector<EvalMetrics>& global_evals, int,
                          Rng&) override {
    std::vector<double> accuracies;
    accuracies.reserve(global_evals.size());
    for (const auto& m : global_evals) accuracies.push_back(m.accuracy);
    directives_ = flad_assign_work(accuracies, config_.flad_min_epochs,
                                   config_.flad_max_epochs, config_.flad_min_steps,
                                   config_.flad_max_steps);
    std::vector<int> selected;
    for (std::size_t i = 0; i < directives_.size(); ++i) {
      if (directives_[i].selected) selected.push_back(static_cast<int>(i));
    }
    return selected;
  }

  ClientTask make_task(int client_id, int round, const FlatParams&) override {
    const auto& d = directives_[static_cast<std::size_t>(client_id)];
    ClientTask task;
    task.client_id = client_id;
    task.round = round;
    task.epochs = d.epochs;
    task.steps = d.steps;
    return task;
  }

  FlatParams aggregate(const FlatParams&,
                       const std::vector<ClientUpdate>& participants) override {
    return flad_aggregate(participants);
  }

 private:
  StrategyConfig config_;
  std::vector<FladDirective> directives_;
};

}  // namespace

std::unique_ptr<Strategy> make_strategy(StrategyKind kind, const StrategyConfig& config,
                                        const Federation& federation,
                                        std::size_t param_count,
                                        std::size_t ala_split) {
  config.validate();
  const std::size_t n = federation.size();
  switch (kind) {
    case StrategyKind::kFedAvg:
      return std::make_unique<FedAvgStrategy>(config, n);
    case StrategyKind::kFedProx:
      return std::make_unique<FedProxStrategy>(config, n);
    case StrategyKind::kScaffold:
      return std::make_unique<ScaffoldStrategy>(config, n, param_count);
    case StrategyKind::kFedAla:
      return std::make_unique<FedAlaStrategy>(config, n, param_count, ala_split);
    case StrategyKind::kDafl:
      return std::make_unique<DaflStrategy>(config, n);
    case StrategyKind::kFedSbs:
      return std::make_unique<FedSbsStrategy>(config, federation);
    case StrategyKind::kFlad:
      return std::make_unique<FladStrategy>(config, n);
  }
  throw std::invalid_argument("make_strategy: unknown kind");
}

}  // namespace fedsim
