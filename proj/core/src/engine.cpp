#include "fedsim/engine.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "fedsim/log.hpp"
#include "fedsim/model.hpp"
#include "fedsim/thread_pool.hpp"
#include "fedsim/train.hpp"
#include "fedsim/wire.hpp"

namespace fedsim {

namespace {

constexpr std::uint64_t kSelectStream = 0x73656c656374ULL;
constexpr std::uint64_t kClientStream = 0x636c696a6f62ULL;

// Runs one client's round: optional ALA blend, optional variate at the
// received model, local MBGD, then validation of the trained model.
ClientJobResult run_client_task(const ClientTask& task, const ClientDataset& data,
                                const FlatParams& global, const MlpModel& arch,
                                const StrategyConfig& config) {
  Rng rng(task.rng_seed);
  ClientJobResult result;
  result.update.client_id = task.client_id;
  result.update.num_train_samples = data.train.size();

  MlpModel model = arch;
  FlatParams start = global;

  if (task.ala_merge) {
    unflatten(global, model);
    result.new_theta = fedala_train_theta(
        model, data.train, task.ala_prev_local, global, task.ala_theta,
        task.ala_split_offset, config.ala_theta_lr, config.batch_size, task.round, rng);
    start = fedala_merge(task.ala_prev_local, global, result.new_theta,
                         task.ala_split_offset);
  }

  if (task.compute_variate) {
    unflatten(global, model);
    result.new_c_local = scaffold_local_variate(model, data.train);
  }

  unflatten(start, model);
  const int steps = task.steps > 0
                        ? task.steps
                        : default_steps_per_epoch(data.train.size(), config.batch_size);
  TrainResult trained = mbgd_train(model, data.train, task.epochs, steps,
                                   config.batch_size, config.local_lr, task.modifier, rng);
  result.update.num_updates = trained.num_updates;
  result.update.params = flatten(trained.model);

  const EvalMetrics local = evaluate(trained.model, data.val);
  result.update.local_val_accuracy = local.accuracy;
  result.update.local_val_loss = local.mean_loss;
  return result;
}

std::vector<EvalMetrics> evaluate_all(const Federation& federation, const MlpModel& arch,
                                      const FlatParams& global, int threads) {
  std::vector<EvalMetrics> evals(federation.size());
  parallel_for(federation.size(), threads, [&](std::size_t i) {
    MlpModel model = arch;
    unflatten(global, model);
    evals[i] = evaluate(model, federation[i].val);
  });
  return evals;
}

double mean_accuracy(const std::vector<EvalMetrics>& evals) {
  double sum = 0.0;
  for (const auto& m : evals) sum += m.accuracy;
  return sum / static_cast<double>(evals.size());
}

}  // namespace

ExperimentResult run_federation(const Federation& federation, StrategyKind kind,
                                const StrategyConfig& config, const RunOptions& options) {
  if (federation.empty()) throw std::invalid_argument("run_federation: no clients");
  if (options.round_cap < 1) {
    throw std::invalid_argument("run_federation: round_cap must be >= 1");
  }
  config.validate();

  const std::size_t n = federation.size();
  const MlpModel arch = init_model(options.seed);
  FlatParams global = flatten(arch);
  const std::size_t model_bytes = serialized_size(global.size());
  const std::size_t ala_split = ala_split_offset(arch, config.ala_layers);

  std::unique_ptr<Strategy> strategy =
      make_strategy(kind, config, federation, global.size(), ala_split);
  const bool is_flad = kind == StrategyKind::kFlad;
  const bool is_scaffold = kind == StrategyKind::kScaffold;
  const bool is_dafl = kind == StrategyKind::kDafl;
  const bool is_sbs = kind == StrategyKind::kFedSbs;

  ExperimentResult result;
  result.strategy = strategy_name(kind);
  result.config = config;
  result.seed = options.seed;
  result.ledger = TransportLedger(n);
  result.initial_model_hash = params_hash(global);
  for (const auto& client : federation) result.client_names.push_back(client.attack_name);

  Rng selection_rng(mix_seed({options.seed, kSelectStream}));

  // Metrics of the current global model on every validation split; the
  // initial model is the baseline for FLAD's improvement tracking.
  std::vector<EvalMetrics> evals = evaluate_all(federation, arch, global, options.threads);
  FladStopTracker stop_tracker(config.flad_patience);
  FlatParams best_model = global;
  int best_round = -1;
  if (is_flad) stop_tracker.observe(mean_accuracy(evals));

  result.stop_reason = "round_cap";

  for (int round = 0; round < options.round_cap; ++round) {
    RoundRecord record;
    record.round = round;
    record.clients.resize(n);

    const std::vector<int> selected = strategy->select(evals, round, selection_rng);
    record.selected = selected;
    for (int id : selected) record.clients[static_cast<std::size_t>(id)].selected = true;

    auto charge = [&](int client, Direction dir, PayloadKind kind_, std::uint64_t bytes) {
      result.ledger.account(client, dir, kind_, bytes);
      auto& c = record.clients[static_cast<std::size_t>(client)];
      (dir == Direction::kDown ? c.bytes_down : c.bytes_up) += bytes;
    };

    // Phase 1+2: global model distribution. Evaluation-driven methods ship
    // to everyone; the rest only to the selected subset.
    if (strategy->broadcasts_to_all()) {
      for (std::size_t c = 0; c < n; ++c) {
        charge(static_cast<int>(c), Direction::kDown, PayloadKind::kGlobalModel,
               model_bytes);
      }
    } else {
      for (int id : selected) {
        charge(id, Direction::kDown, PayloadKind::kGlobalModel, model_bytes);
      }
    }
    if (is_sbs) {
      // The evaluation broadcast above reaches everyone; the selected
      // clients receive a separate training copy on top of it.
      for (int id : selected) {
        charge(id, Direction::kDown, PayloadKind::kGlobalModel, model_bytes);
      }
    }
    if (is_scaffold) {
      for (int id : selected) {
        charge(id, Direction::kDown, PayloadKind::kControlVariate, model_bytes);
      }
    }
    if (is_flad) {
      for (std::size_t c = 0; c < n; ++c) {
        charge(static_cast<int>(c), Direction::kUp, PayloadKind::kScalarReport,
               kScalarReportBytes);  // accuracy of the received model
      }
      for (int id : selected) {
        charge(id, Direction::kDown, PayloadKind::kDirective, kDirectiveBytes);
      }
    }
    if (is_sbs) {
      for (std::size_t c = 0; c < n; ++c) {
        charge(static_cast<int>(c), Direction::kUp, PayloadKind::kScalarReport,
               2 * kScalarReportBytes);  // global and local validation losses
      }
    }

    // Phase 3: local training, one independent job per selected client.
    std::vector<ClientTask> tasks;
    tasks.reserve(selected.size());
    for (int id : selected) {
      ClientTask task = strategy->make_task(id, round, global);
      task.rng_seed = mix_seed({options.seed, kClientStream,
                                static_cast<std::uint64_t>(round),
                                static_cast<std::uint64_t>(id)});
      tasks.push_back(std::move(task));
    }
    std::vector<ClientJobResult> job_results(tasks.size());
    parallel_for(tasks.size(), options.threads, [&](std::size_t i) {
      job_results[i] = run_client_task(
          tasks[i], federation[static_cast<std::size_t>(tasks[i].client_id)], global,
          arch, config);
    });

    // Phase 4: uploads. Only updates passing the client-side filter travel.
    std::vector<ClientUpdate> participants;
    std::uint64_t work_units = 0;
    for (auto& job : job_results) {
      ClientUpdate& update = job.update;
      update.global_val_loss = evals[static_cast<std::size_t>(update.client_id)].mean_loss;
      auto& c = record.clients[static_cast<std::size_t>(update.client_id)];
      c.num_updates = update.num_updates;
      work_units += static_cast<std::uint64_t>(update.num_updates) *
                    static_cast<std::uint64_t>(config.batch_size);
      update.participated = strategy->contributes(update);
      if (!update.participated) continue;
      c.participated = true;
      charge(update.client_id, Direction::kUp, PayloadKind::kLocalModel, model_bytes);
      if (is_scaffold) {
        charge(update.client_id, Direction::kUp, PayloadKind::kControlVariate,
               model_bytes);
      }
      if (is_dafl) {
        charge(update.client_id, Direction::kUp, PayloadKind::kScalarReport,
               2 * kScalarReportBytes);  // accuracy and sample count
      }
      participants.push_back(update);
    }
    record.work_units = work_units;

    strategy->observe_results(job_results, global);

    // Phase 5: aggregation. A round with no surviving update keeps the
    // previous global model.
    FlatParams next_global;
    if (!participants.empty()) {
      next_global = strategy->aggregate(global, participants);
    } else {
      next_global = global;
      record.aggregated = false;
      if (selected.empty()) {
        // Normal for FLAD once every client sits at the top accuracy.
        log_debug(result.strategy + ": round " + std::to_string(round) +
                  " selected no clients; keeping the global model");
      } else {
        log_warn(result.strategy + ": round " + std::to_string(round) +
                 " had no participating update; keeping the global model");
      }
    }
    strategy->end_round(global, next_global);
    global = std::move(next_global);

    evals = evaluate_all(federation, arch, global, options.threads);
    for (std::size_t c = 0; c < n; ++c) {
      record.clients[c].val_f1 = evals[c].f1;
      record.clients[c].val_accuracy = evals[c].accuracy;
      record.clients[c].val_loss = evals[c].mean_loss;
    }
    record.model_hash = params_hash(global);
    result.rounds.push_back(std::move(record));

    if (is_flad) {
      const double acc = mean_accuracy(evals);
      const bool stop = stop_tracker.observe(acc);
      if (stop_tracker.rounds_since_improvement() == 0) {
        best_model = global;
        best_round = round;
      }
      if (stop) {
        result.stop_reason = "flad_patience";
        break;
      }
    }
  }

  result.rounds_executed = static_cast<int>(result.rounds.size());

  if (is_flad) {
    // Deploy the snapshot with the best mean validation accuracy.
    global = best_model;
    result.best_round = best_round;
  }
  result.final_model = global;

  result.test_metrics.resize(n);
  MlpModel final_model = arch;
  unflatten(global, final_model);
  parallel_for(n, options.threads, [&](std::size_t i) {
    result.test_metrics[i] = evaluate(final_model, federation[i].test);
  });
  return result;
}

std::vector<ExperimentResult> run_comparison(const Federation& federation,
                                             const StrategyConfig& config,
                                             const RunOptions& options) {
  std::vector<ExperimentResult> results;
  ExperimentResult flad = run_federation(federation, StrategyKind::kFlad, config, options);
  const int rounds = flad.rounds_executed;
  log_info("flad ran " + std::to_string(rounds) + " rounds (" + flad.stop_reason +
           "); reusing that cap for the other strategies");

  for (StrategyKind kind : kAllStrategies) {
    if (kind == StrategyKind::kFlad) continue;
    RunOptions other = options;
    other.round_cap = rounds;
    results.push_back(run_federation(federation, kind, config, other));
  }
  results.push_back(std::move(flad));
  return results;
}

}  // namespace fedsim
