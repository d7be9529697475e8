#pragma once

#include <array>
#include <stdexcept>
#include <string>

namespace fedsim {

enum class StrategyKind { kFedAvg, kFedProx, kScaffold, kFedAla, kDafl, kFedSbs, kFlad };

constexpr std::array<StrategyKind, 7> kAllStrategies = {
    StrategyKind::kFedAvg, StrategyKind::kFedProx, StrategyKind::kScaffold,
    StrategyKind::kFedAla, StrategyKind::kDafl,    StrategyKind::kFedSbs,
    StrategyKind::kFlad};

std::string strategy_name(StrategyKind kind);
StrategyKind strategy_from_name(const std::string& name);

// Hyperparameters for all seven algorithms. Defaults reproduce the reference
// configuration: half the federation per round, one local epoch, batches of
// 1024 at learning rate 0.1, and the per-algorithm knobs listed below.
struct StrategyConfig {
  double selection_ratio = 0.5;
  int local_epochs = 1;
  int batch_size = 1024;
  double local_lr = 0.1;

  double prox_lambda = 1.0;  // FedProx regularisation weight
  double global_lr = 1.0;    // SCAFFOLD / FedSBS server-side scale

  int ala_layers = 1;          // FedALA: top layers blended adaptively
  double ala_theta_lr = 1.0;   // FedALA: learning rate for the blend weights

  double dafl_beta = 0.6;  // DAFL accuracy threshold

  double sbs_lambda = 1.0;  // FedSBS regularisation weight
  double sbs_epsilon_min = 0.1;
  double sbs_epsilon_init = 1.0;
  double sbs_epsilon_decay = 0.97;   // per-round multiplicative decay
  double sbs_penalty_tau = 10.0;     // over-participation damping temperature
  int sbs_clients_per_round = 6;

  int flad_patience = 25;
  int flad_min_epochs = 1;
  int flad_max_epochs = 5;
  int flad_min_steps = 1;
  int flad_max_steps = 1000;

  void validate() const {
    if (selection_ratio <= 0.0 || selection_ratio > 1.0) {
      throw std::invalid_argument("selection_ratio must be in (0, 1]");
    }
    if (local_epochs < 0) throw std::invalid_argument("local_epochs must be >= 0");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (prox_lambda < 0.0) throw std::invalid_argument("prox_lambda must be >= 0");
    if (ala_layers < 1) throw std::invalid_argument("ala_layers must be >= 1");
    if (dafl_beta < 0.0 || dafl_beta > 1.0) {
      throw std::invalid_argument("dafl_beta must be in [0, 1]");
    }
    if (sbs_epsilon_min < 0.0 || sbs_epsilon_init < sbs_epsilon_min ||
        sbs_epsilon_init > 1.0) {
      throw std::invalid_argument("epsilon range must satisfy 0 <= min <= init <= 1");
    }
    if (sbs_clients_per_round < 1) {
      throw std::invalid_argument("sbs_clients_per_round must be >= 1");
    }
    if (flad_patience < 1) throw std::invalid_argument("flad_patience must be >= 1");
    if (flad_min_epochs < 0 || flad_max_epochs < flad_min_epochs ||
        flad_min_steps < 1 || flad_max_steps < flad_min_steps) {
      throw std::invalid_argument("flad epoch/step ranges are inverted");
    }
  }
};

// JSON round trip for config files; keys mirror the field names and partial
// documents override only the fields they mention.
std::string config_to_json(const StrategyConfig& config);
StrategyConfig config_from_json(const std::string& text, StrategyConfig base = {});

}  // namespace fedsim
