#include "fedsim/strategy_config.hpp"

#include <nlohmann/json.hpp>

namespace fedsim {

std::string strategy_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kFedAvg: return "fedavg";
    case StrategyKind::kFedProx: return "fedprox";
    case StrategyKind::kScaffold: return "scaffold";
    case StrategyKind::kFedAla: return "fedala";
    case StrategyKind::kDafl: return "dafl";
    case StrategyKind::kFedSbs: return "fedsbs";
    case StrategyKind::kFlad: return "flad";
  }
  return "unknown";
}

StrategyKind strategy_from_name(const std::string& name) {
  for (StrategyKind kind : kAllStrategies) {
    if (strategy_name(kind) == name) return kind;
  }
  throw std::invalid_argument("unknown strategy '" + name +
                              "' (expected one of fedavg, fedprox, scaffold, fedala, "
                              "dafl, fedsbs, flad)");
}

namespace {

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

std::string config_to_json(const StrategyConfig& c) {
  nlohmann::json j;
  j["selection_ratio"] = c.selection_ratio;
  j["local_epochs"] = c.local_epochs;
  j["batch_size"] = c.batch_size;
  j["local_lr"] = c.local_lr;
  j["prox_lambda"] = c.prox_lambda;
  j["global_lr"] = c.global_lr;
  j["ala_layers"] = c.ala_layers;
  j["ala_theta_lr"] = c.ala_theta_lr;
  j["dafl_beta"] = c.dafl_beta;
  j["sbs_lambda"] = c.sbs_lambda;
  j["sbs_epsilon_min"] = c.sbs_epsilon_min;
  j["sbs_epsilon_init"] = c.sbs_epsilon_init;
  j["sbs_epsilon_decay"] = c.sbs_epsilon_decay;
  j["sbs_penalty_tau"] = c.sbs_penalty_tau;
  j["sbs_clients_per_round"] = c.sbs_clients_per_round;
  j["flad_patience"] = c.flad_patience;
  j["flad_min_epochs"] = c.flad_min_epochs;
  j["flad_max_epochs"] = c.flad_max_epochs;
  j["flad_min_steps"] = c.flad_min_steps;
  j["flad_max_steps"] = c.flad_max_steps;
  return j.dump(2);
}

StrategyConfig config_from_json(const std::string& text, StrategyConfig base) {
  const nlohmann::json j = nlohmann::json::parse(text);
  read(j, "selection_ratio", base.selection_ratio);
  read(j, "local_epochs", base.local_epochs);
  read(j, "batch_size", base.batch_size);
  read(j, "local_lr", base.local_lr);
  read(j, "prox_lambda", base.prox_lambda);
  read(j, "global_lr", base.global_lr);
  read(j, "ala_layers", base.ala_layers);
  read(j, "ala_theta_lr", base.ala_theta_lr);
  read(j, "dafl_beta", base.dafl_beta);
  read(j, "sbs_lambda", base.sbs_lambda);
  read(j, "sbs_epsilon_min", base.sbs_epsilon_min);
  read(j, "sbs_epsilon_init", base.sbs_epsilon_init);
  read(j, "sbs_epsilon_decay", base.sbs_epsilon_decay);
  read(j, "sbs_penalty_tau", base.sbs_penalty_tau);
  read(j, "sbs_clients_per_round", base.sbs_clients_per_round);
  read(j, "flad_patience", base.flad_patience);
  read(j, "flad_min_epochs", base.flad_min_epochs);
  read(j, "flad_max_epochs", base.flad_max_epochs);
  read(j, "flad_min_steps", base.flad_min_steps);
  read(j, "flad_max_steps", base.flad_max_steps);
  base.validate();
  return base;
}

}  // namespace fedsim
