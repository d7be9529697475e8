#pragma once

#include <cstdint>
#include <vector>

#include "fedsim/dataset.hpp"
#include "fedsim/flat_params.hpp"
#include "fedsim/model.hpp"
#include "fedsim/rng.hpp"
#include "fedsim/train.hpp"

namespace fedsim {

// What a client hands back after a round. params is its trained local model;
// the losses/accuracy are measured on its validation split.
struct ClientUpdate {
  int client_id = 0;
  FlatParams params;
  std::size_t num_train_samples = 0;
  int num_updates = 0;             // mu_i: epochs * steps actually run
  double local_val_accuracy = 0.0; // accuracy of the trained local model
  double local_val_loss = 0.0;
  double global_val_loss = 0.0;    // loss of the received global model
  FlatParams variate_delta;        // SCAFFOLD only; empty otherwise
  bool participated = true;        // false when filtered out client-side
};

// ---- selection ----------------------------------------------------------

// round(N * ratio) distinct clients, uniform, sorted by id. Half-way counts
// round to even, which keeps 13 clients at ratio 0.5 on 6 per round.
std::vector<int> random_select(int num_clients, double ratio, Rng& rng);

// ---- weighted-average family -------------------------------------------

// w' = w - sum_i rho_i * (w - w_i), rho_i = |D_i| / sum |D_j|.
FlatParams fedavg_aggregate(const FlatParams& global,
                            const std::vector<ClientUpdate>& updates);

// Same weighted deltas scaled by the global learning rate; eta_g == 1 is
// bitwise-identical to fedavg_aggregate.
FlatParams scaffold_aggregate(const FlatParams& global,
                              const std::vector<ClientUpdate>& updates, double eta_g);

// ---- FedProx -------------------------------------------------------------

GradModifier fedprox_modifier(const FlatParams& global, double lambda);

// ---- SCAFFOLD ------------------------------------------------------------

struct ScaffoldState {
  FlatParams c_global;
  std::vector<FlatParams> c_local;  // per client, zero-initialized

  ScaffoldState() = default;
  ScaffoldState(std::size_t num_clients, std::size_t param_count)
      : c_global(param_count), c_local(num_clients, FlatParams(param_count)) {}
};

GradModifier scaffold_modifier(const ScaffoldState& state, int client_id);

// Option-I local variate: the gradient of the loss at the received global
// model over one full pass of the local training set.
FlatParams scaffold_local_variate(const MlpModel& global_model, const LabeledSet& train);

// c' = c + (1/N) * sum of this round's deltas; N is the federation size.
FlatParams scaffold_update_global_variate(const FlatParams& c_global,
                                          const std::vector<FlatParams>& deltas,
                                          std::size_t num_clients);

// ---- FedALA ----------------------------------------------------------------

// Per-parameter blend weights for the top `layers` layers plus the client's
// previous local model.
struct AlaClientState {
  FlatParams theta;      // clamped to [0, 1], sized to the top-p block
  FlatParams prev_local; // empty until the client has trained once
};

// Parameter index where the top-p block starts in the flat layout.
std::size_t ala_split_offset(const MlpModel& model, int top_layers);

// Lower layers come from the global model; the top-p block is
// prev + (global - prev) ⊙ theta.
FlatParams fedala_merge(const FlatParams& prev_local, const FlatParams& global,
                        const FlatParams& theta, std::size_t split_offset);

// MBGD on theta with the model weights frozen; gradients are the model
// gradient restricted to the top block, scaled by (global - prev). In rounds
// 1 and 2 iterates until a 10-update loss window has stddev < 1e-3 (cap 50);
// later rounds run exactly one epoch.
FlatParams fedala_train_theta(const MlpModel& arch, const LabeledSet& train,
                              const FlatParams& prev_local, const FlatParams& global,
                              FlatParams theta, std::size_t split_offset, double theta_lr,
                              int batch_size, int round, Rng& rng);

// ---- DAFL ------------------------------------------------------------------

// Client-side filter: the local model is uploaded iff its validation
// accuracy meets the threshold (inclusive).
bool dafl_filter(double local_val_accuracy, double beta);

// Convex combination with weights rho_i * softmax(A)_i, renormalized.
FlatParams dafl_aggregate(const std::vector<ClientUpdate>& updates);

// ---- FedSBS ----------------------------------------------------------------

struct SbsState {
  double epsilon = 1.0;
  std::vector<int> selection_counts;
  FlatParams prev_global;           // w^{t-1}; empty in round 0
  std::vector<double> ig_scores;    // last computed I_i
};

// I_i = -ln L(w^t) + phi_i * ln L(w_i^t); losses are clamped at 1e-12.
double sbs_information_gain(double global_val_loss, double local_val_loss, double phi);

// Class-imbalance coefficient from the Shannon entropy of p_c.
double sbs_imbalance(const std::vector<double>& class_proportions, double local_val_loss);

// Epsilon-greedy pick of s clients: each slot is the best remaining
// candidate by I_i - count_i / tau (Boltzmann damping of frequent
// participants) with probability 1-eps, uniform otherwise. Ties break on the
// lower client id. Selection counts are updated in place.
std::vector<int> sbs_select(SbsState& state, const std::vector<double>& ig_scores,
                            int clients_per_round, double penalty_tau, Rng& rng);

// Per-step regulariser lambda * (w + w^t - w^{t-1}), expressed through the
// proximal kind with anchor w^{t-1} - w^t.
GradModifier sbs_modifier(const FlatParams& global, const FlatParams& prev_global,
                          double lambda);

// Weighted average of the locals plus eta_g * (w^t - w^{t-1}) momentum.
FlatParams sbs_aggregate(const FlatParams& global, const FlatParams& prev_global,
                         const std::vector<ClientUpdate>& updates, double eta_g);

// ---- FLAD ------------------------------------------------------------------

struct FladDirective {
  bool selected = false;
  int epochs = 0;
  int steps = 0;
};

// Clients strictly below the best accuracy train, with epochs/steps linear in
// their normalized accuracy deficit; an all-equal plateau below 1.0 trains
// everyone at the minimum so the process cannot deadlock.
std::vector<FladDirective> flad_assign_work(const std::vector<double>& accuracies,
                                            int min_epochs, int max_epochs,
                                            int min_steps, int max_steps);

// Unweighted element-wise mean of the participants.
FlatParams flad_aggregate(const std::vector<ClientUpdate>& updates);

// Patience tracker over the mean client validation accuracy.
class FladStopTracker {
 public:
  explicit FladStopTracker(int patience) : patience_(patience) {}

  // Feeds one round's mean accuracy; returns true when training should stop.
  bool observe(double mean_val_accuracy);

  double best() const { return best_; }
  int rounds_since_improvement() const { return rounds_since_improvement_; }

 private:
  int patience_;
  double best_ = -1.0;
  int rounds_since_improvement_ = 0;
};

}  // namespace fedsim
