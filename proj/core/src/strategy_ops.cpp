#include "fedsim/strategy_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace fedsim {

namespace {

std::vector<double> size_weights(const std::vector<ClientUpdate>& updates) {
  double total = 0.0;
  for (const auto& u : updates) total += static_cast<double>(u.num_train_samples);
  if (total <= 0.0) {
    throw std::invalid_argument("aggregate: total sample count is zero");
  }
  std::vector<double> rho;
  rho.reserve(updates.size());
  for (const auto& u : updates) {
    rho.push_back(static_cast<double>(u.num_train_samples) / total);
  }
  return rho;
}

}  // namespace

std::vector<int> random_select(int num_clients, double ratio, Rng& rng) {
  if (ratio <= 0.0 || ratio > 1.0) {
    throw std::invalid_argument("random_select: ratio must be in (0, 1]");
  }
  const int count = std::clamp(
      static_cast<int>(std::nearbyint(static_cast<double>(num_clients) * ratio)), 1,
      num_clients);
  std::vector<int> ids(static_cast<std::size_t>(num_clients));
  std::iota(ids.begin(), ids.end(), 0);
  // Partial Fisher-Yates: the first `count` slots are a uniform sample.
  for (int i = 0; i < count; ++i) {
    const std::size_t j =
        static_cast<std::size_t>(i) +
        static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(num_clients - i)));
    std::swap(ids[static_cast<std::size_t>(i)], ids[j]);
  }
  ids.resize(static_cast<std::size_t>(count));
  std::sort(ids.begin(), ids.end());
  return ids;
}

FlatParams fedavg_aggregate(const FlatParams& global,
                            const std::vector<ClientUpdate>& updates) {
  return scaffold_aggregate(global, updates, 1.0);
}

FlatParams scaffold_aggregate(const FlatParams& global,
                              const std::vector<ClientUpdate>& updates, double eta_g) {
  if (updates.empty()) throw std::invalid_argument("aggregate: no updates");
  const std::vector<double> rho = size_weights(updates);
  FlatParams next = global;
  for (std::size_t i = 0; i < updates.size(); ++i) {
    const FlatParams& local = updates[i].params;
    if (local.size() != global.size()) {
      throw std::invalid_argument("aggregate: parameter size mismatch");
    }
    const double w = eta_g * rho[i];
    for (std::size_t k = 0; k < next.size(); ++k) {
      next[k] -= w * (global[k] - local[k]);
    }
  }
  return next;
}

GradModifier fedprox_modifier(const FlatParams& global, double lambda) {
  return GradModifier::proximal(lambda, global);
}

GradModifier scaffold_modifier(const ScaffoldState& state, int client_id) {
  if (client_id < 0 || static_cast<std::size_t>(client_id) >= state.c_local.size()) {
    throw std::invalid_argument("scaffold_modifier: unknown client");
  }
  return GradModifier::variate_correction(state.c_global,
                                          state.c_local[static_cast<std::size_t>(client_id)]);
}

FlatParams scaffold_local_variate(const MlpModel& global_model, const LabeledSet& train) {
  if (train.empty()) throw std::invalid_argument("scaffold_local_variate: empty dataset");
  return backward(global_model, train.features, train.labels, GradModifier::none());
}

FlatParams scaffold_update_global_variate(const FlatParams& c_global,
                                          const std::vector<FlatParams>& deltas,
                                          std::size_t num_clients) {
  FlatParams next = c_global;
  if (num_clients == 0) throw std::invalid_argument("num_clients must be positive");
  const double scale = 1.0 / static_cast<double>(num_clients);
  for (const auto& delta : deltas) next.axpy(scale, delta);
  return next;
}

std::size_t ala_split_offset(const MlpModel& model, int top_layers) {
  if (top_layers < 1 || static_cast<std::size_t>(top_layers) > model.layers.size()) {
    throw std::invalid_argument("ala_split_offset: bad layer count");
  }
  const auto offsets = model.layer_offsets();
  return offsets[model.layers.size() - static_cast<std::size_t>(top_layers)];
}

FlatParams fedala_merge(const FlatParams& prev_local, const FlatParams& global,
                        const FlatParams& theta, std::size_t split_offset) {
  if (prev_local.size() != global.size() ||
      theta.size() != global.size() - split_offset) {
    throw std::invalid_argument("fedala_merge: shape mismatch");
  }
  FlatParams merged = global;
  for (std::size_t k = split_offset; k < global.size(); ++k) {
    const double t = theta[k - split_offset];
    merged[k] = prev_local[k] + (global[k] - prev_local[k]) * t;
  }
  return merged;
}

FlatParams fedala_train_theta(const MlpModel& arch, const LabeledSet& train,
                              const FlatParams& prev_local, const FlatParams& global,
                              FlatParams theta, std::size_t split_offset, double theta_lr,
                              int batch_size, int round, Rng& rng) {
  if (train.empty()) return theta;
  const std::size_t n = train.size();
  const std::size_t dim = train.features.cols();
  const std::size_t top = theta.size();

  const bool until_convergence = round <= 2;
  const int max_updates =
      until_convergence ? 50 : default_steps_per_epoch(n, batch_size);
  constexpr std::size_t kWindow = 10;
  std::vector<double> window;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::size_t cursor = 0;

  const std::size_t rows = std::min<std::size_t>(static_cast<std::size_t>(batch_size), n);
  Matrix batch(rows, dim);
  std::vector<int> labels(rows);
  MlpModel work = arch;

  for (int update = 0; update < max_updates; ++update) {
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t idx = order[cursor];
      cursor = (cursor + 1) % n;
      auto src = train.features.row(idx);
      std::copy(src.begin(), src.end(), batch.row(r).begin());
      labels[r] = train.labels[idx];
    }

    const FlatParams merged = fedala_merge(prev_local, global, theta, split_offset);
    unflatten(merged, work);
    const FlatParams grad = backward(work, batch, labels, GradModifier::none());

    // Chain rule: dL/dtheta_j = dL/dw_j * (global_j - prev_j) on the top block.
    for (std::size_t j = 0; j < top; ++j) {
      const std::size_t k = split_offset + j;
      const double g = grad[k] * (global[k] - prev_local[k]);
      theta[j] = std::clamp(theta[j] - theta_lr * g, 0.0, 1.0);
    }

    if (until_convergence) {
      const std::vector<double> preds = forward(work, batch);
      window.push_back(bce_loss(preds, labels));
      if (window.size() >= kWindow) {
        const auto tail = window.end() - static_cast<std::ptrdiff_t>(kWindow);
        const double mean = std::accumulate(tail, window.end(), 0.0) / kWindow;
        double var = 0.0;
        for (auto it = tail; it != window.end(); ++it) {
          var += (*it - mean) * (*it - mean);
        }
        if (std::sqrt(var / kWindow) < 1e-3) break;
      }
    }
  }
  return theta;
}

bool dafl_filter(double local_val_accuracy, double beta) {
  return local_val_accuracy >= beta;
}

FlatParams dafl_aggregate(const std::vector<ClientUpdate>& updates) {
  if (updates.empty()) throw std::invalid_argument("dafl_aggregate: no updates");
  const std::vector<double> rho = size_weights(updates);

  double soft_total = 0.0;
  std::vector<double> soft(updates.size());
  for (std::size_t i = 0; i < updates.size(); ++i) {
    soft[i] = std::exp(updates[i].local_val_accuracy);
    soft_total += soft[i];
  }
  double norm = 0.0;
  std::vector<double> coeff(updates.size());
  for (std::size_t i = 0; i < updates.size(); ++i) {
    coeff[i] = rho[i] * (soft[i] / soft_total);
    norm += coeff[i];
  }

  FlatParams next(updates.front().params.size());
  for (std::size_t i = 0; i < updates.size(); ++i) {
    next.axpy(coeff[i] / norm, updates[i].params);
  }
  return next;
}

double sbs_information_gain(double global_val_loss, double local_val_loss, double phi) {
  const double lg = std::max(global_val_loss, 1e-12);
  const double ll = std::max(local_val_loss, 1e-12);
  return -std::log(lg) + phi * std::log(ll);
}

double sbs_imbalance(const std::vector<double>& class_proportions,
                     double local_val_loss) {
  double entropy_sum = 0.0;  // sum p_c * log2 p_c, zero terms dropped
  for (double p : class_proportions) {
    if (p > 0.0) entropy_sum += p * std::log2(p);
  }
  const double ll = std::max(local_val_loss, 1e-12);
  return std::log(ll) < 0.0 ? 1.0 + entropy_sum : -entropy_sum;
}

std::vector<int> sbs_select(SbsState& state, const std::vector<double>& ig_scores,
                            int clients_per_round, double penalty_tau, Rng& rng) {
  const std::size_t n = ig_scores.size();
  if (state.selection_counts.size() != n) {
    throw std::invalid_argument("sbs_select: state/score size mismatch");
  }
  const std::size_t want = std::min<std::size_t>(static_cast<std::size_t>(clients_per_round), n);

  std::vector<int> remaining(n);
  std::iota(remaining.begin(), remaining.end(), 0);
  std::vector<int> chosen;
  chosen.reserve(want);

  while (chosen.size() < want) {
    std::size_t pick;
    if (rng.uniform() < state.epsilon) {
      pick = static_cast<std::size_t>(rng.below(remaining.size()));
    } else {
      pick = 0;
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < remaining.size(); ++i) {
        const int id = remaining[i];
        const double score =
            ig_scores[static_cast<std::size_t>(id)] -
            static_cast<double>(state.selection_counts[static_cast<std::size_t>(id)]) /
                penalty_tau;
        if (score > best) {
          best = score;
          pick = i;
        }
      }
    }
    chosen.push_back(remaining[pick]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
  }

  std::sort(chosen.begin(), chosen.end());
  for (int id : chosen) ++state.selection_counts[static_cast<std::size_t>(id)];
  return chosen;
}

GradModifier sbs_modifier(const FlatParams& global, const FlatParams& prev_global,
                          double lambda) {
  // lambda * (w + w^t - w^{t-1}) == lambda * (w - (w^{t-1} - w^t)), so the
  // proximal kind with that anchor applies it at every step. Before the
  // first aggregation the momentum term is zero.
  FlatParams anchor(global.size());
  if (!prev_global.empty()) {
    anchor = prev_global;
    anchor -= global;
  }
  return GradModifier::proximal(lambda, std::move(anchor));
}

FlatParams sbs_aggregate(const FlatParams& global, const FlatParams& prev_global,
                         const std::vector<ClientUpdate>& updates, double eta_g) {
  if (updates.empty()) throw std::invalid_argument("sbs_aggregate: no updates");
  const std::vector<double> rho = size_weights(updates);
  FlatParams next(global.size());
  for (std::size_t i = 0; i < updates.size(); ++i) {
    next.axpy(rho[i], updates[i].params);
  }
  if (!prev_global.empty()) {
    for (std::size_t k = 0; k < next.size(); ++k) {
      next[k] += eta_g * (global[k] - prev_global[k]);
    }
  }
  return next;
}

std::vector<FladDirective> flad_assign_work(const std::vector<double>& accuracies,
                                            int min_epochs, int max_epochs,
                                            int min_steps, int max_steps) {
  if (accuracies.empty()) throw std::invalid_argument("flad_assign_work: no accuracies");
  constexpr double kTol = 1e-6;
  const auto [lo_it, hi_it] = std::minmax_element(accuracies.begin(), accuracies.end());
  const double lo = *lo_it;
  const double hi = *hi_it;

  std::vector<FladDirective> out(accuracies.size());
  if (hi - lo <= kTol) {
    // Plateau guard: identical scores below perfect keep everyone training at
    // the minimum instead of stalling the federation.
    if (hi < 1.0 - kTol) {
      for (auto& d : out) d = {true, min_epochs, min_steps};
    }
    return out;
  }
  for (std::size_t i = 0; i < accuracies.size(); ++i) {
    if (accuracies[i] >= hi - kTol) continue;  // already at the top
    const double deficit = (hi - accuracies[i]) / (hi - lo);
    out[i].selected = true;
    out[i].epochs = min_epochs + static_cast<int>(std::llround(
                                     deficit * static_cast<double>(max_epochs - min_epochs)));
    out[i].steps = min_steps + static_cast<int>(std::llround(
                                   deficit * static_cast<double>(max_steps - min_steps)));
  }
  return out;
}

FlatParams flad_aggregate(const std::vector<ClientUpdate>& updates) {
  if (updates.empty()) throw std::invalid_argument("flad_aggregate: no updates");
  FlatParams next(updates.front().params.size());
  const double w = 1.0 / static_cast<double>(updates.size());
  for (const auto& u : updates) next.axpy(w, u.params);
  return next;
}

bool FladStopTracker::observe(double mean_val_accuracy) {
  if (mean_val_accuracy > best_ + 1e-6) {
    best_ = mean_val_accuracy;
    rounds_since_improvement_ = 0;
  } else {
    ++rounds_since_improvement_;
  }
  return rounds_since_improvement_ >= patience_;
}

}  // namespace fedsim
