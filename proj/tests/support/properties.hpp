#pragma once

// Invariant checks shared by the unit suites (small case counts) and the
// acceptance binary (>= 1000 cases each).

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "fedsim/dataset.hpp"
#include "fedsim/strategy_ops.hpp"
#include "fedsim/train.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

namespace fedsim::test {

inline bool close(double a, double b, double tol = 1e-12) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

// unflatten(flatten(m)) == m and flatten(unflatten(v)) == v, bitwise.
inline PropResult prop_flatten_round_trip(int cases, std::uint64_t seed = 11) {
  return run_property(cases, seed, [](Rng& rng) -> std::optional<std::string> {
    MlpModel model = random_small_model(rng);
    const FlatParams flat = flatten(model);
    MlpModel copy = model;
    unflatten(flat, copy);
    if (flatten(copy).values != flat.values) return "model round trip changed values";
    FlatParams v = random_params(rng, model.param_count());
    unflatten(v, copy);
    if (flatten(copy).values != v.values) return "vector round trip changed values";
    return std::nullopt;
  });
}

// FedAvg, DAFL and FLAD aggregates stay inside the per-coordinate envelope
// of their inputs.
inline PropResult prop_aggregation_convexity(int cases, std::uint64_t seed = 12) {
  return run_property(cases, seed, [](Rng& rng) -> std::optional<std::string> {
    AggInstance inst = random_agg_instance(rng);
    const std::size_t dim = inst.global.size();
    const FlatParams results[] = {fedavg_aggregate(inst.global, inst.updates),
                                  dafl_aggregate(inst.updates),
                                  flad_aggregate(inst.updates)};
    for (const FlatParams& out : results) {
      for (std::size_t k = 0; k < dim; ++k) {
        double lo = inst.updates.front().params[k];
        double hi = lo;
        for (const auto& u : inst.updates) {
          lo = std::min(lo, u.params[k]);
          hi = std::max(hi, u.params[k]);
        }
        const double slack = 1e-9 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
        if (out[k] < lo - slack || out[k] > hi + slack) {
          std::ostringstream msg;
          msg << "coordinate " << k << " = " << out[k] << " outside [" << lo << ", "
              << hi << "]";
          return msg.str();
        }
      }
    }
    return std::nullopt;
  });
}

// Update order never changes an aggregate (beyond summation noise).
inline PropResult prop_permutation_invariance(int cases, std::uint64_t seed = 13) {
  return run_property(cases, seed, [](Rng& rng) -> std::optional<std::string> {
    AggInstance inst = random_agg_instance(rng);
    std::vector<ClientUpdate> shuffled = inst.updates;
    rng.shuffle(shuffled);

    const double eta = rng.uniform(0.0, 2.0);
    const std::pair<FlatParams, FlatParams> pairs[] = {
        {fedavg_aggregate(inst.global, inst.updates),
         fedavg_aggregate(inst.global, shuffled)},
        {scaffold_aggregate(inst.global, inst.updates, eta),
         scaffold_aggregate(inst.global, shuffled, eta)},
        {dafl_aggregate(inst.updates), dafl_aggregate(shuffled)},
        {flad_aggregate(inst.updates), flad_aggregate(shuffled)},
        {sbs_aggregate(inst.global, inst.prev_global, inst.updates, eta),
         sbs_aggregate(inst.global, inst.prev_global, shuffled, eta)}};
    for (const auto& [a, b] : pairs) {
      for (std::size_t k = 0; k < a.size(); ++k) {
        if (!close(a[k], b[k])) return "aggregate changed under permutation";
      }
    }
    return std::nullopt;
  });
}

// Splits are pairwise disjoint and rebuild the input multiset.
inline PropResult prop_split_disjoint_exhaustive(int cases, std::uint64_t seed = 14) {
  return run_property(cases, seed, [](Rng& rng) -> std::optional<std::string> {
    const std::size_t n = 10 + rng.below(120);
    LabeledSet all;
    all.features = Matrix(n, 3);
    all.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      all.features.at(i, 0) = static_cast<double>(i);  // identity tag
      all.features.at(i, 1) = rng.uniform();
      all.features.at(i, 2) = rng.uniform();
      all.labels[i] = rng.below(4) == 0 ? 1 : 0;
    }
    LabeledSet train, val, test;
    split_dataset(all, rng.next_u64(), train, val, test);

    if (train.size() + val.size() + test.size() != n) return "sizes do not add up";
    std::vector<int> seen(n, 0);
    for (const LabeledSet* split : {&train, &val, &test}) {
      for (std::size_t i = 0; i < split->size(); ++i) {
        const auto tag = static_cast<std::size_t>(split->features.at(i, 0));
        if (tag >= n) return "unknown sample appeared";
        if (++seen[tag] > 1) return "sample assigned to two splits";
        if (split->labels[i] != all.labels[tag]) return "label changed in split";
      }
    }
    return std::nullopt;
  });
}

// fedala_train_theta keeps every component inside [0, 1].
inline PropResult prop_theta_clamped(int cases, std::uint64_t seed = 15) {
  return run_property(cases, seed, [](Rng& rng) -> std::optional<std::string> {
    MlpModel model = random_small_model(rng);
    const std::size_t p = model.param_count();
    const std::size_t split = ala_split_offset(model, 1);
    const std::size_t n = 4 + rng.below(12);

    LabeledSet train;
    train.features = random_batch(rng, n, model.input_dim());
    train.labels = random_labels(rng, n);

    FlatParams prev = random_params(rng, p, 2.0);
    FlatParams global = random_params(rng, p, 2.0);
    FlatParams theta = random_params(rng, p - split, 0.5);
    for (double& v : theta.values) v = std::abs(v) * 2.0;  // start partly out of range

    const int round = 3 + static_cast<int>(rng.below(4));
    const double lr = rng.uniform(0.1, 5.0);
    const FlatParams out = fedala_train_theta(model, train, prev, global, theta, split,
                                              lr, 8, round, rng);
    for (double v : out.values) {
      if (v < 0.0 || v > 1.0) return "theta escaped [0, 1]";
    }
    return std::nullopt;
  });
}

// Worse accuracy never receives less work.
inline PropResult prop_flad_work_monotonic(int cases, std::uint64_t seed = 16) {
  return run_property(cases, seed, [](Rng& rng) -> std::optional<std::string> {
    const std::size_t n = 2 + rng.below(12);
    std::vector<double> acc(n);
    for (double& a : acc) a = rng.uniform();
    const auto work = flad_assign_work(acc, 1, 5, 1, 1000);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (acc[i] <= acc[j]) {
          if (work[i].epochs < work[j].epochs || work[i].steps < work[j].steps) {
            return "work not monotone in accuracy deficit";
          }
        }
      }
    }
    return std::nullopt;
  });
}

// backward with an additive modifier equals backward(none) + lambda * term.
inline PropResult prop_modifier_linearity(int cases, std::uint64_t seed = 17) {
  return run_property(cases, seed, [](Rng& rng) -> std::optional<std::string> {
    MlpModel model = random_small_model(rng);
    const std::size_t rows = 1 + rng.below(6);
    const Matrix batch = random_batch(rng, rows, model.input_dim());
    const std::vector<int> labels = random_labels(rng, rows);
    const double lambda = rng.uniform(-2.0, 2.0);
    const FlatParams term = random_params(rng, model.param_count());

    const FlatParams plain = backward(model, batch, labels, GradModifier::none());
    const FlatParams modified =
        backward(model, batch, labels, GradModifier::additive(term, lambda));
    for (std::size_t k = 0; k < plain.size(); ++k) {
      if (!close(modified[k], plain[k] + lambda * term[k])) {
        return "additive modifier is not linear";
      }
    }
    return std::nullopt;
  });
}

}  // namespace fedsim::test
