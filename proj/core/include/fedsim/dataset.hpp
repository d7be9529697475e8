#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedsim/matrix.hpp"

namespace fedsim {

// A set of flow samples: one row of 110 features per sample (10 packets x 11
// per-packet features, row-major) and a 0/1 label (benign/attack).
struct LabeledSet {
  Matrix features;          // n x 110
  std::vector<int> labels;  // n entries in {0, 1}

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }
};

// One client's data, already split. Splits are disjoint; test is ~10% of the
// total and val ~10% of the remaining train portion.
struct ClientDataset {
  int client_id = 0;
  std::string attack_name;
  LabeledSet train;
  LabeledSet val;
  LabeledSet test;
  std::vector<double> class_proportions;  // over train labels, sums to 1
};

using Federation = std::vector<ClientDataset>;

// Shuffles by seed and splits stratified by label: 10% test, then 10% of the
// remainder as val (floor, at least 1 sample each). Requires >= 10 samples.
void split_dataset(const LabeledSet& samples, std::uint64_t seed,
                   LabeledSet& train, LabeledSet& val, LabeledSet& test);

// Proportion of each class over the train split: {p_benign, p_attack}.
std::vector<double> class_proportions(const LabeledSet& train);

// Min-max normalizes every feature column to [0, 1] in place. Constant
// columns map to 0.
void normalize_columns(Matrix& features);

LabeledSet concat(const LabeledSet& a, const LabeledSet& b);

}  // namespace fedsim
