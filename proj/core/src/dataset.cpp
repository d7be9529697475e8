#include "fedsim/dataset.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "fedsim/model.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

namespace {

LabeledSet take_rows(const LabeledSet& src, const std::vector<std::size_t>& rows) {
  LabeledSet out;
  out.features = Matrix(rows.size(), src.features.cols());
  out.labels.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto r = src.features.row(rows[i]);
    std::copy(r.begin(), r.end(), out.features.row(i).begin());
    out.labels[i] = src.labels[rows[i]];
  }
  return out;
}

// Splits `count` into shares proportional to group sizes using largest
// remainders, then guarantees one sample per group that holds >= 10 samples
// overall (so no split goes single-class when avoidable).
std::vector<std::size_t> allocate_shares(const std::vector<std::size_t>& group_sizes,
                                         std::size_t count) {
  const std::size_t total = std::accumulate(group_sizes.begin(), group_sizes.end(),
                                            std::size_t{0});
  std::vector<std::size_t> share(group_sizes.size(), 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t g = 0; g < group_sizes.size(); ++g) {
    const double exact = static_cast<double>(count) *
                         static_cast<double>(group_sizes[g]) / static_cast<double>(total);
    share[g] = static_cast<std::size_t>(exact);
    assigned += share[g];
    remainders.emplace_back(exact - static_cast<double>(share[g]), g);
  }
  std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (std::size_t i = 0; assigned < count && i < remainders.size(); ++i, ++assigned) {
    ++share[remainders[i].second];
  }
  // Minimum one per well-populated group, rebalanced from the largest share.
  for (std::size_t g = 0; g < share.size(); ++g) {
    if (share[g] == 0 && group_sizes[g] >= 10) {
      const std::size_t donor = static_cast<std::size_t>(
          std::distance(share.begin(), std::max_element(share.begin(), share.end())));
      if (share[donor] > 1) {
        --share[donor];
        ++share[g];
      }
    }
  }
  return share;
}

}  // namespace

void split_dataset(const LabeledSet& samples, std::uint64_t seed,
                   LabeledSet& train, LabeledSet& val, LabeledSet& test) {
  const std::size_t n = samples.size();
  if (n < 10) throw std::invalid_argument("split_dataset: need at least 10 samples");

  // Group indices by label, each group in seeded shuffle order.
  std::vector<std::vector<std::size_t>> groups(2);
  for (std::size_t i = 0; i < n; ++i) {
    groups[samples.labels[i] != 0 ? 1 : 0].push_back(i);
  }
  Rng rng(mix_seed({seed, 0x73706c6974ULL}));
  for (auto& g : groups) rng.shuffle(g);

  std::erase_if(groups, [](const auto& g) { return g.empty(); });
  std::vector<std::size_t> group_sizes;
  for (const auto& g : groups) group_sizes.push_back(g.size());

  const std::size_t test_n = std::max<std::size_t>(1, n / 10);
  const std::size_t rem = n - test_n;
  const std::size_t val_n = std::max<std::size_t>(1, rem / 10);

  const std::vector<std::size_t> test_share = allocate_shares(group_sizes, test_n);
  std::vector<std::size_t> remaining_sizes(group_sizes.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    remaining_sizes[g] = group_sizes[g] - test_share[g];
  }
  const std::vector<std::size_t> val_share = allocate_shares(remaining_sizes, val_n);

  std::vector<std::size_t> test_rows, val_rows, train_rows;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::size_t pos = 0;
    for (std::size_t i = 0; i < test_share[g]; ++i) test_rows.push_back(groups[g][pos++]);
    for (std::size_t i = 0; i < val_share[g]; ++i) val_rows.push_back(groups[g][pos++]);
    for (; pos < groups[g].size(); ++pos) train_rows.push_back(groups[g][pos]);
  }

  test = take_rows(samples, test_rows);
  val = take_rows(samples, val_rows);
  train = take_rows(samples, train_rows);
}

std::vector<double> class_proportions(const LabeledSet& train) {
  if (train.empty()) throw std::invalid_argument("class_proportions: empty split");
  double attack = 0.0;
  for (int y : train.labels) {
    if (y != 0) attack += 1.0;
  }
  const double n = static_cast<double>(train.size());
  return {(n - attack) / n, attack / n};
}

void normalize_columns(Matrix& features) {
  const std::size_t rows = features.rows();
  const std::size_t cols = features.cols();
  if (rows == 0) return;
  for (std::size_t c = 0; c < cols; ++c) {
    double lo = features.at(0, c);
    double hi = lo;
    for (std::size_t r = 1; r < rows; ++r) {
      lo = std::min(lo, features.at(r, c));
      hi = std::max(hi, features.at(r, c));
    }
    const double range = hi - lo;
    for (std::size_t r = 0; r < rows; ++r) {
      features.at(r, c) = range > 0.0 ? (features.at(r, c) - lo) / range : 0.0;
    }
  }
}

LabeledSet concat(const LabeledSet& a, const LabeledSet& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  if (a.features.cols() != b.features.cols()) {
    throw std::invalid_argument("concat: column mismatch");
  }
  LabeledSet out;
  out.features = Matrix(a.size() + b.size(), a.features.cols());
  out.labels.reserve(a.size() + b.size());
  std::copy(a.features.data().begin(), a.features.data().end(), out.features.data().begin());
  std::copy(b.features.data().begin(), b.features.data().end(),
            out.features.data().begin() + static_cast<std::ptrdiff_t>(a.features.data().size()));
  out.labels.insert(out.labels.end(), a.labels.begin(), a.labels.end());
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  return out;
}

}  // namespace fedsim
