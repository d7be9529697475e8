#include "fedsim/metrics.hpp"

#include <stdexcept>

#include "fedsim/train.hpp"

namespace fedsim {

EvalMetrics evaluate(const MlpModel& model, const LabeledSet& split) {
  if (split.empty()) throw std::invalid_argument("evaluate: empty split");

  const std::vector<double> preds = forward(model, split.features);
  EvalMetrics m;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool predicted_attack = preds[i] >= 0.5;
    const bool is_attack = split.labels[i] != 0;
    if (predicted_attack && is_attack) ++m.tp;
    else if (predicted_attack && !is_attack) ++m.fp;
    else if (!predicted_attack && is_attack) ++m.fn;
    else ++m.tn;
  }
  const double n = static_cast<double>(preds.size());
  m.precision = (m.tp + m.fp) > 0 ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp) : 0.0;
  m.recall = (m.tp + m.fn) > 0 ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn) : 0.0;
  m.f1 = (m.precision + m.recall) > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  m.accuracy = static_cast<double>(m.tp + m.tn) / n;
  m.mean_loss = bce_loss(preds, split.labels);
  return m;
}

}  // namespace fedsim
