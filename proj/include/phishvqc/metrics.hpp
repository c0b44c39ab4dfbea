// Binary confusion matrix with per-class and macro precision/recall/F1.
#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>

#include "phishvqc/error.hpp"
#include "phishvqc/log.hpp"

namespace phishvqc {

struct EvalMetrics {
  // confusion[true][predicted]
  std::array<std::array<std::size_t, 2>, 2> confusion{};
  std::array<double, 2> precision{};
  std::array<double, 2> recall{};
  std::array<double, 2> f1{};
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;

  std::size_t total() const noexcept {
    return confusion[0][0] + confusion[0][1] + confusion[1][0] + confusion[1][1];
  }
  double accuracy() const noexcept {
    const std::size_t n = total();
    return n == 0 ? 0.0 : static_cast<double>(confusion[0][0] + confusion[1][1]) / n;
  }

  friend bool operator==(const EvalMetrics&, const EvalMetrics&) = default;
};

inline double harmonic_mean(double a, double b) {
  return a + b == 0.0 ? 0.0 : 2.0 * a * b / (a + b);
}

inline EvalMetrics metrics_from_confusion(const std::array<std::array<std::size_t, 2>, 2>& cm) {
  EvalMetrics m;
  m.confusion = cm;
  for (int c = 0; c < 2; ++c) {
    const std::size_t tp = cm[c][c];
    const std::size_t predicted = cm[0][c] + cm[1][c];
    const std::size_t actual = cm[c][0] + cm[c][1];
    if (predicted == 0 || actual == 0) {
      log::notice("class " + std::to_string(c) +
                  (actual == 0 ? " absent from ground truth" : " never predicted") +
                  "; undefined scores reported as 0");
    }
    m.precision[c] = predicted == 0 ? 0.0 : static_cast<double>(tp) / predicted;
    m.recall[c] = actual == 0 ? 0.0 : static_cast<double>(tp) / actual;
    m.f1[c] = harmonic_mean(m.precision[c], m.recall[c]);
  }
  m.macro_precision = (m.precision[0] + m.precision[1]) / 2.0;
  m.macro_recall = (m.recall[0] + m.recall[1]) / 2.0;
  m.macro_f1 = (m.f1[0] + m.f1[1]) / 2.0;
  return m;
}

inline EvalMetrics compute_metrics(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) {
    throw ContractViolation("truth and prediction lengths differ");
  }
  if (truth.empty()) throw InvalidInput("cannot score an empty set");
  std::array<std::array<std::size_t, 2>, 2> cm{};
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if ((truth[i] != 0 && truth[i] != 1) || (predicted[i] != 0 && predicted[i] != 1)) {
      throw ContractViolation("labels must be 0 or 1");
    }
    ++cm[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(predicted[i])];
  }
  return metrics_from_confusion(cm);
}

}  // namespace phishvqc
