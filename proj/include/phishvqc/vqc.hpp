// Variational quantum classifier: amplitude-encoded input, ansatz circuit,
// parity readout, cross-entropy loss minimized by COBYLA.
//
// Readout: the probability of class 1 (legitimate) is the total probability
// of basis states with an odd number of 1-bits; class 0 (phishing) takes the
// even ones.
#pragma once

#include <bit>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "phishvqc/ansatz.hpp"
#include "phishvqc/cobyla.hpp"
#include "phishvqc/dataprep.hpp"
#include "phishvqc/encoding.hpp"
#include "phishvqc/error.hpp"
#include "phishvqc/metrics.hpp"
#include "phishvqc/qsim.hpp"

namespace phishvqc {

inline constexpr double kLossEpsilon = 1e-12;
inline constexpr double kTieTolerance = 1e-12;

struct VqcModel {
  AnsatzSpec spec;
  std::vector<double> params;
  std::size_t feature_count = 0;
  std::size_t n_qubits = 0;

  static VqcModel create(const AnsatzSpec& spec, std::vector<double> params,
                         std::size_t feature_count) {
    VqcModel m{spec, std::move(params), feature_count, required_qubits(feature_count)};
    m.check_invariants();
    return m;
  }

  void check_invariants() const {
    if (feature_count == 0) throw ContractViolation("model feature count must be positive");
    if (n_qubits != required_qubits(feature_count)) {
      throw ContractViolation("model qubit count does not match its feature count");
    }
    if (spec.n_qubits != n_qubits) {
      throw ContractViolation("ansatz is built for " + std::to_string(spec.n_qubits) +
                              " qubits, model needs " + std::to_string(n_qubits));
    }
    if (params.size() != parameter_count(spec)) {
      throw ContractViolation("model has " + std::to_string(params.size()) +
                              " parameters, ansatz expects " +
                              std::to_string(parameter_count(spec)));
    }
  }

  friend bool operator==(const VqcModel&, const VqcModel&) = default;
};

struct ClassProbabilities {
  double p0 = 0.0;
  double p1 = 0.0;
};

inline ClassProbabilities parity_probabilities(const StateVector& state) {
  ClassProbabilities p;
  const auto amps = state.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) {
    const double prob = std::norm(amps[i]);
    if (std::popcount(i) % 2 == 1) {
      p.p1 += prob;
    } else {
      p.p0 += prob;
    }
  }
  return p;
}

inline ClassProbabilities class_probabilities(const VqcModel& model,
                                              std::span<const double> features) {
  if (features.size() != model.feature_count) {
    throw InvalidInput("model expects " + std::to_string(model.feature_count) +
                       " features, got " + std::to_string(features.size()));
  }
  auto encoded = amplitude_encode(features);
  run_circuit_inplace(encoded.state, build_circuit(model.spec, model.params));
  return parity_probabilities(encoded.state);
}

// Per-sample cross-entropy. The argument of the log is capped at 1 so a
// certain, correct prediction costs exactly 0 rather than -1e-12.
inline double sample_cross_entropy(const ClassProbabilities& p, int label) {
  const double q = label == 1 ? p.p1 : p.p0;
  return -std::log(std::min(1.0, q + kLossEpsilon));
}

// Mean binary cross-entropy, summed in sample order.
inline double cross_entropy(std::span<const ClassProbabilities> probs, std::span<const int> labels) {
  if (probs.size() != labels.size()) throw ContractViolation("probability/label length mismatch");
  if (probs.empty()) throw InvalidInput("loss of an empty dataset is undefined");
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) total += sample_cross_entropy(probs[i], labels[i]);
  return total / static_cast<double>(probs.size());
}

inline void check_dataset_width(const VqcModel& model, const Dataset& ds) {
  if (ds.feature_count() != model.feature_count) {
    throw InvalidInput("dataset has " + std::to_string(ds.feature_count()) +
                       " features, model expects " + std::to_string(model.feature_count));
  }
}

inline double loss(const VqcModel& model, const Dataset& ds) {
  if (ds.size() == 0) throw InvalidInput("loss of an empty dataset is undefined");
  check_dataset_width(model, ds);
  std::vector<ClassProbabilities> probs;
  probs.reserve(ds.size());
  for (std::size_t r = 0; r < ds.size(); ++r) {
    probs.push_back(class_probabilities(model, ds.features.row(r)));
  }
  return cross_entropy(probs, ds.labels);
}

// Argmax with ties going to class 0 (phishing).
inline int decide(const ClassProbabilities& p) {
  if (std::abs(p.p0 - p.p1) < kTieTolerance) return kPhishing;
  return p.p1 > p.p0 ? kLegitimate : kPhishing;
}

inline int predict(const VqcModel& model, std::span<const double> features) {
  return decide(class_probabilities(model, features));
}

inline EvalMetrics evaluate(const VqcModel& model, const Dataset& test) {
  if (test.size() == 0) throw InvalidInput("cannot evaluate on an empty test set");
  check_dataset_width(model, test);
  std::vector<int> predicted;
  predicted.reserve(test.size());
  for (std::size_t r = 0; r < test.size(); ++r) predicted.push_back(predict(model, test.features.row(r)));
  return compute_metrics(test.labels, predicted);
}

// ------------------------------------------------------------------ training

struct TrainReport {
  VqcModel model;
  OptimizationTrace trace;
  double wall_time_seconds = 0.0;
  std::uint64_t seed = 0;
  std::optional<EvalMetrics> metrics;  // filled once a test split is scored
};

// Uniform[-pi, pi] start drawn from a seeded mt19937_64.
inline std::vector<double> initial_parameters(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  std::vector<double> params(count);
  for (auto& p : params) p = angle(rng);
  return params;
}

// Training objective with the encoded inputs cached across evaluations.
class LossEvaluator {
 public:
  LossEvaluator(const Dataset& train, const AnsatzSpec& spec) : spec_(spec), labels_(train.labels) {
    if (train.size() == 0) throw InvalidInput("training set is empty");
    encoded_.reserve(train.size());
    for (std::size_t r = 0; r < train.size(); ++r) {
      encoded_.push_back(amplitude_encode(train.features.row(r)).state);
    }
    scratch_ = encoded_.front();
  }

  double operator()(std::span<const double> params) {
    const Circuit circuit = build_circuit(spec_, params);
    double total = 0.0;
    for (std::size_t i = 0; i < encoded_.size(); ++i) {
      scratch_ = encoded_[i];
      run_circuit_inplace(scratch_, circuit);
      total += sample_cross_entropy(parity_probabilities(scratch_), labels_[i]);
    }
    return total / static_cast<double>(encoded_.size());
  }

 private:
  AnsatzSpec spec_;
  std::vector<int> labels_;
  std::vector<StateVector> encoded_;
  StateVector scratch_{1};
};

inline TrainReport train(const Dataset& train_set, const AnsatzSpec& spec,
                         const OptimizerConfig& config, const ProgressCallback& callback = {}) {
  train_set.check_invariants();
  if (train_set.size() == 0) throw InvalidInput("training set is empty");
  validate(spec);
  const std::size_t features = train_set.feature_count();
  if (features > (std::size_t{1} << spec.n_qubits)) {
    throw InvalidConfig(std::to_string(features) + " features do not fit in " +
                        std::to_string(spec.n_qubits) + " qubits");
  }
  if (required_qubits(features) != spec.n_qubits) {
    throw InvalidConfig("ansatz has " + std::to_string(spec.n_qubits) + " qubits but " +
                        std::to_string(features) + " features encode into " +
                        std::to_string(required_qubits(features)));
  }
  const std::size_t n_params = parameter_count(spec);
  validate(config, n_params);

  const std::uint64_t seed = config.seed.value_or(0);
  const auto start = initial_parameters(n_params, seed);

  const auto t0 = std::chrono::steady_clock::now();
  LossEvaluator objective(train_set, spec);
  OptimizationTrace trace = minimize(std::ref(objective), start, config, callback);
  const auto t1 = std::chrono::steady_clock::now();

  TrainReport report{VqcModel::create(spec, trace.final_params, features), std::move(trace),
                     std::chrono::duration<double>(t1 - t0).count(), seed, std::nullopt};
  return report;
}

}  // namespace phishvqc
