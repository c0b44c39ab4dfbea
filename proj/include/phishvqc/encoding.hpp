// Amplitude encoding: a real feature vector, zero-padded to the next power of
// two and L2-normalized, becomes the amplitude array of a state vector.
#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "phishvqc/error.hpp"
#include "phishvqc/qsim.hpp"

namespace phishvqc {

struct EncodedSample {
  std::size_t n_qubits = 0;
  std::size_t padded_length = 0;
  StateVector state;
};

// ceil(log2(feature_count)), never below one qubit.
inline std::size_t required_qubits(std::size_t feature_count) {
  if (feature_count == 0) throw InvalidInput("feature count must be >= 1");
  if (feature_count <= 2) return 1;
  return static_cast<std::size_t>(std::bit_width(feature_count - 1));
}

inline EncodedSample amplitude_encode(std::span<const double> features) {
  if (features.empty()) throw InvalidInput("cannot encode an empty feature vector");
  double max_abs = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (!std::isfinite(features[i])) {
      throw InvalidInput("feature " + std::to_string(i) + " is not finite");
    }
    max_abs = std::max(max_abs, std::abs(features[i]));
  }
  if (max_abs == 0.0) {
    throw EncodingError("all-zero feature vector has no L2 normalization");
  }

  const std::size_t n_qubits = required_qubits(features.size());
  if (n_qubits > kMaxQubits) {
    throw InvalidInput(std::to_string(features.size()) +
                       " features need more than " +
                       std::to_string(kMaxQubits) + " qubits");
  }
  const std::size_t padded = std::size_t{1} << n_qubits;

  double sum_sq = 0.0;
  for (double x : features) sum_sq += x * x;

  std::vector<Complex> amps(padded, Complex{0.0, 0.0});
  // Inputs that are already unit-norm to rounding are installed verbatim.
  if (std::abs(sum_sq - 1.0) <= 4.0 * std::numeric_limits<double>::epsilon()) {
    for (std::size_t i = 0; i < features.size(); ++i) amps[i] = features[i];
  } else {
    double norm;
    if (std::isfinite(sum_sq) && sum_sq > std::numeric_limits<double>::min()) {
      norm = std::sqrt(sum_sq);
      for (std::size_t i = 0; i < features.size(); ++i) amps[i] = features[i] / norm;
    } else {
      // Rescale first when the plain sum of squares over/underflows.
      double scaled_sq = 0.0;
      for (double x : features) scaled_sq += (x / max_abs) * (x / max_abs);
      norm = std::sqrt(scaled_sq);
      for (std::size_t i = 0; i < features.size(); ++i) {
        amps[i] = (features[i] / max_abs) / norm;
      }
    }
  }

  return EncodedSample{n_qubits, padded, StateVector::from_amplitudes(std::move(amps))};
}

}  // namespace phishvqc
