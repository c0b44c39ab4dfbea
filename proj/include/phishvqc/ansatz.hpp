// RealAmplitudes and EfficientSU2 hardware-efficient ansatz construction.
//
// Both families stack `reps` blocks of rotation layers followed by a CX
// entanglement block, and close with one more rotation layer:
//
//   RealAmplitudes:  [RY]  -> ent -> ... -> [RY]
//   EfficientSU2:    [RY][RZ] -> ent -> ... -> [RY][RZ]
//
// Parameters are consumed layer by layer, qubit 0 first within a layer.
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "phishvqc/error.hpp"
#include "phishvqc/qsim.hpp"

namespace phishvqc {

enum class AnsatzFamily { RealAmplitudes, EfficientSU2 };
enum class Entanglement { Full, Linear };

struct AnsatzSpec {
  AnsatzFamily family = AnsatzFamily::RealAmplitudes;
  std::size_t n_qubits = 1;
  std::size_t reps = 1;
  Entanglement entanglement = Entanglement::Full;

  friend bool operator==(const AnsatzSpec&, const AnsatzSpec&) = default;
};

inline std::string_view to_string(AnsatzFamily f) {
  return f == AnsatzFamily::RealAmplitudes ? "real-amplitudes" : "efficient-su2";
}

inline std::string_view to_string(Entanglement e) {
  return e == Entanglement::Full ? "full" : "linear";
}

inline AnsatzFamily parse_ansatz_family(std::string_view s) {
  if (s == "real-amplitudes" || s == "RealAmplitudes") return AnsatzFamily::RealAmplitudes;
  if (s == "efficient-su2" || s == "EfficientSU2") return AnsatzFamily::EfficientSU2;
  throw InvalidConfig("unknown ansatz '" + std::string(s) +
                      "' (expected real-amplitudes or efficient-su2)");
}

inline Entanglement parse_entanglement(std::string_view s) {
  if (s == "full") return Entanglement::Full;
  if (s == "linear") return Entanglement::Linear;
  throw InvalidConfig("unknown entanglement '" + std::string(s) +
                      "' (expected full or linear)");
}

inline void validate(const AnsatzSpec& spec) {
  if (spec.n_qubits < 1 || spec.n_qubits > kMaxQubits) {
    throw ContractViolation("ansatz qubit count " + std::to_string(spec.n_qubits) +
                            " outside [1, " + std::to_string(kMaxQubits) + "]");
  }
  if (spec.reps < 1) throw ContractViolation("ansatz reps must be >= 1");
}

inline std::size_t rotation_layers_per_block(AnsatzFamily family) {
  return family == AnsatzFamily::RealAmplitudes ? 1 : 2;
}

inline std::size_t parameter_count(const AnsatzSpec& spec) {
  validate(spec);
  return (spec.reps + 1) * rotation_layers_per_block(spec.family) * spec.n_qubits;
}

// CX pairs of one entanglement block. Full is lexicographic over i < j.
inline std::vector<std::pair<std::size_t, std::size_t>> entanglement_pairs(
    std::size_t n_qubits, Entanglement entanglement) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (n_qubits < 2) return pairs;
  if (entanglement == Entanglement::Full) {
    for (std::size_t i = 0; i + 1 < n_qubits; ++i)
      for (std::size_t j = i + 1; j < n_qubits; ++j) pairs.emplace_back(i, j);
  } else {
    for (std::size_t i = 0; i + 1 < n_qubits; ++i) pairs.emplace_back(i, i + 1);
  }
  return pairs;
}

inline Circuit build_circuit(const AnsatzSpec& spec, std::span<const double> params) {
  const std::size_t expected = parameter_count(spec);
  if (params.size() != expected) {
    throw ContractViolation("ansatz expects " + std::to_string(expected) +
                            " parameters, got " + std::to_string(params.size()));
  }
  const auto pairs = entanglement_pairs(spec.n_qubits, spec.entanglement);
  const bool su2 = spec.family == AnsatzFamily::EfficientSU2;

  Circuit circuit(spec.n_qubits);
  circuit.reserve(expected + spec.reps * pairs.size());

  std::size_t next = 0;
  auto rotation_layers = [&] {
    for (std::size_t q = 0; q < spec.n_qubits; ++q) circuit.ry(q, params[next++]);
    if (su2) {
      for (std::size_t q = 0; q < spec.n_qubits; ++q) circuit.rz(q, params[next++]);
    }
  };

  for (std::size_t r = 0; r < spec.reps; ++r) {
    rotation_layers();
    for (const auto& [c, t] : pairs) circuit.cx(c, t);
  }
  rotation_layers();
  return circuit;
}

}  // namespace phishvqc
