// Dense state-vector simulation over the gate set {RY, RZ, CX}.
//
// Qubit ordering is little-endian: qubit k is bit k of the basis index, so
// |q2 q1 q0> = |101> lives at index 5. Gates act in place with stride
// arithmetic; no 2^n x 2^n matrix is ever formed.
#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "phishvqc/error.hpp"

namespace phishvqc {

using Complex = std::complex<double>;

inline constexpr std::size_t kMaxQubits = 16;

class StateVector {
 public:
  // |0...0> on n qubits.
  explicit StateVector(std::size_t n_qubits) : n_qubits_(n_qubits) {
    check_width(n_qubits);
    amplitudes_.assign(std::size_t{1} << n_qubits, Complex{0.0, 0.0});
    amplitudes_[0] = Complex{1.0, 0.0};
  }

  static StateVector basis(std::size_t n_qubits, std::size_t index) {
    StateVector s(n_qubits);
    if (index >= s.size()) {
      throw ContractViolation("basis index " + std::to_string(index) +
                              " out of range for " + std::to_string(n_qubits) +
                              " qubits");
    }
    s.amplitudes_[0] = Complex{0.0, 0.0};
    s.amplitudes_[index] = Complex{1.0, 0.0};
    return s;
  }

  // Takes ownership of raw amplitudes. Length must be a power of two >= 2.
  // Normalization is the caller's responsibility.
  static StateVector from_amplitudes(std::vector<Complex> amplitudes) {
    const std::size_t len = amplitudes.size();
    if (len < 2 || !std::has_single_bit(len)) {
      throw ContractViolation("amplitude count " + std::to_string(len) +
                              " is not a power of two >= 2");
    }
    const auto n = static_cast<std::size_t>(std::countr_zero(len));
    check_width(n);
    StateVector s;
    s.n_qubits_ = n;
    s.amplitudes_ = std::move(amplitudes);
    return s;
  }

  std::size_t n_qubits() const noexcept { return n_qubits_; }
  std::size_t size() const noexcept { return amplitudes_.size(); }

  std::span<const Complex> amplitudes() const noexcept { return amplitudes_; }
  std::span<Complex> amplitudes() noexcept { return amplitudes_; }

  const Complex& operator[](std::size_t i) const { return amplitudes_[i]; }

  double norm_squared() const noexcept {
    double total = 0.0;
    for (const auto& a : amplitudes_) total += std::norm(a);
    return total;
  }

  friend bool operator==(const StateVector&, const StateVector&) = default;

 private:
  StateVector() = default;

  static void check_width(std::size_t n) {
    if (n < 1 || n > kMaxQubits) {
      throw ContractViolation("qubit count " + std::to_string(n) +
                              " outside [1, " + std::to_string(kMaxQubits) +
                              "]");
    }
  }

  std::size_t n_qubits_ = 0;
  std::vector<Complex> amplitudes_;
};

enum class GateKind { RY, RZ, CX };

struct Gate {
  GateKind kind = GateKind::RY;
  std::size_t target = 0;
  std::size_t control = 0;  // CX only
  double angle = 0.0;       // radians; rotations only

  static Gate ry(std::size_t qubit, double theta) {
    return {GateKind::RY, qubit, 0, theta};
  }
  static Gate rz(std::size_t qubit, double theta) {
    return {GateKind::RZ, qubit, 0, theta};
  }
  static Gate cx(std::size_t control, std::size_t target) {
    return {GateKind::CX, target, control, 0.0};
  }

  // Gate that undoes this one.
  Gate inverse() const {
    Gate g = *this;
    if (kind != GateKind::CX) g.angle = -angle;
    return g;
  }

  friend bool operator==(const Gate&, const Gate&) = default;
};

inline void validate_gate(const Gate& gate, std::size_t n_qubits) {
  if (gate.target >= n_qubits) {
    throw ContractViolation("gate target " + std::to_string(gate.target) +
                            " out of range for " + std::to_string(n_qubits) +
                            " qubits");
  }
  if (gate.kind == GateKind::CX) {
    if (gate.control >= n_qubits) {
      throw ContractViolation("CX control " + std::to_string(gate.control) +
                              " out of range for " + std::to_string(n_qubits) +
                              " qubits");
    }
    if (gate.control == gate.target) {
      throw ContractViolation("CX control and target are both qubit " +
                              std::to_string(gate.target));
    }
  }
}

class Circuit {
 public:
  explicit Circuit(std::size_t n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
      throw ContractViolation("circuit qubit count " +
                              std::to_string(n_qubits) + " outside [1, " +
                              std::to_string(kMaxQubits) + "]");
    }
  }

  Circuit& add(const Gate& gate) {
    validate_gate(gate, n_qubits_);
    gates_.push_back(gate);
    return *this;
  }
  Circuit& ry(std::size_t q, double theta) { return add(Gate::ry(q, theta)); }
  Circuit& rz(std::size_t q, double theta) { return add(Gate::rz(q, theta)); }
  Circuit& cx(std::size_t c, std::size_t t) { return add(Gate::cx(c, t)); }

  void reserve(std::size_t count) { gates_.reserve(count); }

  std::size_t n_qubits() const noexcept { return n_qubits_; }
  std::size_t size() const noexcept { return gates_.size(); }
  std::span<const Gate> gates() const noexcept { return gates_; }

  friend bool operator==(const Circuit&, const Circuit&) = default;

 private:
  std::size_t n_qubits_;
  std::vector<Gate> gates_;
};

namespace detail {

inline void apply_ry(std::span<Complex> amps, std::size_t qubit, double theta) {
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  const std::size_t stride = std::size_t{1} << qubit;
  for (std::size_t base = 0; base < amps.size(); base += 2 * stride) {
    for (std::size_t j = base; j < base + stride; ++j) {
      const Complex a0 = amps[j];
      const Complex a1 = amps[j + stride];
      amps[j] = c * a0 - s * a1;
      amps[j + stride] = s * a0 + c * a1;
    }
  }
}

inline void apply_rz(std::span<Complex> amps, std::size_t qubit, double theta) {
  const Complex lower = std::polar(1.0, -0.5 * theta);
  const Complex upper = std::polar(1.0, 0.5 * theta);
  const std::size_t stride = std::size_t{1} << qubit;
  for (std::size_t base = 0; base < amps.size(); base += 2 * stride) {
    for (std::size_t j = base; j < base + stride; ++j) {
      amps[j] *= lower;
      amps[j + stride] *= upper;
    }
  }
}

inline void apply_cx(std::span<Complex> amps, std::size_t control,
                     std::size_t target) {
  const std::size_t cmask = std::size_t{1} << control;
  const std::size_t tmask = std::size_t{1} << target;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if ((i & cmask) != 0 && (i & tmask) == 0) std::swap(amps[i], amps[i | tmask]);
  }
}

}  // namespace detail

// In-place variant used on the hot path.
inline void apply_gate_inplace(StateVector& state, const Gate& gate) {
  validate_gate(gate, state.n_qubits());
  auto amps = state.amplitudes();
  switch (gate.kind) {
    case GateKind::RY:
      detail::apply_ry(amps, gate.target, gate.angle);
      break;
    case GateKind::RZ:
      detail::apply_rz(amps, gate.target, gate.angle);
      break;
    case GateKind::CX:
      detail::apply_cx(amps, gate.control, gate.target);
      break;
  }
}

inline StateVector apply_gate(StateVector state, const Gate& gate) {
  apply_gate_inplace(state, gate);
  return state;
}

inline void run_circuit_inplace(StateVector& state, const Circuit& circuit) {
  if (state.n_qubits() != circuit.n_qubits()) {
    throw ContractViolation("state has " + std::to_string(state.n_qubits()) +
                            " qubits but circuit has " +
                            std::to_string(circuit.n_qubits()));
  }
  for (const Gate& g : circuit.gates()) apply_gate_inplace(state, g);
}

inline StateVector run_circuit(StateVector initial, const Circuit& circuit) {
  run_circuit_inplace(initial, circuit);
  return initial;
}

inline std::vector<double> measurement_probabilities(const StateVector& state) {
  std::vector<double> probs;
  probs.reserve(state.size());
  for (const auto& a : state.amplitudes()) probs.push_back(std::norm(a));
  return probs;
}

}  // namespace phishvqc
