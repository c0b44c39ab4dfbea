// Independent dense-matrix reference for the simulator. Every gate is
// expanded to a full 2^n x 2^n unitary by Kronecker products and the state
// is advanced by plain matrix-vector multiplication.
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "phishvqc/qsim.hpp"

namespace oracle {

using C = std::complex<double>;

struct Matrix {
  std::size_t dim = 0;
  std::vector<C> a;  // row-major

  explicit Matrix(std::size_t d) : dim(d), a(d * d, C{0.0, 0.0}) {}
  C& operator()(std::size_t r, std::size_t c) { return a[r * dim + c]; }
  C operator()(std::size_t r, std::size_t c) const { return a[r * dim + c]; }

  static Matrix identity(std::size_t d) {
    Matrix m(d);
    for (std::size_t i = 0; i < d; ++i) m(i, i) = 1.0;
    return m;
  }
};

inline Matrix kron(const Matrix& x, const Matrix& y) {
  Matrix out(x.dim * y.dim);
  for (std::size_t i = 0; i < x.dim; ++i)
    for (std::size_t j = 0; j < x.dim; ++j)
      for (std::size_t k = 0; k < y.dim; ++k)
        for (std::size_t l = 0; l < y.dim; ++l)
          out(i * y.dim + k, j * y.dim + l) = x(i, j) * y(k, l);
  return out;
}

inline Matrix add(const Matrix& x, const Matrix& y) {
  Matrix out(x.dim);
  for (std::size_t i = 0; i < out.a.size(); ++i) out.a[i] = x.a[i] + y.a[i];
  return out;
}

inline Matrix two_by_two(C a00, C a01, C a10, C a11) {
  Matrix m(2);
  m(0, 0) = a00;
  m(0, 1) = a01;
  m(1, 0) = a10;
  m(1, 1) = a11;
  return m;
}

// Tensor product with qubit n-1 as the leftmost factor, so that qubit k
// acts on bit k of the basis index.
inline Matrix embed(std::size_t n, const std::vector<std::pair<std::size_t, Matrix>>& factors) {
  Matrix out = Matrix::identity(1);
  for (std::size_t q = n; q-- > 0;) {
    Matrix f = Matrix::identity(2);
    for (const auto& [qubit, m] : factors)
      if (qubit == q) f = m;
    out = kron(out, f);
  }
  return out;
}

inline Matrix gate_matrix(std::size_t n, const phishvqc::Gate& g) {
  using phishvqc::GateKind;
  switch (g.kind) {
    case GateKind::RY: {
      const double c = std::cos(g.angle / 2), s = std::sin(g.angle / 2);
      return embed(n, {{g.target, two_by_two(c, -s, s, c)}});
    }
    case GateKind::RZ: {
      const C lo = std::exp(C{0.0, -g.angle / 2}), hi = std::exp(C{0.0, g.angle / 2});
      return embed(n, {{g.target, two_by_two(lo, 0.0, 0.0, hi)}});
    }
    case GateKind::CX: {
      const Matrix p0 = two_by_two(1.0, 0.0, 0.0, 0.0);
      const Matrix p1 = two_by_two(0.0, 0.0, 0.0, 1.0);
      const Matrix x = two_by_two(0.0, 1.0, 1.0, 0.0);
      return add(embed(n, {{g.control, p0}}), embed(n, {{g.control, p1}, {g.target, x}}));
    }
  }
  return Matrix::identity(std::size_t{1} << n);
}

inline std::vector<C> matvec(const Matrix& m, const std::vector<C>& v) {
  std::vector<C> out(m.dim, C{0.0, 0.0});
  for (std::size_t r = 0; r < m.dim; ++r)
    for (std::size_t c = 0; c < m.dim; ++c) out[r] += m(r, c) * v[c];
  return out;
}

inline std::vector<C> simulate(std::size_t n, std::span<const phishvqc::Gate> gates,
                               std::vector<C> state) {
  for (const auto& g : gates) state = matvec(gate_matrix(n, g), state);
  return state;
}

inline phishvqc::Gate random_gate(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(-2 * std::numbers::pi, 2 * std::numbers::pi);
  std::uniform_int_distribution<std::size_t> qubit(0, n - 1);
  std::uniform_int_distribution<int> kind(0, n > 1 ? 2 : 1);
  switch (kind(rng)) {
    case 0: return phishvqc::Gate::ry(qubit(rng), angle(rng));
    case 1: return phishvqc::Gate::rz(qubit(rng), angle(rng));
    default: {
      const std::size_t c = qubit(rng);
      std::size_t t = qubit(rng);
      while (t == c) t = qubit(rng);
      return phishvqc::Gate::cx(c, t);
    }
  }
}

inline phishvqc::Circuit random_circuit(std::size_t n, std::size_t gates, std::mt19937_64& rng) {
  phishvqc::Circuit circuit(n);
  for (std::size_t i = 0; i < gates; ++i) circuit.add(random_gate(n, rng));
  return circuit;
}

}  // namespace oracle
