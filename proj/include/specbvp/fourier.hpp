#ifndef SPECBVP_FOURIER_HPP
#define SPECBVP_FOURIER_HPP

#include <map>
#include <utility>
#include <vector>

#include "specbvp/linalg.hpp"
#include "specbvp/types.hpp"

namespace specbvp {

/// Base manifold of the boundary operator: the circle of a given
/// circumference (plane-wave basis e^{i 2 pi n x / L}) or the square flat
/// 2-torus R^2 / Z^2 (basis e^{2 pi i <k,x>}, dual lattice Z^2).
struct BaseManifold {
  enum Kind { Circle, Torus2 } kind = Circle;
  double circumference = 2.0 * pi;  // Circle only

  int base_dim() const { return kind == Circle ? 1 : 2; }
  /// Frequency of mode k in direction j: d/dx_j e_k = i * freq * e_k.
  double frequency(int kj) const {
    return kind == Circle ? 2.0 * pi * kj / circumference : 2.0 * pi * kj;
  }
};

struct ModeIndex {
  int k1 = 0;
  int k2 = 0;

  bool operator<(const ModeIndex& o) const {
    return k1 != o.k1 ? k1 < o.k1 : k2 < o.k2;
  }
  bool operator==(const ModeIndex& o) const { return k1 == o.k1 && k2 == o.k2; }
};

/// Finite matrix-valued Fourier series in the base variable.
struct MatrixSeries {
  int fiber_dim = 0;
  std::map<ModeIndex, Matrix> coeff;

  bool empty() const { return coeff.empty(); }
  bool constant() const;
  int bandwidth() const;
  static MatrixSeries constant_series(const Matrix& m);
};

/// First-order differential operator sum_j B_j(x) d/dx_j + C(x) given by
/// matrix Fourier coefficient data.
struct OperatorData {
  int fiber_dim = 0;
  BaseManifold base;
  std::vector<MatrixSeries> first_order;  // one series per base direction
  MatrixSeries zero_order;
};

/// Fourier truncation of an OperatorData at |k_j| <= N. Constant-coefficient
/// operators keep the per-mode block list {M_k}; variable coefficients are
/// assembled into one dense matrix over the truncated coefficient space.
/// Mode ordering is lexicographic by (k1, k2), fiber index fastest.
struct FourierOperator {
  OperatorData data;
  int cutoff = 0;
  std::vector<ModeIndex> modes;
  std::vector<Matrix> blocks;  // per-mode blocks (constant coefficients)
  Matrix dense;                // dense matrix (variable coefficients)

  bool block_diagonal() const { return !blocks.empty(); }
  int fiber_dim() const { return data.fiber_dim; }
  Index dim() const {
    return static_cast<Index>(modes.size()) * data.fiber_dim;
  }
  Index mode_offset(std::size_t mode_pos) const {
    return static_cast<Index>(mode_pos) * data.fiber_dim;
  }
  std::size_t mode_position(const ModeIndex& k) const;

  /// Matrix-vector product, per-mode fast path when blocks exist.
  Vector apply(const Vector& u) const;
};

FourierOperator assemble(const OperatorData& data, int cutoff);

FourierOperator adjoint(const FourierOperator& op);

/// Union over modes of spec(M_k) (or dense eigenvalues), sorted by (Re, Im).
std::vector<Complex> spectrum(const FourierOperator& op);

Matrix dense_matrix(const FourierOperator& op);

FourierOperator shift(const FourierOperator& op, Complex c);

/// Scales the whole operator (all blocks / the dense matrix) by c.
FourierOperator scale(const FourierOperator& op, Complex c);

std::vector<ModeIndex> mode_set(const BaseManifold& base, int cutoff);

}  // namespace specbvp

#endif
