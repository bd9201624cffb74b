#ifndef SPECBVP_MODELS_HPP
#define SPECBVP_MODELS_HPP

#include "specbvp/fourier.hpp"
#include "specbvp/symbols.hpp"

namespace specbvp {

/// A boundary model ready for analysis: the adapted boundary operator A as
/// coefficient data, its principal symbol, the symbol of the interior
/// operator it came from, and sigma0 = sigma_D(tau) for the model operator
/// on the cylinder.
struct BoundaryModel {
  std::string name;
  OperatorData operator_data;
  SymbolField sigma_d;  // interior symbol (includes the dt direction)
  SymbolField sigma_a;  // adapted boundary symbol
  Matrix sigma0;        // sigma_D(x, tau), constant fiber matrix
  CovectorField tau;
};

/// Rank-2 operator on the circle whose principal symbol is a single Jordan
/// block: A = [[i, 1], [0, i]] d/dx. Per-mode blocks [[-k, ik], [0, -k]].
BoundaryModel nondiag_model();
FourierOperator build_nondiag(int cutoff);

/// Dirac operator on S^1 x [0, inf) with the tilted transversal
/// tau = dt + alpha dtheta: A = (alpha^2+1)^{-1} diag(1-i a, 1+i a) A_0
/// where A_0 = diag(i, -i) d/dtheta. Eigenvalues (1 -+ i a) k / (a^2 + 1).
BoundaryModel tilted_dirac_model(double alpha);
FourierOperator build_tilted_dirac(double alpha, int cutoff);

/// Clifford algebra of R^3 on 2-component spinors: gamma_j = i sigma_j
/// (Pauli), so gamma_i gamma_j + gamma_j gamma_i = -2 delta_ij and the
/// volume element e1 e2 e3 acts as +1.
struct CliffordModel {
  std::array<Matrix, 3> gamma;
  Matrix gamma_of(const Eigen::Vector3d& v) const;
};

CliffordModel clifford3();

/// Rarita-Schwinger data in dimension 3: the embedding iota: S -> S (x) T,
/// the Clifford contraction, the orthogonal projector pi^{3/2} onto the
/// 4-dimensional bundle of 3/2-spinors, and an orthonormal basis of it.
struct RaritaSchwingerModel {
  CliffordModel clifford;
  Matrix iota;       // 6 x 2
  Matrix contraction;  // 2 x 6, gamma(phi (x) e_j) = gamma_j phi
  Matrix projector;  // 6 x 6, pi^{3/2}
  Matrix basis;      // 6 x 4, orthonormal columns spanning ker(contraction)

  /// sigma_D(xi) on the ambient S (x) T for a real covector xi in R^3.
  Matrix ambient_symbol(const Eigen::Vector3d& xi) const;
  /// 4x4 matrix of sigma_D(xi) restricted to the 3/2-spinors.
  Matrix symbol(const Eigen::Vector3d& xi) const;
};

RaritaSchwingerModel rarita_schwinger();

/// (sigma_D restricted to S^{3/2}, sigma_A) with the transversal e1 and
/// boundary directions dx1 = e2, dx2 = e3.
std::pair<SymbolField, SymbolField> build_rs_symbols();

/// Adapted boundary operator of the Rarita-Schwinger operator on the flat
/// square 2-torus: A = sigma_A(dx1) d/dx1 + sigma_A(dx2) d/dx2, fiber dim 4,
/// per-mode blocks 2 pi i (k1 sigma_A(dx1) + k2 sigma_A(dx2)).
BoundaryModel rarita_schwinger_model();
FourierOperator build_rs_torus(int cutoff);

BoundaryModel model_by_name(const std::string& name, double alpha = 1.0);

}  // namespace specbvp

#endif
