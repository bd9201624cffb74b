#ifndef SPECBVP_LINALG_HPP
#define SPECBVP_LINALG_HPP

#include <functional>
#include <vector>

#include "specbvp/types.hpp"

namespace specbvp {

/// Complex Schur form Q T Q^H with the eigenvalues satisfying `select`
/// moved to the leading diagonal positions of T.
struct OrderedSchur {
  Matrix q;
  Matrix t;
  Index n_selected = 0;
};

OrderedSchur ordered_schur(const Matrix& m,
                           const std::function<bool(Complex)>& select);

/// Solves T11 X - X T22 = C for upper-triangular T11, T22 with disjoint
/// spectra (column back-substitution).
Matrix triangular_sylvester(const Matrix& t11, const Matrix& t22,
                            const Matrix& c);

/// Spectral (Riesz) projector onto the invariant subspace of the selected
/// eigenvalues, along the complementary invariant subspace. Non-orthogonal
/// in general.
Matrix spectral_projector(const Matrix& m,
                          const std::function<bool(Complex)>& select);

/// One eigenvalue cluster of a matrix: the merged eigenvalue, its algebraic
/// and geometric multiplicities, and an orthonormal basis of the associated
/// generalized eigenspace (invariant subspace).
struct EigCluster {
  Complex lambda;
  int algebraic = 0;
  int geometric = 0;
  Matrix basis;
};

struct EigStructure {
  std::vector<EigCluster> clusters;  // sorted by (Re, Im)
  int total_algebraic() const;
};

/// Eigenvalues within cluster_rel * max(1,|lambda|) of each other are merged;
/// throws ClusterAmbiguity when distinct clusters come closer than ten times
/// the merge radius.
EigStructure eig_structure(const Matrix& m, const Tolerances& tol = {});

/// Scalar function together with its derivatives: fj(lambda, j) returns the
/// j-th derivative of f at lambda.
using ScalarFunctionJet = std::function<Complex(Complex, int)>;

/// f(M) through the spectral decomposition: cluster the eigenvalues, block
/// diagonalize via Sylvester transforms, apply the truncated Taylor expansion
/// f(lambda + N) = sum_j f^(j)(lambda)/j! N^j on each block.
Matrix matrix_function(const Matrix& m, const ScalarFunctionJet& fj,
                       const Tolerances& tol = {});

/// Reusable form of the decomposition behind matrix_function: M = S D S^-1
/// where D is block diagonal with blocks lambda*I + N.
struct FunctionCalculus {
  Matrix s;
  Matrix s_inv;
  struct Block {
    Complex lambda;
    Matrix nilpotent;  // strictly small part, size = algebraic multiplicity
    Index offset;
    Index size;
  };
  std::vector<Block> blocks;
  Index dim() const { return s.rows(); }

  Matrix evaluate(const ScalarFunctionJet& fj) const;
  Vector apply(const ScalarFunctionJet& fj, const Vector& u) const;
};

FunctionCalculus function_calculus(const Matrix& m, const Tolerances& tol = {});

/// Numerical rank from singular values against tau = tol.rank_threshold(s0).
/// ambiguous is set when some singular value falls inside the band
/// [tau, ambiguity_band * tau]; callers decide whether that is fatal.
struct RankDecision {
  Index rank = 0;
  bool ambiguous = false;
  double tau = 0.0;
  double smallest_accepted = 0.0;
  double largest_rejected = 0.0;
};

RankDecision rank_decision(const Eigen::VectorXd& singular_values,
                           const Tolerances& tol, double scale_hint = 0.0);

/// Orthonormal basis of the column space (SVD-based, rank by rank_decision).
Matrix orth(const Matrix& m, const Tolerances& tol = {},
            RankDecision* decision = nullptr);

/// Orthonormal basis of the null space.
Matrix nullspace(const Matrix& m, const Tolerances& tol = {},
                 RankDecision* decision = nullptr);

double spectral_norm(const Matrix& m);

/// Smallest singular value (0 for empty matrices).
double smallest_singular_value(const Matrix& m);

/// j-th derivative of a holomorphic function at z by the Cauchy integral
/// over a circle of the given radius (trapezoid rule, spectrally accurate).
Complex cauchy_derivative(const std::function<Complex(Complex)>& f, Complex z,
                          int order, double radius, int nodes = 48);

}  // namespace specbvp

#endif
