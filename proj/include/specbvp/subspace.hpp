#ifndef SPECBVP_SUBSPACE_HPP
#define SPECBVP_SUBSPACE_HPP

#include "specbvp/linalg.hpp"

namespace specbvp {

/// Closed subspace of the truncated coefficient space, stored as a basis
/// with orthonormal columns, tagged with the Sobolev order of the norm it is
/// orthonormal in (s = 0: plain L^2; otherwise the creator orthonormalised
/// against the corresponding weight).
struct Subspace {
  Matrix basis;
  double s = 0.0;

  Index ambient() const { return basis.rows(); }
  Index dim() const { return basis.cols(); }

  static Subspace zero(Index ambient, double s = 0.0) {
    Subspace out;
    out.basis = Matrix(ambient, 0);
    out.s = s;
    return out;
  }
};

/// Subspace from a spanning set (L^2-orthonormalised).
Subspace span_of(const Matrix& spanning, double s = 0.0,
                 const Tolerances& tol = {});

Subspace intersection(const Subspace& x, const Subspace& y,
                      const Tolerances& tol = {});

Subspace subspace_sum(const Subspace& x, const Subspace& y,
                      const Tolerances& tol = {});

/// Annihilator {v : <u, v> = 0 for all u in x} w.r.t. the L^2 pairing.
Subspace annihilator(const Subspace& x, const Tolerances& tol = {});

/// Annihilator w.r.t. the pairing beta(u, v) = u^H G v.
Subspace annihilator(const Subspace& x, const Matrix& gram,
                     const Tolerances& tol = {});

/// Orthogonal complement (L^2).
Subspace complement(const Subspace& x, const Tolerances& tol = {});

/// Distance of v from the subspace, relative to |v|.
double distance_to(const Subspace& x, const Vector& v);

/// Symmetric gap between the spans (norm of the difference of orthogonal
/// projectors).
double subspace_gap(const Subspace& x, const Subspace& y);

/// The projector P_{X,Y} with range X and kernel Y; requires X + Y to be a
/// direct sum spanning the ambient space.
Matrix oblique_projector(const Subspace& range, const Subspace& kernel,
                         const Tolerances& tol = {});

struct FredholmPairReport {
  int dim_intersection = 0;
  int dim_cokernel = 0;
  int index = 0;
  bool ambiguous = false;
  double tau = 0.0;
};

/// In the truncated space every pair is Fredholm; the report carries the
/// quantitative content indx(X, Y) = dim(X cap Y) - dim coker(X, Y).
/// Throws AmbiguousRank when a singular value falls in the ambiguity band.
FredholmPairReport fredholm_pair(const Subspace& x, const Subspace& y,
                                 const Tolerances& tol = {});

struct ProjDiffReport {
  bool difference_invertible = false;  // (i)   P - Q invertible
  bool adjoint_pair_iso = false;       // (ii)  P|ker Q and P*|ker Q* iso
  bool restriction_pair_iso = false;   // (iii) P|ker Q and (1-P)|ran Q iso
  bool consistent = false;             // (i) <=> (ii) <=> (iii)
  double smin_difference = 0.0;
  double smin_p_on_ker_q = 0.0;
  double smin_pstar_on_ker_qstar = 0.0;
  double smin_complement_on_ran_q = 0.0;
  bool ambiguous = false;
};

/// The three equivalent invertibility criteria for a pair of (non-orthogonal)
/// projectors on a finite-dimensional space.
ProjDiffReport projdiff_check(const Matrix& p, const Matrix& q,
                              const Tolerances& tol = {});

}  // namespace specbvp

#endif
