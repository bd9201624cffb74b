#ifndef SPECBVP_SYMBOLS_HPP
#define SPECBVP_SYMBOLS_HPP

#include <string>
#include <vector>

#include "specbvp/fourier.hpp"
#include "specbvp/linalg.hpp"

namespace specbvp {

/// Matrix-valued principal symbol of a first-order operator: the order-one
/// part is stored per named cotangent direction as a matrix Fourier series
/// in the base point x, plus an x-dependent order-zero part.
/// eval(x, xi) = sum_j xi_j B_j(x) + C(x).
struct SymbolField {
  int fiber_dim = 0;
  int base_dim = 1;  // boundary dimension (1 or 2)
  BaseManifold base;
  std::vector<std::string> direction_names;
  std::vector<MatrixSeries> directions;  // order-one coefficients
  MatrixSeries zero_order;

  Matrix eval(const RealVector& x, const RealVector& xi) const;
  Matrix eval_principal(const RealVector& x, const RealVector& xi) const;
  std::size_t direction_index(const std::string& name) const;
};

/// Covector field expressed in the symbol's named directions; constant
/// coefficients (the product model).
struct CovectorField {
  std::vector<std::string> direction_names;
  RealVector coefficients;
};

struct CosphereSample {
  RealVector x;
  RealVector xi;  // unit covector w.r.t. the listed directions
};

/// Default cosphere sampling: the circle uses xi in {+1, -1}; the 2-torus
/// uses n_angles equispaced unit covectors. Base points from the symbol's
/// coefficient resolution (single point for constant coefficients).
std::vector<CosphereSample> default_cosphere_grid(const SymbolField& sigma,
                                                  int n_angles = 64);

/// sigma_A(x, xi) = sigma_D(x, tau(x))^{-1} sigma_D(x, xi) restricted to the
/// cotangent directions of the boundary (all directions of sigma_D except
/// those spanned by tau's transversal component).
/// tangential_names lists the directions that survive the restriction.
SymbolField adapted_symbol(const SymbolField& sigma_d, const CovectorField& tau,
                           const std::vector<std::string>& tangential_names,
                           const Tolerances& tol = {});

struct EllipticityReport {
  bool elliptic = false;
  double worst_smin = 0.0;
  double worst_condition = 0.0;
  CosphereSample minimizer;
};

EllipticityReport check_ellipticity(const SymbolField& sigma,
                                    const std::vector<CosphereSample>& grid,
                                    const Tolerances& tol = {});

struct BisectorReport {
  double nu = 0.0;            // largest angle with spec avoiding S_nu
  double min_real_gap = 0.0;  // min |Im lambda| over unit cosphere samples
  struct Sample {
    CosphereSample at;
    std::vector<Complex> eigenvalues;
  };
  std::vector<Sample> samples;
};

/// Largest nu such that no sampled eigenvalue of the (principal part of the)
/// adapted symbol on the unit cosphere lies in the open bisector S_nu.
/// Throws RealEigenvalueFound if a sampled eigenvalue sits on the real axis
/// within tolerance (contradicts ellipticity).
BisectorReport bisector_angle(const SymbolField& sigma_a,
                              const std::vector<CosphereSample>& grid,
                              const Tolerances& tol = {});

/// Eigenvalue/Jordan structure report, spec'd in terms of rank-revealing
/// decompositions of (M - lambda)^j; thin wrapper over eig_structure.
EigStructure symbol_eig_structure(const Matrix& m, const Tolerances& tol = {});

/// Assembles the first-order operator whose coefficient data is the symbol
/// restricted to the boundary directions (used by the model builders).
OperatorData operator_from_symbol(const SymbolField& sigma);

}  // namespace specbvp

#endif
