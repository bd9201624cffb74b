#ifndef SPECBVP_SPECCALC_HPP
#define SPECBVP_SPECCALC_HPP

#include <functional>
#include <optional>
#include <vector>

#include "specbvp/fourier.hpp"
#include "specbvp/linalg.hpp"

namespace specbvp {

/// Admissible spectral cut: the vertical line Re z = r misses spec(A) with
/// margin epsilon (no eigenvalue has |Re lambda - r| < epsilon).
struct SpectralCut {
  double r = 0.0;
  double epsilon = 0.0;
};

/// Spectral data of A_r = A - r at an admissible cut: the projectors
/// chi^{+-}(A_r) onto the generalized eigenspaces with Re lambda >< 0, the
/// sign sgn(A_r) = chi^+ - chi^-, and the modulus |A_r| = sgn(A_r) A_r.
/// Everything is stored per diagonal block (per mode for constant
/// coefficients; one block for a dense operator).
struct SpectralSplit {
  SpectralCut cut;
  int fiber_dim = 0;
  BaseManifold base;
  std::vector<ModeIndex> modes;
  bool blocked = true;

  std::vector<Matrix> a_r;       // shifted operator
  std::vector<Matrix> chi_plus;  // spectral projector, Re > 0 part
  std::vector<Matrix> modulus;   // sgn(A_r) A_r
  std::vector<EigStructure> eigendata;        // of A_r, per block
  std::vector<FunctionCalculus> modulus_calc;  // reusable f(|A_r|) data

  double omega_r = 0.0;        // empirical bisectoriality angle of A_r
  double envelope_omega = 0.0;  // spec(A) within S_omega union B_R
  double envelope_R = 0.0;
  double opsect_lower = 0.0;  // ||A_r u|| and |||A_r| u|| equivalence
  double opsect_upper = 0.0;

  int nblocks() const { return static_cast<int>(a_r.size()); }
  Index block_size(int b) const { return a_r[static_cast<size_t>(b)].rows(); }
  Index block_offset(int b) const;
  Index dim() const;

  Matrix chi_minus(int b) const {
    return Matrix::Identity(block_size(b), block_size(b)) -
           chi_plus[static_cast<size_t>(b)];
  }
  Matrix sgn(int b) const {
    return 2.0 * chi_plus[static_cast<size_t>(b)] -
           Matrix::Identity(block_size(b), block_size(b));
  }

  Vector apply_chi_plus(const Vector& u) const;
  Vector apply_chi_minus(const Vector& u) const;
  Vector apply_modulus(const Vector& u) const;
  Vector apply_a_r(const Vector& u) const;

  /// f(|A_r|) per block from the stored calculus.
  std::vector<Matrix> modulus_function(const ScalarFunctionJet& fj) const;
  Vector apply_modulus_function(const ScalarFunctionJet& fj,
                                const Vector& u) const;

  std::vector<Complex> spectrum_a() const;  // spec(A) = spec(A_r) + r
};

Vector apply_blocks(const SpectralSplit& split, const std::vector<Matrix>& b,
                    const Vector& u);
Matrix assemble_blocks(const SpectralSplit& split,
                       const std::vector<Matrix>& b);
double blocks_spectral_norm(const std::vector<Matrix>& b);

/// Maximal-margin admissible cuts inside the window: midpoints of the gaps
/// between consecutive distinct values of {Re lambda}, each carrying half
/// the gap width as margin. Throws NoGapInWindow when none exists.
std::vector<SpectralCut> find_cuts(const FourierOperator& a, double window_lo,
                                   double window_hi,
                                   const Tolerances& tol = {});

/// Primary path: projectors from the ordered invariant-subspace
/// decomposition (complex Schur reordering plus a triangular Sylvester
/// solve), exact to solver precision.
SpectralSplit spectral_split_oracle(const FourierOperator& a,
                                    const SpectralCut& cut,
                                    const Tolerances& tol = {},
                                    int threads = 1);

/// Dunford contour quadrature for chi^+(A_r) along Re zeta = 0:
///   chi^+(A_r) = 1/2 + (i/2pi) PV int_{-iH}^{iH} zeta^{-1} A_r
///                (zeta - A_r)^{-1} dzeta  + tail(H),
/// with Gauss-Legendre panels geometrically graded toward 0 (the integrand
/// has a zeta^{-1} singular part, odd, cancelled by the symmetric node
/// layout) and an arctan-series tail correction for the truncation at H.
struct ContourQuadrature {
  double truncation = 0.0;    // H; 0 = auto (50 * max |spec|)
  int panels_per_decade = 6;
  int nodes_per_panel = 10;
  double inner = 0.0;  // innermost panel edge; 0 = auto (0.1 * min |spec|)
  int tail_terms = 5;
  double condition_limit = 1e13;
};

struct ContourProjector {
  std::vector<Matrix> chi_plus;
  double truncation_h = 0.0;
  double truncation_estimate = 0.0;  // norm of first dropped tail term
  double worst_resolvent_condition = 0.0;
  int nodes_used = 0;
};

ContourProjector spectral_split_contour(const FourierOperator& a,
                                        const SpectralCut& cut,
                                        const ContourQuadrature& quad = {},
                                        const Tolerances& tol = {},
                                        int threads = 1);

/// |A_r|^s (principal branch; spectrum of the modulus lies in Re > 0).
std::vector<Matrix> modulus_power(const SpectralSplit& split, double s);

/// exp(-t |A_r|), t >= 0.
std::vector<Matrix> semigroup(const SpectralSplit& split, double t);

/// exp(-zeta |A_r|) for complex time in the closed right half-plane
/// (holomorphic extension of the semigroup).
std::vector<Matrix> semigroup(const SpectralSplit& split, Complex zeta);

/// Psi-class function on a sector: |psi(z)| <= C min(|z|^alpha, |z|^-alpha),
/// holomorphic on |arg z| < holomorphy_angle.
struct PsiFunction {
  std::function<Complex(Complex)> f;
  double alpha = 1.0;
  double holomorphy_angle = 1.35;  // radians; slightly under pi/2 by default
  ScalarFunctionJet jet() const;   // derivatives via Cauchy circles
};

/// t z e^{-tz}-type decay family psi_alpha(z) = z^alpha exp(-z).
PsiFunction psi_alpha(double alpha);

enum class PsiMethod { Eigen, Contour };

struct PsiResult {
  std::vector<Matrix> value;
  double quadrature_estimate = 0.0;  // contour method only
};

PsiResult psi_calculus(const SpectralSplit& split, const PsiFunction& psi,
                       PsiMethod method, const Tolerances& tol = {});

/// Log-spaced evaluation grid for the square function integral.
struct LogGrid {
  double t_min = 0.0;  // 0 = auto from the spectral range
  double t_max = 0.0;
  int points = 400;
};

struct QuadraticEstimateResult {
  double integral = 0.0;
  double ratio = 0.0;  // integral / ||u||^2
  std::optional<double> analytic = {};  // per-eigenvalue value, normal case
  double truncation_estimate = 0.0;
};

/// int_0^inf || psi(t |A_r|) u ||^2 dt/t by log-trapezoid quadrature.
QuadraticEstimateResult quadratic_estimate(const SpectralSplit& split,
                                           const Vector& u,
                                           const PsiFunction& psi,
                                           const LogGrid& grid = {});

/// Batched form: one result per column (the per-grid-point matrices are
/// shared across columns); the analytic reference is skipped.
std::vector<QuadraticEstimateResult> quadratic_estimate_batch(
    const SpectralSplit& split, const Matrix& u_cols, const PsiFunction& psi,
    const LogGrid& grid = {});

struct AdjointConsistencyReport {
  double projector_deviation = 0.0;  // || chi+(A_r)^H - chi+(A_r^*) ||
  double modulus_deviation = 0.0;    // || |A_r|^H - |A_r^*| ||
  double restriction_smin_plus = 0.0;   // chi+(A_r^*)|ran chi+(A_r)
  double restriction_smin_minus = 0.0;  // chi-(A_r^*)|ran chi-(A_r)
  bool pass = false;
};

/// Verifies chi^{+-}(A_r)^* = chi^{+-}(A_r^*), |A_r|^* = |A_r^*|, and the
/// restriction isomorphisms between the ranges on both sides.
AdjointConsistencyReport adjoint_split_consistency(const FourierOperator& a,
                                                   const SpectralCut& cut,
                                                   double tolerance = 1e-8,
                                                   const Tolerances& tol = {});

/// Empirical resolvent bound sup |zeta| ||(zeta - A_r)^{-1}|| over log-spaced
/// zeta on the four rays of angle mu (requires mu > omega_r).
double resolvent_certificate(const SpectralSplit& split, double mu,
                             int samples = 40);

/// Rank of chi^+(A_r) - chi^+(A_q) plus the residual of its range against
/// the span of the generalized eigenvectors with Re between q and r.
struct CutTranslationReport {
  int rank = 0;
  int strip_count = 0;
  double range_residual = 0.0;
};

CutTranslationReport cut_translation(const SpectralSplit& split_r,
                                     const SpectralSplit& split_q,
                                     const Tolerances& tol = {});

/// Algebraic count of eigenvalues of A with Re in the open strip (lo, hi).
int strip_count(const FourierOperator& a, double lo, double hi,
                const Tolerances& tol = {});

}  // namespace specbvp

#endif
