#ifndef SPECBVP_FREDPAIR_HPP
#define SPECBVP_FREDPAIR_HPP

#include <functional>

#include "specbvp/sobolev.hpp"
#include "specbvp/subspace.hpp"
#include "specbvp/symbols.hpp"

namespace specbvp {

Matrix chi_plus_dense(const SpectralSplit& split);
Matrix chi_minus_dense(const SpectralSplit& split);

/// Atiyah-Patodi-Singer condition: B = chi^-(A_r) H^{1/2}.
Subspace aps_condition(const SpectralSplit& split, const Tolerances& tol = {});

/// Graph condition B = {v + g v : v in ran chi^-} (+) span(extra_plus),
/// with g given as a matrix from the canonical basis of ran chi^- to the
/// canonical basis of ran chi^+ (the orthonormal bases returned by
/// graph_condition_bases).
struct GraphConditionBases {
  Subspace minus;
  Subspace plus;
};

GraphConditionBases graph_condition_bases(const SpectralSplit& split,
                                          const Tolerances& tol = {});

Subspace graph_condition(const SpectralSplit& split, const Matrix& g,
                         const Matrix& extra_plus = Matrix(),
                         const Tolerances& tol = {});

/// Local condition from a constant fiber projector: B = ran(P) per mode.
Subspace local_condition(const SpectralSplit& split,
                         const Matrix& fiber_projector,
                         const Tolerances& tol = {});

/// The adjoint boundary condition, realized on the A^*-side:
/// sigma0^* B^* is the L^2-pairing annihilator of B (intersected with the
/// hat space, which is the whole truncation here); B^* itself is obtained
/// by (sigma0^*)^{-1} applied fiberwise.
struct AdjointCondition {
  Subspace sigma0_star_b_star;  // E-side, H^{1/2} tag
  Subspace b_star;              // F-side
};

AdjointCondition adjoint_condition(const Subspace& b, const Matrix& sigma0,
                                   int fiber_dim,
                                   const Tolerances& tol = {});

/// Fredholm-pair decomposition: checks the pairs
///   (chi^+(A_r) H^{1/2}, B)  and  (chi^-(A_r^*) H^{1/2}, B^perp)
/// and the index antisymmetry between them. B^perp is the annihilator of B
/// under the H^{1/2} x H^{-1/2} duality (the L^2 pairing); the annihilator
/// within the H^{1/2} inner product is evaluated alongside for comparison.
struct FpDecompositionReport {
  FredholmPairReport pair_plus;
  FredholmPairReport pair_minus;
  FredholmPairReport pair_minus_h12_inner;
  bool index_antisymmetric = false;
  bool pass = false;
};

FpDecompositionReport fp_decomposition_check(const Subspace& b,
                                             const SpectralSplit& split,
                                             const SpectralSplit& split_star,
                                             const Tolerances& tol = {});

/// The eight spaces of the elliptic decomposition together with the graph
/// maps, extracted from B and its adjoint condition:
///   W+ = ran chi+ cap B                W+* = chi+(A_r^*) W+
///   W-* = ran chi-(A_r^*) cap ann(B)   W-  = chi-(A_r) W-*
///   V-* = ran chi-(A_r^*) cap (W-*)^perp,  V- = chi-(A_r) V-*
///   V+  = ran chi+(A_r) cap W+^perp,       V+* = chi+(A_r^*) V+
/// and B = W+ (+) {v + g v : v in V-}, with g = P_+ o (chi^-|_{B cap W+^perp})^{-1}.
struct EllipticDecomposition {
  Subspace w_plus, w_minus, v_plus, v_minus;
  Subspace w_plus_star, w_minus_star, v_plus_star, v_minus_star;
  Matrix g;       // V- coords -> V+ coords
  Matrix g_star;  // V+* coords -> V-* coords (duality adjoint, = -h0)
  double reconstruction_residual = 0.0;
  double adjoint_reconstruction_residual = 0.0;
  double splitting_residual = 0.0;  // V+- (+) W+- against ran chi+-
};

EllipticDecomposition extract_elliptic_decomposition(
    const Subspace& b, const SpectralSplit& split,
    const SpectralSplit& split_star, double residual_tol = 1e-9,
    const Tolerances& tol = {});

/// The graph map as a full matrix on the coefficient space (zero outside
/// span V-): basis-independent representation for comparisons.
Matrix graph_map_matrix(const EllipticDecomposition& dec);

/// Quantitative semiregularity data at Sobolev order s: the H^s -> H^s
/// operator norm of g restricted to V-, and the constant in
/// |v + g v|_s <= C |v|_s over the graph part of B.
struct SemiregularityReport {
  double g_norm = 0.0;
  double graph_constant = 0.0;
  double w_plus_norm = 0.0;  // largest H^s norm over the W+ basis
  double s = 0.0;
};

SemiregularityReport semiregularity_check(const EllipticDecomposition& dec,
                                          const SpectralSplit& split, double s,
                                          SobolevMetric::Kind kind =
                                              SobolevMetric::Modulus);

/// Symbol-level ellipticity test for pseudo-local conditions: at each sample
/// (x, xi), sigma_P restricts to an isomorphism from the sum of generalized
/// eigenspaces of i sigma_A(x, xi) with negative real part onto ran sigma_P,
/// and likewise for the adjoint symbols.
using ProjectorSymbol =
    std::function<Matrix(const RealVector& x, const RealVector& xi)>;

struct PseudoLocalReport {
  struct Sample {
    CosphereSample at;
    bool pass = false;
    double margin = 0.0;
    double margin_adjoint = 0.0;
  };
  std::vector<Sample> samples;
  bool pass = false;
};

PseudoLocalReport pseudo_local_symbol_test(
    const ProjectorSymbol& sigma_p, const SymbolField& sigma_a,
    const std::vector<CosphereSample>& grid, const Tolerances& tol = {});

}  // namespace specbvp

#endif
