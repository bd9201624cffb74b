#ifndef SPECBVP_CYLINDER_HPP
#define SPECBVP_CYLINDER_HPP

#include "specbvp/sobolev.hpp"
#include "specbvp/subspace.hpp"

namespace specbvp {

/// Uniform grid 0 = t_0 < ... < t_J = rho on the model cylinder.
struct TimeGrid {
  double rho = 1.0;
  int steps = 256;

  double dt() const { return rho / steps; }
  double t(int j) const { return rho * j / steps; }
  int nodes() const { return steps + 1; }
};

/// Field on the cylinder: one coefficient vector per grid node.
struct CylinderField {
  TimeGrid grid;
  Matrix values;  // dim x (J+1), column j = u(t_j)
  std::string equation;
  double residual = 0.0;

  Index dim() const { return values.rows(); }
  Vector at(int j) const { return values.col(j); }
};

CylinderField zero_field(const TimeGrid& grid, Index dim);

/// Discrete L^2(Z) norm (trapezoid in t, plane-wave l^2 in x).
double cylinder_l2_norm(const CylinderField& u);
Complex cylinder_l2_inner(const CylinderField& u, const CylinderField& v);

/// Plateau cutoff: 1 on [0, t_c/2], 0 from 2 t_c/3 on, C^2 smoothstep in
/// between.
double cutoff_eta(double t, double t_c);

/// Boundary extension (E u)(t) = eta(t) exp(-t |A_r|) u; trace at t = 0 is
/// exactly u.
CylinderField extension(const Vector& u_bdy, const SpectralSplit& split,
                        const TimeGrid& grid, double t_c = 0.0);

/// W(t; f) = int_0^t exp(-(t-s)|A_r|) f(s) ds by the exponential-trapezoidal
/// rule (exact per-step propagation, linear source coupling): second order
/// in dt, A-stable.
CylinderField duhamel(const CylinderField& f, const SpectralSplit& split);

/// S_{0,r} u(t) = int_0^t e^{-(t-s)|A_r|} chi^+ u(s) ds
///              - int_t^rho e^{-(s-t)|A_r|} chi^- u(s) ds,
/// the explicit right inverse of sigma0^{-1} D_{0,r}.
CylinderField solution_operator(const CylinderField& u,
                                const SpectralSplit& split);

/// sigma0 (d/dt + A_r) u with second-order finite differences in t.
CylinderField model_operator_apply(const CylinderField& u,
                                   const SpectralSplit& split,
                                   const Matrix& sigma0);

/// Formal adjoint -(sigma0^H d/dt - A_r^H sigma0^H) v.
CylinderField model_operator_adjoint_apply(const CylinderField& v,
                                           const SpectralSplit& split,
                                           const Matrix& sigma0);

/// (1 - S_{0,r} sigma0^{-1} D_{0,r}) u - exp(-t|A_r|) chi^+(A_r) u(0);
/// vanishes to discretization order when chi^-(A_r) u(rho) = 0.
CylinderField reginv_defect(const CylinderField& u, const SpectralSplit& split,
                            const Matrix& sigma0,
                            double precondition_tol = 1e-8);

/// Model boundary value problem sigma0 (d/dt + A_r) u = f with
/// u(0) in bc_left and u(rho) in bc_right.
struct CylinderProblem {
  SpectralSplit split;
  Matrix sigma0;
  TimeGrid grid;
  Subspace bc_left;
  Subspace bc_right;
  CylinderField source;
};

struct SolveReport {
  CylinderField solution;
  double residual = 0.0;    // least-squares residual of the discrete system
  double smin = 0.0;        // smallest singular value of the system
  int kernel_dim = 0;
  int cokernel_dim = 0;
  Matrix kernel_basis;      // space-time kernel directions (columns)
  bool singular = false;
};

/// Implicit-trapezoidal space-time system with annihilator boundary rows,
/// solved in the least-squares sense. A detected kernel is returned in the
/// report, not thrown.
SolveReport solve_bvp(const CylinderProblem& prob, const Tolerances& tol = {});

/// The two spectral boundary conditions of the regularity isomorphism:
/// chi^-(A_r) u(0) side and chi^+(A_r) u(rho) side.
CylinderProblem b0_problem(const SpectralSplit& split, const Matrix& sigma0,
                           const TimeGrid& grid, const CylinderField& f,
                           const Tolerances& tol = {});

/// Fredholm index of the strip: APS-type conditions built at cut r2 on the
/// left and r on the right produce index = #{r < Re lambda < r2} (algebraic
/// count, sign flipped when r > r2). Computed two ways: rank counts of the
/// discrete space-time system (per mode), and the per-mode fundamental
/// solution exp(-rho(M_k - c)) with a boundary projector rank test.
struct IndexReport {
  int index_discrete = 0;
  int kernel_discrete = 0;
  int cokernel_discrete = 0;
  int index_oracle = 0;
  int kernel_oracle = 0;
  int cokernel_oracle = 0;
  int strip = 0;
  bool agree = false;
};

IndexReport index_strip(const FourierOperator& a, double r, double r2,
                        double rho = 0.5, int steps = 24,
                        const Tolerances& tol = {});

/// Green's formula defect on the two-ended cylinder:
///   <D0 u, v> - <u, D0^dagger v> + <sigma0 u(0), v(0)> - <sigma0 u(rho), v(rho)>.
Complex greens_defect(const CylinderField& u, const CylinderField& v,
                      const SpectralSplit& split, const Matrix& sigma0);

/// Discrete anisotropic H^k norm sum_l ||  |A_r|^l d_t^{k-l} u ||_{L^2}.
double cylinder_hk_norm(const CylinderField& u, const SpectralSplit& split,
                        int k);

/// Exact discrete maximal-regularity constant: the operator norm of
/// f -> (d_t W, |A_r| W) between trapezoid-weighted L^2 spaces, maximized
/// over modes.
double maximal_regularity_constant(const SpectralSplit& split,
                                   const TimeGrid& grid);

struct TraceBoundReport {
  double restriction_constant = 0.0;  // sup |u(0)|_check / |u|_{D0}
  double extension_constant = 0.0;    // sup |E u|_{D0} / |u|_check
  int samples = 0;
  std::uint64_t seed = 0;
};

TraceBoundReport trace_bound_report(const SpectralSplit& split,
                                    const Matrix& sigma0,
                                    const TimeGrid& grid, int samples,
                                    std::uint64_t seed = 7);

}  // namespace specbvp

#endif
