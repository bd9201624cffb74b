#include <doctest.h>

#include "specbvp/cylinder.hpp"
#include "specbvp/fredpair.hpp"
#include "specbvp/models.hpp"
#include "test_helpers.hpp"

using namespace specbvp;

TEST_SUITE_BEGIN("cylinder");

namespace {

OperatorData a0_data() {
  Matrix b(2, 2);
  b << Complex(0, 1), 0, 0, Complex(0, -1);
  OperatorData d;
  d.fiber_dim = 2;
  d.first_order = {MatrixSeries::constant_series(b)};
  d.zero_order.fiber_dim = 2;
  return d;
}

FourierOperator scalar_operator(Complex lambda) {
  OperatorData d;
  d.fiber_dim = 1;
  d.first_order = {MatrixSeries::constant_series(Matrix::Zero(1, 1))};
  d.zero_order = MatrixSeries::constant_series(lambda * Matrix::Identity(1, 1));
  return assemble(d, 0);
}

double field_max(const CylinderField& f) {
  double m = 0.0;
  for (Index j = 0; j < f.values.cols(); ++j)
    m = std::max(m, f.values.col(j).norm());
  return m;
}

}  // namespace

TEST_CASE("cutoff plateau profile") {
  CHECK(cutoff_eta(0.0, 1.0) == 1.0);
  CHECK(cutoff_eta(0.5, 1.0) == 1.0);
  CHECK(cutoff_eta(2.0 / 3.0, 1.0) == 0.0);
  CHECK(cutoff_eta(0.9, 1.0) == 0.0);
  const double mid = cutoff_eta(0.58, 1.0);
  CHECK(mid > 0.0);
  CHECK(mid < 1.0);
}

TEST_CASE("extension: trace, zero data, scalar decay") {
  const FourierOperator a0 = assemble(a0_data(), 3);
  const SpectralSplit split = spectral_split_oracle(a0, {0.5, 0.5});
  TimeGrid grid{1.0, 64};

  // Zero boundary data extends to the zero field.
  const CylinderField z = extension(Vector::Zero(split.dim()), split, grid);
  CHECK(field_max(z) == 0.0);

  Rng rng(1);
  const Vector u = rng.cgaussian_vector(split.dim());
  const CylinderField eu = extension(u, split, grid);
  // Trace at t = 0 is exact.
  CHECK((eu.values.col(0) - u).norm() < 1e-14 * u.norm());

  // chi^+ eigenvector at A0-eigenvalue k: (E u)(t) = eta(t) e^{-t|k-1/2|} u.
  Vector ev = Vector::Zero(split.dim());
  const auto pos = a0.mode_position({2, 0});
  ev(a0.mode_offset(pos) + 1) = 1.0;  // eigenvalue 2
  const CylinderField ee = extension(ev, split, grid);
  for (int j = 0; j < grid.nodes(); j += 7) {
    const double t = grid.t(j);
    const double expected = cutoff_eta(t, grid.rho) * std::exp(-1.5 * t);
    CHECK(std::abs(ee.values.col(j).norm() - expected) < 1e-12);
  }
}

TEST_CASE("duhamel solves the forced scalar problem") {
  // L = lambda, f = c constant: W(t) = c (1 - e^{-lambda t}) / lambda.
  const double lambda = 2.0;
  const FourierOperator op = scalar_operator(Complex(lambda, 0));
  const SpectralSplit split = spectral_split_oracle(op, {0.0, 1.0});
  TimeGrid grid{1.0, 128};
  CylinderField f = zero_field(grid, 1);
  const Complex c(0.7, -0.3);
  for (int j = 0; j < grid.nodes(); ++j) f.values(0, j) = c;
  const CylinderField w = duhamel(f, split);
  CHECK(std::abs(w.values(0, 0)) == 0.0);
  for (int j = 0; j < grid.nodes(); j += 13) {
    const double t = grid.t(j);
    const Complex expected = c * (1.0 - std::exp(-lambda * t)) / lambda;
    CHECK(std::abs(w.values(0, j) - expected) < 1e-6);
  }

  // Zero source gives the zero solution.
  const CylinderField wz = duhamel(zero_field(grid, 1), split);
  CHECK(field_max(wz) == 0.0);
}

TEST_CASE("duhamel residual is second order in dt") {
  const FourierOperator a0 = assemble(a0_data(), 2);
  const SpectralSplit split = spectral_split_oracle(a0, {0.5, 0.5});
  std::vector<double> residuals;
  for (const int steps : {32, 64, 128}) {
    TimeGrid grid{1.0, steps};
    CylinderField f = zero_field(grid, split.dim());
    Rng rng(3);
    const Vector xi = rng.cgaussian_vector(split.dim());
    const Vector xi2 = rng.cgaussian_vector(split.dim());
    for (int j = 0; j < grid.nodes(); ++j)
      f.values.col(j) = std::sin(2.0 * grid.t(j)) * xi +
                        std::cos(3.0 * grid.t(j)) * xi2;
    const CylinderField w = duhamel(f, split);
    // dW/dt + |A_r| W - f, finite differences (interior nodes).
    double resid = 0.0;
    const double dt = grid.dt();
    for (int j = 1; j < grid.steps; ++j) {
      const Vector dw =
          (w.values.col(j + 1) - w.values.col(j - 1)) / (2.0 * dt);
      resid = std::max(resid, (dw + split.apply_modulus(w.values.col(j)) -
                               f.values.col(j))
                                  .norm());
    }
    residuals.push_back(resid);
  }
  const double slope1 = std::log2(residuals[0] / residuals[1]);
  const double slope2 = std::log2(residuals[1] / residuals[2]);
  CHECK(slope1 > 1.9);
  CHECK(slope2 > 1.9);
}

TEST_CASE("solution operator: boundary vanishing and right inverse") {
  const FourierOperator a0 = assemble(a0_data(), 3);
  const SpectralSplit split = spectral_split_oracle(a0, {0.5, 0.5});

  // Boundary vanishing holds exactly at the quadrature level.
  {
    TimeGrid grid{1.0, 64};
    Rng rng(5);
    CylinderField u = zero_field(grid, split.dim());
    for (int j = 0; j < grid.nodes(); ++j)
      u.values.col(j) = rng.cgaussian_vector(split.dim());
    const CylinderField su = solution_operator(u, split);
    CHECK(split.apply_chi_plus(su.values.col(0)).norm() == 0.0);
    CHECK(split.apply_chi_minus(su.values.col(grid.steps)).norm() == 0.0);
  }

  // sigma0^{-1} D_{0,r} S_{0,r} = 1 with O(dt^2) residual on smooth fields.
  std::vector<double> residuals;
  for (const int steps : {64, 128, 256}) {
    TimeGrid grid{1.0, steps};
    CylinderField u = zero_field(grid, split.dim());
    Rng rng(7);
    const Vector xi = rng.cgaussian_vector(split.dim());
    const Vector xi2 = rng.cgaussian_vector(split.dim());
    for (int j = 0; j < grid.nodes(); ++j)
      u.values.col(j) = std::cos(2.0 * pi * grid.t(j)) * xi +
                        std::sin(pi * grid.t(j)) * xi2;
    const CylinderField su = solution_operator(u, split);
    const CylinderField dsu = model_operator_apply(
        su, split, Matrix::Identity(2, 2));
    double resid = 0.0;
    for (int j = 1; j < grid.steps; ++j)
      resid = std::max(resid,
                       (dsu.values.col(j) - u.values.col(j)).norm());
    residuals.push_back(resid);
  }
  CHECK(std::log2(residuals[0] / residuals[1]) > 1.9);
  CHECK(std::log2(residuals[1] / residuals[2]) > 1.9);
}

TEST_CASE("solution operator on a single decaying mode: closed form") {
  // Scalar lambda > 0, chi^+ input u(s) = e^{i w s}:
  // S u(t) = (e^{i w t} - e^{-lambda t}) / (lambda + i w).
  const double lambda = 1.5, w = 2.0;
  const FourierOperator op = scalar_operator(Complex(lambda, 0));
  const SpectralSplit split = spectral_split_oracle(op, {0.0, 1.0});
  TimeGrid grid{1.0, 256};
  CylinderField u = zero_field(grid, 1);
  for (int j = 0; j < grid.nodes(); ++j)
    u.values(0, j) = std::exp(Complex(0, w * grid.t(j)));
  const CylinderField su = solution_operator(u, split);
  for (int j = 0; j < grid.nodes(); j += 31) {
    const double t = grid.t(j);
    const Complex expected =
        (std::exp(Complex(0, w * t)) - std::exp(Complex(-lambda * t, 0))) /
        Complex(lambda, w);
    CHECK(std::abs(su.values(0, j) - expected) < 2e-5);
  }
}

TEST_CASE("reginv identity") {
  const FourierOperator a0 = assemble(a0_data(), 2);
  const SpectralSplit split = spectral_split_oracle(a0, {0.5, 0.5});
  const Matrix sigma0 = Matrix::Identity(2, 2);

  // u = extension of a chi^+ vector: the defect is O(dt^2).
  TimeGrid grid{1.0, 128};
  Vector ub = Vector::Zero(split.dim());
  const auto pos = assemble(a0_data(), 2).mode_position({1, 0});
  ub(assemble(a0_data(), 2).mode_offset(pos) + 1) = 1.0;
  const CylinderField eu = extension(ub, split, grid);
  const CylinderField defect = reginv_defect(eu, split, sigma0);
  CHECK(defect.residual < 1e-2);

  TimeGrid fine{1.0, 256};
  const CylinderField eu2 = extension(ub, split, fine);
  const CylinderField defect2 = reginv_defect(eu2, split, sigma0);
  CHECK(defect2.residual < defect.residual / 3.0);

  // u vanishing at both ends: S inverts D_{0,r} (defect still small).
  Rng rng(11);
  CylinderField u = zero_field(grid, split.dim());
  const Vector xi = rng.cgaussian_vector(split.dim());
  for (int j = 0; j < grid.nodes(); ++j)
    u.values.col(j) = std::pow(std::sin(pi * grid.t(j)), 2.0) * xi;
  const CylinderField d3 = reginv_defect(u, split, sigma0);
  CHECK(d3.residual < 5e-3);

  // Violated right-end condition is rejected.
  CylinderField bad = zero_field(grid, split.dim());
  for (int j = 0; j < grid.nodes(); ++j)
    bad.values.col(j) = Vector::Ones(split.dim());
  CHECK_THROWS_AS(reginv_defect(bad, split, sigma0), Error);
}

TEST_CASE("solve_bvp with the spectral B0 conditions is an isomorphism") {
  const BoundaryModel model = tilted_dirac_model(1.0);
  const FourierOperator a = assemble(model.operator_data, 2);
  const SpectralSplit split = spectral_split_oracle(a, {0.25, 0.25});
  TimeGrid grid{1.0, 24};

  // Zero source: only the zero solution.
  const CylinderProblem p0 = b0_problem(split, model.sigma0, grid,
                                        zero_field(grid, split.dim()));
  const SolveReport r0 = solve_bvp(p0);
  CHECK_FALSE(r0.singular);
  CHECK(r0.kernel_dim == 0);
  CHECK(r0.cokernel_dim == 0);
  CHECK(field_max(r0.solution) < 1e-10);

  // Smooth source: the solution matches S_{0,r} sigma0^{-1} f to O(dt^2).
  CylinderField f = zero_field(grid, split.dim());
  Rng rng(13);
  const Vector xi = rng.cgaussian_vector(split.dim());
  for (int j = 0; j < grid.nodes(); ++j)
    f.values.col(j) = std::cos(pi * grid.t(j)) * xi;
  const CylinderProblem p1 = b0_problem(split, model.sigma0, grid, f);
  const SolveReport r1 = solve_bvp(p1);
  CHECK_FALSE(r1.singular);
  CHECK(r1.residual < 1e-10);

  CylinderField sf = f;
  const Matrix sinv = model.sigma0.inverse();
  for (int j = 0; j < grid.nodes(); ++j) {
    Vector tmp(split.dim());
    for (Index p = 0; p < split.dim() / 2; ++p)
      tmp.segment(2 * p, 2) = sinv * f.values.col(j).segment(2 * p, 2);
    sf.values.col(j) = tmp;
  }
  const CylinderField ref = solution_operator(sf, split);
  double dev = 0.0;
  for (int j = 0; j < grid.nodes(); ++j)
    dev = std::max(dev, (r1.solution.values.col(j) - ref.values.col(j)).norm());
  CHECK(dev < 5e-3);  // both are O(dt^2) approximations of the same solution
}

TEST_CASE("solve_bvp detects the kernel of mismatched APS cuts") {
  const FourierOperator a0 = assemble(a0_data(), 2);
  const SpectralSplit s_low = spectral_split_oracle(a0, {0.5, 0.5});
  const SpectralSplit s_high = spectral_split_oracle(a0, {2.5, 0.5});
  TimeGrid grid{0.5, 24};

  CylinderProblem prob;
  prob.split = s_low;  // equation shifted by r = 1/2
  prob.sigma0 = Matrix::Identity(2, 2);
  prob.grid = grid;
  prob.source = zero_field(grid, s_low.dim());
  // u(0) in ran chi^-(A_{5/2}), u(rho) in ran chi^+(A_{1/2}): kernel spans
  // the strip eigenvalues 1 and 2, multiplicity 2 each.
  prob.bc_left = span_of(chi_minus_dense(s_high), 0.5);
  prob.bc_right = span_of(chi_plus_dense(s_low), 0.5);
  const SolveReport rep = solve_bvp(prob);
  CHECK(rep.singular);
  CHECK(rep.kernel_dim == 4);
  CHECK(rep.cokernel_dim == 0);
}

TEST_CASE("index_strip: counts, antisymmetry, methods agree") {
  const FourierOperator a0 = assemble(a0_data(), 4);

  // r = r2: empty strip.
  const IndexReport r0 = index_strip(a0, 0.5, 0.5);
  CHECK(r0.index_discrete == 0);
  CHECK(r0.strip == 0);

  // A0 between 1/2 and 5/2: eigenvalues 1 and 2, each double.
  const IndexReport r1 = index_strip(a0, 0.5, 2.5);
  CHECK(r1.agree);
  CHECK(r1.index_discrete == 4);
  CHECK(r1.kernel_discrete == 4);
  CHECK(r1.cokernel_discrete == 0);

  // Swapped cuts: the index flips sign exactly.
  const IndexReport r2 = index_strip(a0, 2.5, 0.5);
  CHECK(r2.agree);
  CHECK(r2.index_discrete == -4);
  CHECK(r1.index_discrete + r2.index_discrete == 0);

  // Tilted Dirac at alpha = 1 between 1/4 and 5/4:
  // Re spectrum k/2, strip holds k = 1 (Re 1/2, x2) and k = 2 (Re 1, x2).
  const FourierOperator td = build_tilted_dirac(1.0, 4);
  const IndexReport r3 = index_strip(td, 0.25, 1.25);
  CHECK(r3.agree);
  CHECK(r3.index_discrete == 4);

  // Nondiag operator between -5/2 and -1/2: eigenvalues -1, -2 (alg 2).
  const FourierOperator nd = build_nondiag(4);
  const IndexReport r4 = index_strip(nd, -2.5, -0.5);
  CHECK(r4.agree);
  CHECK(r4.index_discrete == 4);
}

TEST_CASE("greens formula defect") {
  const BoundaryModel model = nondiag_model();
  const FourierOperator a = assemble(model.operator_data, 2);
  const SpectralSplit split = spectral_split_oracle(a, {0.5, 0.5});

  // Zero fields: both sides vanish.
  TimeGrid grid{1.0, 64};
  const CylinderField z = zero_field(grid, split.dim());
  CHECK(std::abs(greens_defect(z, z, split, model.sigma0)) == 0.0);

  // Trigonometric-polynomial data: defect is O(dt^2).
  std::vector<double> defects;
  for (const int steps : {32, 64, 128}) {
    TimeGrid g{1.0, steps};
    Rng rng(17);
    CylinderField u = zero_field(g, split.dim());
    CylinderField v = zero_field(g, split.dim());
    const Vector xu = rng.cgaussian_vector(split.dim());
    const Vector xv = rng.cgaussian_vector(split.dim());
    for (int j = 0; j < g.nodes(); ++j) {
      u.values.col(j) = std::cos(2.0 * pi * g.t(j)) * xu;
      v.values.col(j) = std::sin(2.0 * pi * g.t(j)) * xv +
                        std::cos(pi * g.t(j)) * xu;
    }
    defects.push_back(std::abs(greens_defect(u, v, split, model.sigma0)));
  }
  CHECK(std::log2(defects[0] / defects[1]) > 1.7);
  CHECK(std::log2(defects[1] / defects[2]) > 1.7);

  // Fields supported away from both ends: the boundary term vanishes and
  // the interior terms cancel to O(dt^2).
  TimeGrid g{1.0, 128};
  Rng rng(19);
  CylinderField u = zero_field(g, split.dim());
  CylinderField v = zero_field(g, split.dim());
  const Vector xu = rng.cgaussian_vector(split.dim());
  const Vector xv = rng.cgaussian_vector(split.dim());
  for (int j = 0; j < g.nodes(); ++j) {
    const double bump = std::pow(std::sin(pi * g.t(j)), 4.0);
    u.values.col(j) = bump * xu;
    v.values.col(j) = bump * xv;
  }
  CHECK(std::abs(greens_defect(u, v, split, model.sigma0)) < 1e-3);
}

TEST_CASE("maximal regularity constant is rho independent") {
  const FourierOperator a0 = assemble(a0_data(), 2);
  const SpectralSplit split = spectral_split_oracle(a0, {0.5, 0.5});
  std::vector<double> constants;
  for (const double rho : {0.25, 0.5, 1.0})
    constants.push_back(
        maximal_regularity_constant(split, TimeGrid{rho, 64}));
  const double cmin = *std::min_element(constants.begin(), constants.end());
  const double cmax = *std::max_element(constants.begin(), constants.end());
  CHECK(cmax / cmin < 1.2);
}

TEST_CASE("sobolev lifting constants stay bounded under refinement") {
  // |S u|_{H^{k+1}} <= C |u|_{H^k} for k = 0, 1 with the anisotropic norms.
  const FourierOperator a0 = assemble(a0_data(), 2);
  const SpectralSplit split = spectral_split_oracle(a0, {0.5, 0.5});
  for (const int k : {0, 1}) {
    std::vector<double> consts;
    for (const int steps : {32, 64, 128}) {
      TimeGrid grid{1.0, steps};
      Rng rng(23);
      double worst = 0.0;
      for (int trial = 0; trial < 4; ++trial) {
        CylinderField u = zero_field(grid, split.dim());
        const Vector xi = rng.cgaussian_vector(split.dim());
        const Vector xi2 = rng.cgaussian_vector(split.dim());
        for (int j = 0; j < grid.nodes(); ++j)
          u.values.col(j) = std::cos(2.0 * pi * grid.t(j)) * xi +
                            std::sin(pi * grid.t(j)) * xi2;
        const CylinderField su = solution_operator(u, split);
        worst = std::max(worst, cylinder_hk_norm(su, split, k + 1) /
                                    cylinder_hk_norm(u, split, k));
      }
      consts.push_back(worst);
    }
    CHECK(std::abs(consts[2] - consts[1]) / consts[2] < 0.15);
  }
}

TEST_CASE("trace and extension bounds stabilize under refinement") {
  const BoundaryModel model = tilted_dirac_model(1.0);
  std::vector<double> restr, ext;
  for (const int n : {4, 8}) {
    const FourierOperator a = assemble(model.operator_data, n);
    const SpectralSplit split = spectral_split_oracle(a, {0.25, 0.25});
    const TraceBoundReport rep =
        trace_bound_report(split, model.sigma0, TimeGrid{1.0, 64}, 12);
    restr.push_back(rep.restriction_constant);
    ext.push_back(rep.extension_constant);
    CHECK(rep.restriction_constant > 0.0);
    CHECK(rep.extension_constant > 0.0);
  }
  // Constants must not blow up as the truncation refines.
  CHECK(restr[1] < 4.0 * restr[0] + 1.0);
  CHECK(ext[1] < 4.0 * ext[0] + 1.0);
}

TEST_SUITE_END();
