#include "specbvp/cylinder.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

namespace specbvp {

namespace {

// phi_1(z) = (e^z - 1)/z and phi_2(z) = (e^z - 1 - z)/z^2 with series
// evaluation near 0 (cancellation guard).
Complex phi1(Complex z) {
  if (std::abs(z) < 0.25) {
    Complex acc(1, 0), term(1, 0);
    for (int k = 1; k < 20; ++k) {
      term *= z / static_cast<double>(k + 1);
      acc += term;
    }
    return acc;
  }
  return (std::exp(z) - 1.0) / z;
}

Complex phi2(Complex z) {
  if (std::abs(z) < 0.25) {
    Complex acc(0.5, 0), term(0.5, 0);
    for (int k = 1; k < 20; ++k) {
      term *= z / static_cast<double>(k + 2);
      acc += term;
    }
    return acc;
  }
  return (std::exp(z) - 1.0 - z) / (z * z);
}

// Jet of an entire scalar function through Cauchy circles.
ScalarFunctionJet entire_jet(std::function<Complex(Complex)> f) {
  return [f](Complex lam, int j) -> Complex {
    if (j == 0) return f(lam);
    const double radius = std::max(0.5, 0.25 * std::abs(lam));
    return cauchy_derivative(f, lam, j, radius);
  };
}

void check_field(const CylinderField& f, const SpectralSplit& split) {
  if (f.dim() != split.dim())
    throw Error(ErrorCode::DimensionMismatch, "field dimension");
}

// Second-order d/dt on the grid (centered inside, one-sided at the ends).
Matrix time_derivative(const Matrix& values, double dt) {
  const Index n = values.rows();
  const Index cols = values.cols();
  Matrix out(n, cols);
  out.col(0) =
      (-3.0 * values.col(0) + 4.0 * values.col(1) - values.col(2)) /
      (2.0 * dt);
  for (Index j = 1; j + 1 < cols; ++j)
    out.col(j) = (values.col(j + 1) - values.col(j - 1)) / (2.0 * dt);
  out.col(cols - 1) = (3.0 * values.col(cols - 1) -
                       4.0 * values.col(cols - 2) + values.col(cols - 3)) /
                      (2.0 * dt);
  return out;
}

Vector apply_sigma0(const Matrix& sigma0, const Vector& u) {
  const Index m = sigma0.rows();
  const Index nmodes = u.size() / m;
  Vector out(u.size());
  for (Index p = 0; p < nmodes; ++p)
    out.segment(p * m, m) = sigma0 * u.segment(p * m, m);
  return out;
}

}  // namespace

CylinderField zero_field(const TimeGrid& grid, Index dim) {
  CylinderField f;
  f.grid = grid;
  f.values = Matrix::Zero(dim, grid.nodes());
  return f;
}

double cylinder_l2_norm(const CylinderField& u) {
  return std::sqrt(std::abs(cylinder_l2_inner(u, u)));
}

Complex cylinder_l2_inner(const CylinderField& u, const CylinderField& v) {
  if (u.values.cols() != v.values.cols() || u.dim() != v.dim())
    throw Error(ErrorCode::DimensionMismatch, "field shapes");
  const double dt = u.grid.dt();
  Complex acc(0, 0);
  for (Index j = 0; j < u.values.cols(); ++j) {
    const double w =
        (j == 0 || j == u.values.cols() - 1) ? 0.5 * dt : dt;
    acc += w * u.values.col(j).dot(v.values.col(j));
  }
  return acc;
}

double cutoff_eta(double t, double t_c) {
  const double a = 0.5 * t_c;
  const double b = 2.0 * t_c / 3.0;
  if (t <= a) return 1.0;
  if (t >= b) return 0.0;
  const double s = (t - a) / (b - a);
  return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

CylinderField extension(const Vector& u_bdy, const SpectralSplit& split,
                        const TimeGrid& grid, double t_c) {
  if (u_bdy.size() != split.dim())
    throw Error(ErrorCode::DimensionMismatch, "boundary vector");
  if (t_c <= 0.0) t_c = grid.rho;
  CylinderField out = zero_field(grid, split.dim());
  out.equation = "eta(t) exp(-t|A_r|) u";
  for (int j = 0; j < grid.nodes(); ++j) {
    const double t = grid.t(j);
    const double eta = cutoff_eta(t, t_c);
    if (eta == 0.0) continue;
    auto jet = [t](Complex lam, int der) {
      Complex c(1, 0);
      for (int l = 0; l < der; ++l) c *= Complex(-t, 0);
      return c * std::exp(-t * lam);
    };
    out.values.col(j) = eta * split.apply_modulus_function(jet, u_bdy);
  }
  return out;
}

CylinderField duhamel(const CylinderField& f, const SpectralSplit& split) {
  check_field(f, split);
  const double dt = f.grid.dt();
  // Per-step matrices: E = exp(-dt L), P1 = dt phi_1(-dt L),
  // P2 = dt phi_2(-dt L).
  const auto e_blocks = semigroup(split, dt);
  const auto p1_blocks = split.modulus_function(
      entire_jet([dt](Complex lam) { return dt * phi1(-dt * lam); }));
  const auto p2_blocks = split.modulus_function(
      entire_jet([dt](Complex lam) { return dt * phi2(-dt * lam); }));

  CylinderField w = zero_field(f.grid, f.dim());
  w.equation = "dW/dt + |A_r| W = f, W(0) = 0";
  for (int j = 0; j < f.grid.steps; ++j) {
    const Vector fj = f.values.col(j);
    const Vector df = f.values.col(j + 1) - fj;
    w.values.col(j + 1) = apply_blocks(split, e_blocks, w.values.col(j)) +
                          apply_blocks(split, p1_blocks, fj) +
                          apply_blocks(split, p2_blocks, df);
  }
  return w;
}

CylinderField solution_operator(const CylinderField& u,
                                const SpectralSplit& split) {
  check_field(u, split);
  // S u(t) = W(t; chi^+ u) - W(rho - t; chi^- C_rho u).
  CylinderField fplus = u;
  CylinderField fminus_rev = u;
  const int cols = u.grid.nodes();
  for (int j = 0; j < cols; ++j) {
    fplus.values.col(j) = split.apply_chi_plus(u.values.col(j));
    fminus_rev.values.col(j) =
        split.apply_chi_minus(u.values.col(cols - 1 - j));
  }
  const CylinderField wp = duhamel(fplus, split);
  const CylinderField wm = duhamel(fminus_rev, split);
  CylinderField out = zero_field(u.grid, u.dim());
  out.equation = "S_{0,r} u";
  for (int j = 0; j < cols; ++j)
    out.values.col(j) = wp.values.col(j) - wm.values.col(cols - 1 - j);
  return out;
}

CylinderField model_operator_apply(const CylinderField& u,
                                   const SpectralSplit& split,
                                   const Matrix& sigma0) {
  check_field(u, split);
  const Matrix du = time_derivative(u.values, u.grid.dt());
  CylinderField out = zero_field(u.grid, u.dim());
  out.equation = "sigma0 (d/dt + A_r) u";
  for (Index j = 0; j < u.values.cols(); ++j)
    out.values.col(j) = apply_sigma0(
        sigma0, Vector(du.col(j) + split.apply_a_r(u.values.col(j))));
  return out;
}

CylinderField model_operator_adjoint_apply(const CylinderField& v,
                                           const SpectralSplit& split,
                                           const Matrix& sigma0) {
  check_field(v, split);
  // D0^dagger v = -sigma0^H dv/dt + A_r^H sigma0^H v.
  const Matrix sh = sigma0.adjoint();
  Matrix sv(v.dim(), v.values.cols());
  for (Index j = 0; j < v.values.cols(); ++j)
    sv.col(j) = apply_sigma0(sh, v.values.col(j));
  const Matrix dsv = time_derivative(sv, v.grid.dt());
  CylinderField out = zero_field(v.grid, v.dim());
  out.equation = "-(sigma0^H d/dt - A_r^H sigma0^H) v";
  Index off = 0;
  for (int b = 0; b < split.nblocks(); ++b) {
    const Matrix ah = split.a_r[static_cast<size_t>(b)].adjoint();
    for (Index j = 0; j < v.values.cols(); ++j)
      out.values.block(off, j, ah.rows(), 1) =
          -dsv.block(off, j, ah.rows(), 1) +
          ah * sv.block(off, j, ah.rows(), 1);
    off += split.block_size(b);
  }
  return out;
}

CylinderField reginv_defect(const CylinderField& u, const SpectralSplit& split,
                            const Matrix& sigma0, double precondition_tol) {
  check_field(u, split);
  const int last = u.grid.steps;
  double scale = 0.0;
  for (Index j = 0; j < u.values.cols(); ++j)
    scale = std::max(scale, u.values.col(j).norm());
  if (split.apply_chi_minus(u.values.col(last)).norm() >
      precondition_tol * std::max(scale, 1e-300))
    throw Error(ErrorCode::PreconditionViolated,
                "chi^-(A_r) u(rho) does not vanish");

  // sigma0^{-1} D_{0,r} u = (d/dt + A_r) u: apply with the identity fiber
  // matrix, the sigma0 factors cancel exactly.
  const CylinderField d0u = model_operator_apply(
      u, split, Matrix::Identity(sigma0.rows(), sigma0.cols()));
  const CylinderField su = solution_operator(d0u, split);

  const Vector u0_plus = split.apply_chi_plus(u.values.col(0));
  CylinderField defect = zero_field(u.grid, u.dim());
  defect.equation = "(1 - S sigma0^{-1} D_{0,r}) u - exp(-t|A_r|) chi^+ u(0)";
  for (int j = 0; j < u.grid.nodes(); ++j) {
    const double t = u.grid.t(j);
    auto jet = [t](Complex lam, int der) {
      Complex c(1, 0);
      for (int l = 0; l < der; ++l) c *= Complex(-t, 0);
      return c * std::exp(-t * lam);
    };
    defect.values.col(j) = u.values.col(j) - su.values.col(j) -
                           split.apply_modulus_function(jet, u0_plus);
  }
  double dmax = 0.0;
  for (Index j = 0; j < defect.values.cols(); ++j)
    dmax = std::max(dmax, defect.values.col(j).norm());
  defect.residual = dmax;
  return defect;
}

namespace {

struct DiscreteSystem {
  Matrix a;
  Vector b;
};

// Implicit-trapezoidal rows for one diagonal block plus annihilator rows.
DiscreteSystem block_system(const Matrix& ar, const TimeGrid& grid,
                            const Matrix& ann_left, const Matrix& ann_right,
                            const Matrix& rhs /* m x (J+1), sigma0^{-1} f */) {
  const Index m = ar.rows();
  const int j_steps = grid.steps;
  const double dt = grid.dt();
  const Index rows = static_cast<Index>(j_steps) * m + ann_left.cols() +
                     ann_right.cols();
  const Index cols = static_cast<Index>(grid.nodes()) * m;
  DiscreteSystem sys;
  sys.a = Matrix::Zero(rows, cols);
  sys.b = Vector::Zero(rows);
  const Matrix eye = Matrix::Identity(m, m);
  for (int j = 0; j < j_steps; ++j) {
    sys.a.block(j * m, j * m, m, m) = -eye / dt + 0.5 * ar;
    sys.a.block(j * m, (j + 1) * m, m, m) = eye / dt + 0.5 * ar;
    sys.b.segment(j * m, m) = 0.5 * (rhs.col(j) + rhs.col(j + 1));
  }
  Index row = static_cast<Index>(j_steps) * m;
  sys.a.block(row, 0, ann_left.cols(), m) = ann_left.adjoint();
  row += ann_left.cols();
  sys.a.block(row, static_cast<Index>(j_steps) * m, ann_right.cols(), m) =
      ann_right.adjoint();
  return sys;
}

struct RankCounts {
  int kernel = 0;
  int cokernel = 0;
  double smin = std::numeric_limits<double>::infinity();
  Matrix kernel_basis;
};

RankCounts system_rank_counts(const Matrix& a, const Tolerances& tol,
                              bool want_kernel) {
  RankCounts rc;
  Eigen::VectorXd sv;
  if (want_kernel) {
    Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinV);
    sv = svd.singularValues();
    const RankDecision rd = rank_decision(sv, tol);
    rc.kernel = static_cast<int>(a.cols() - rd.rank);
    if (rc.kernel > 0) rc.kernel_basis = svd.matrixV().rightCols(rc.kernel);
  } else {
    Eigen::BDCSVD<Matrix> svd(a);
    sv = svd.singularValues();
    const RankDecision rd = rank_decision(sv, tol);
    rc.kernel = static_cast<int>(a.cols() - rd.rank);
  }
  const RankDecision rd = rank_decision(sv, tol);
  rc.cokernel = static_cast<int>(a.rows() - rd.rank);
  rc.smin = sv.size() > 0 ? sv(sv.size() - 1) : 0.0;
  return rc;
}

}  // namespace

SolveReport solve_bvp(const CylinderProblem& prob, const Tolerances& tol) {
  const Index n = prob.split.dim();
  if (prob.source.dim() != n)
    throw Error(ErrorCode::DimensionMismatch, "source dimension");
  if (prob.bc_left.ambient() != n || prob.bc_right.ambient() != n)
    throw Error(ErrorCode::DimensionMismatch, "boundary condition ambient");

  const Matrix sinv = prob.sigma0.inverse();
  Matrix rhs(n, prob.grid.nodes());
  for (Index j = 0; j < rhs.cols(); ++j)
    rhs.col(j) = apply_sigma0(sinv, prob.source.values.col(j));

  const Matrix ann_left = annihilator(prob.bc_left, tol).basis;
  const Matrix ann_right = annihilator(prob.bc_right, tol).basis;
  const Matrix ar = assemble_blocks(prob.split, prob.split.a_r);
  const DiscreteSystem sys =
      block_system(ar, prob.grid, ann_left, ann_right, rhs);

  Eigen::BDCSVD<Matrix> svd(sys.a,
                            Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RankDecision rd = rank_decision(svd.singularValues(), tol);

  SolveReport rep;
  rep.kernel_dim = static_cast<int>(sys.a.cols() - rd.rank);
  rep.cokernel_dim = static_cast<int>(sys.a.rows() - rd.rank);
  rep.smin = svd.singularValues()(svd.singularValues().size() - 1);
  rep.singular = rep.kernel_dim > 0;
  if (rep.singular)
    rep.kernel_basis = svd.matrixV().rightCols(rep.kernel_dim);

  // Minimum-norm least-squares solution through the rank-truncated SVD.
  Vector x = Vector::Zero(sys.a.cols());
  {
    const Vector utb = svd.matrixU().adjoint() * sys.b;
    for (Index i = 0; i < rd.rank; ++i)
      x += (utb(i) / svd.singularValues()(i)) * svd.matrixV().col(i);
  }
  rep.residual = (sys.a * x - sys.b).norm() / (1.0 + sys.b.norm());

  rep.solution = zero_field(prob.grid, n);
  rep.solution.equation = "sigma0 (d/dt + A_r) u = f";
  rep.solution.residual = rep.residual;
  for (int j = 0; j < prob.grid.nodes(); ++j)
    rep.solution.values.col(j) = x.segment(static_cast<Index>(j) * n, n);
  return rep;
}

CylinderProblem b0_problem(const SpectralSplit& split, const Matrix& sigma0,
                           const TimeGrid& grid, const CylinderField& f,
                           const Tolerances& tol) {
  CylinderProblem prob;
  prob.split = split;
  prob.sigma0 = sigma0;
  prob.grid = grid;
  prob.source = f;
  prob.bc_left = span_of(assemble_blocks(split, split.chi_plus) * -1.0 +
                             Matrix::Identity(split.dim(), split.dim()),
                         0.5, tol);
  prob.bc_right = span_of(assemble_blocks(split, split.chi_plus), 0.5, tol);
  return prob;
}

IndexReport index_strip(const FourierOperator& a, double r, double r2,
                        double rho, int steps, const Tolerances& tol) {
  IndexReport rep;
  rep.strip = strip_count(a, std::min(r, r2), std::max(r, r2), tol) *
              (r2 >= r ? 1 : -1);

  // Equation shift between the cuts keeps the per-mode exponentials tame.
  const double c = 0.5 * (r + r2);
  const SpectralSplit split_l = spectral_split_oracle(a, {r2, 0.0}, tol);
  const SpectralSplit split_r = spectral_split_oracle(a, {r, 0.0}, tol);
  TimeGrid grid{rho, steps};

  const std::vector<Matrix> blocks =
      a.block_diagonal() ? a.blocks : std::vector<Matrix>{a.dense};
  for (std::size_t p = 0; p < blocks.size(); ++p) {
    const Index m = blocks[p].rows();
    Matrix mc = blocks[p];
    mc.diagonal().array() -= c;

    // Boundary data: u(0) in ran chi^-(A_{r2}), u(rho) in ran chi^+(A_r).
    const Matrix bc_left = orth(Matrix(Matrix::Identity(m, m) -
                                       split_l.chi_plus[p]),
                                tol);
    const Matrix bc_right = orth(split_r.chi_plus[p], tol);
    const Matrix ann_left =
        nullspace(Matrix(bc_left.adjoint()), tol);
    const Matrix ann_right =
        nullspace(Matrix(bc_right.adjoint()), tol);

    // (a) rank counts of the discrete space-time system.
    const DiscreteSystem sys = block_system(
        mc, grid, ann_left, ann_right, Matrix::Zero(m, grid.nodes()));
    const RankCounts rc = system_rank_counts(sys.a, tol, false);
    rep.kernel_discrete += rc.kernel;
    rep.cokernel_discrete += rc.cokernel;

    // (b) fundamental-solution oracle: kernel directions are
    // u0 in bc_left with exp(-rho(M - c)) u0 in bc_right.
    auto jet = [rho](Complex lam, int der) {
      Complex coeff(1, 0);
      for (int l = 0; l < der; ++l) coeff *= Complex(-rho, 0);
      return coeff * std::exp(-rho * lam);
    };
    const Matrix propagator = matrix_function(mc, jet, tol);
    Matrix test = ann_right.adjoint() * propagator * bc_left;
    for (Index col = 0; col < test.cols(); ++col) {
      const double nc = test.col(col).norm();
      if (nc > 0.0) test.col(col) /= nc;  // rank-neutral column scaling
    }
    Index ker = 0;
    if (test.rows() == 0) {
      ker = test.cols();
    } else if (test.cols() > 0) {
      Eigen::JacobiSVD<Matrix> svd(test);
      ker = test.cols() - rank_decision(svd.singularValues(), tol).rank;
    }
    const int index_k =
        static_cast<int>(bc_left.cols() + bc_right.cols() - m);
    rep.kernel_oracle += static_cast<int>(ker);
    rep.cokernel_oracle += static_cast<int>(ker) - index_k;
  }
  rep.index_discrete = rep.kernel_discrete - rep.cokernel_discrete;
  rep.index_oracle = rep.kernel_oracle - rep.cokernel_oracle;
  rep.agree = rep.index_discrete == rep.index_oracle &&
              rep.index_oracle == rep.strip &&
              rep.kernel_discrete == rep.kernel_oracle &&
              rep.cokernel_discrete == rep.cokernel_oracle;
  if (!rep.agree)
    throw Error(ErrorCode::MethodDisagreement,
                "discrete and fundamental-solution index computations "
                "disagree");
  return rep;
}

Complex greens_defect(const CylinderField& u, const CylinderField& v,
                      const SpectralSplit& split, const Matrix& sigma0) {
  const CylinderField d0u = model_operator_apply(u, split, sigma0);
  const CylinderField d0v = model_operator_adjoint_apply(v, split, sigma0);
  const Complex lhs =
      cylinder_l2_inner(d0u, v) - cylinder_l2_inner(u, d0v);
  const Vector su0 = apply_sigma0(sigma0, u.values.col(0));
  const Vector surho =
      apply_sigma0(sigma0, u.values.col(u.grid.steps));
  const Complex rhs =
      -su0.dot(v.values.col(0)) + surho.dot(v.values.col(v.grid.steps));
  return lhs - rhs;
}

double cylinder_hk_norm(const CylinderField& u, const SpectralSplit& split,
                        int k) {
  double acc = 0.0;
  for (int l = 0; l <= k; ++l) {
    // |A_r|^l d_t^{k-l} u.
    Matrix work = u.values;
    for (int d = 0; d < k - l; ++d) work = time_derivative(work, u.grid.dt());
    if (l > 0) {
      const auto pw = modulus_power(split, static_cast<double>(l));
      for (Index j = 0; j < work.cols(); ++j)
        work.col(j) = apply_blocks(split, pw, Vector(work.col(j)));
    }
    CylinderField piece = zero_field(u.grid, u.dim());
    piece.values = work;
    const double n = cylinder_l2_norm(piece);
    acc += n * n;
  }
  return std::sqrt(acc);
}

double maximal_regularity_constant(const SpectralSplit& split,
                                   const TimeGrid& grid) {
  const double dt = grid.dt();
  double worst = 0.0;
  for (int b = 0; b < split.nblocks(); ++b) {
    const auto bi = static_cast<size_t>(b);
    const Index m = split.block_size(b);
    const Index cols = static_cast<Index>(grid.nodes()) * m;

    // One-block split view for the per-mode Duhamel map.
    SpectralSplit one;
    one.cut = split.cut;
    one.fiber_dim = static_cast<int>(m);
    one.blocked = false;
    one.a_r = {split.a_r[bi]};
    one.chi_plus = {split.chi_plus[bi]};
    one.modulus = {split.modulus[bi]};
    one.eigendata = {split.eigendata[bi]};
    one.modulus_calc = {split.modulus_calc[bi]};

    Matrix map(2 * cols, cols);
    for (Index col = 0; col < cols; ++col) {
      CylinderField f = zero_field(grid, m);
      f.values(col % m, col / m) = 1.0;
      const CylinderField w = duhamel(f, one);
      const Matrix dw = time_derivative(w.values, dt);
      for (int j = 0; j < grid.nodes(); ++j) {
        const double sw = std::sqrt((j == 0 || j == grid.steps) ? 0.5 * dt
                                                                : dt);
        map.block(static_cast<Index>(j) * m, col, m, 1) =
            sw * dw.col(j);
        map.block(cols + static_cast<Index>(j) * m, col, m, 1) =
            sw * (split.modulus[bi] * w.values.col(j));
      }
    }
    // Input weighting: the same trapezoid weights on f.
    for (Index col = 0; col < cols; ++col) {
      const int j = static_cast<int>(col / m);
      const double sw =
          std::sqrt((j == 0 || j == grid.steps) ? 0.5 * dt : dt);
      map.col(col) /= sw;
    }
    worst = std::max(worst, spectral_norm(map));
  }
  return worst;
}

TraceBoundReport trace_bound_report(const SpectralSplit& split,
                                    const Matrix& sigma0,
                                    const TimeGrid& grid, int samples,
                                    std::uint64_t seed) {
  TraceBoundReport rep;
  rep.samples = samples;
  rep.seed = seed;
  const CheckSpaceNorm cs = check_space_norm(split);
  Rng rng(seed);

  for (int trial = 0; trial < samples; ++trial) {
    // Random smooth field: a few cosine profiles with random coefficient
    // vectors.
    CylinderField u = zero_field(grid, split.dim());
    for (int q = 0; q < 4; ++q) {
      const Vector xi = rng.cgaussian_vector(split.dim());
      for (int j = 0; j < grid.nodes(); ++j)
        u.values.col(j) += std::cos(q * pi * grid.t(j) / grid.rho) * xi;
    }
    const CylinderField d0u = model_operator_apply(u, split, sigma0);
    const double graph = std::sqrt(std::pow(cylinder_l2_norm(d0u), 2) +
                                   std::pow(cylinder_l2_norm(u), 2));
    if (graph > 0.0)
      rep.restriction_constant = std::max(
          rep.restriction_constant, check_norm(u.values.col(0), cs) / graph);

    const Vector ub = rng.cgaussian_vector(split.dim());
    const CylinderField eu = extension(ub, split, grid);
    const CylinderField d0eu = model_operator_apply(eu, split, sigma0);
    const double graph_e = std::sqrt(std::pow(cylinder_l2_norm(d0eu), 2) +
                                     std::pow(cylinder_l2_norm(eu), 2));
    const double cn = check_norm(ub, cs);
    if (cn > 0.0)
      rep.extension_constant = std::max(rep.extension_constant, graph_e / cn);
  }
  return rep;
}

}  // namespace specbvp
