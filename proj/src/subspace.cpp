#include "specbvp/subspace.hpp"

#include <Eigen/SVD>

namespace specbvp {

namespace {

void check_same_space(const Subspace& x, const Subspace& y) {
  if (x.ambient() != y.ambient())
    throw Error(ErrorCode::DimensionMismatch, "ambient dimension mismatch");
}

RankDecision strict_rank(const Eigen::VectorXd& sv, const Tolerances& tol) {
  RankDecision rd = rank_decision(sv, tol);
  if (rd.ambiguous)
    throw Error(ErrorCode::AmbiguousRank,
                "singular value inside the ambiguity band");
  return rd;
}

}  // namespace

Subspace span_of(const Matrix& spanning, double s, const Tolerances& tol) {
  Subspace out;
  out.basis = orth(spanning, tol);
  out.s = s;
  return out;
}

Subspace intersection(const Subspace& x, const Subspace& y,
                      const Tolerances& tol) {
  check_same_space(x, y);
  if (x.dim() == 0 || y.dim() == 0) return Subspace::zero(x.ambient(), x.s);
  Matrix stacked(x.ambient(), x.dim() + y.dim());
  stacked << x.basis, -y.basis;
  const Matrix null = nullspace(stacked, tol);
  if (null.cols() == 0) return Subspace::zero(x.ambient(), x.s);
  Subspace out;
  out.basis = orth(x.basis * null.topRows(x.dim()), tol);
  out.s = x.s;
  return out;
}

Subspace subspace_sum(const Subspace& x, const Subspace& y,
                      const Tolerances& tol) {
  check_same_space(x, y);
  Matrix stacked(x.ambient(), x.dim() + y.dim());
  stacked << x.basis, y.basis;
  Subspace out;
  out.basis = orth(stacked, tol);
  out.s = x.s;
  return out;
}

Subspace annihilator(const Subspace& x, const Tolerances& tol) {
  Subspace out;
  out.basis = nullspace(Matrix(x.basis.adjoint()), tol);
  out.s = x.s;
  return out;
}

Subspace annihilator(const Subspace& x, const Matrix& gram,
                     const Tolerances& tol) {
  Subspace out;
  out.basis = nullspace(Matrix(x.basis.adjoint() * gram), tol);
  out.s = x.s;
  return out;
}

Subspace complement(const Subspace& x, const Tolerances& tol) {
  return annihilator(x, tol);
}

double distance_to(const Subspace& x, const Vector& v) {
  const double nv = v.norm();
  if (nv == 0.0) return 0.0;
  const Vector residual = v - x.basis * (x.basis.adjoint() * v);
  return residual.norm() / nv;
}

double subspace_gap(const Subspace& x, const Subspace& y) {
  check_same_space(x, y);
  const Matrix px = x.basis * x.basis.adjoint();
  const Matrix py = y.basis * y.basis.adjoint();
  return spectral_norm(px - py);
}

Matrix oblique_projector(const Subspace& range, const Subspace& kernel,
                         const Tolerances& tol) {
  check_same_space(range, kernel);
  const Index n = range.ambient();
  if (range.dim() + kernel.dim() != n)
    throw Error(ErrorCode::DimensionMismatch,
                "range and kernel do not decompose the space");
  Matrix both(n, n);
  both << range.basis, kernel.basis;
  Eigen::PartialPivLU<Matrix> lu(both);
  if (lu.rcond() < tol.rank_threshold(1.0))
    throw Error(ErrorCode::AmbiguousRank, "splitting nearly degenerate");
  const Matrix inv = lu.solve(Matrix::Identity(n, n));
  return range.basis * inv.topRows(range.dim());
}

FredholmPairReport fredholm_pair(const Subspace& x, const Subspace& y,
                                 const Tolerances& tol) {
  check_same_space(x, y);
  FredholmPairReport rep;
  const Index n = x.ambient();
  Matrix stacked(n, x.dim() + y.dim());
  stacked << x.basis, y.basis;
  Index rank_sum = 0;
  if (stacked.cols() > 0) {
    Eigen::JacobiSVD<Matrix> svd(stacked);
    RankDecision rd = strict_rank(svd.singularValues(), tol);
    rank_sum = rd.rank;
    rep.tau = rd.tau;
  }
  rep.dim_intersection = static_cast<int>(x.dim() + y.dim() - rank_sum);
  rep.dim_cokernel = static_cast<int>(n - rank_sum);
  rep.index = rep.dim_intersection - rep.dim_cokernel;
  return rep;
}

namespace {

// Isomorphism margin of  map|domain : span(domain) -> span(target);
// zero when the dimensions do not match.
double restriction_margin(const Matrix& map, const Matrix& domain,
                          const Matrix& target) {
  if (domain.cols() != target.cols()) return 0.0;
  if (domain.cols() == 0) return 1.0;  // empty spaces, trivially iso
  return smallest_singular_value(Matrix(target.adjoint() * map * domain));
}

}  // namespace

ProjDiffReport projdiff_check(const Matrix& p, const Matrix& q,
                              const Tolerances& tol) {
  const double scale =
      std::max(1.0, std::max(spectral_norm(p), spectral_norm(q)));
  if (spectral_norm(p * p - p) > 1e-8 * scale ||
      spectral_norm(q * q - q) > 1e-8 * scale)
    throw Error(ErrorCode::InvalidArgument, "inputs are not projectors");

  ProjDiffReport rep;
  const double tau = tol.rank_threshold(scale);

  rep.smin_difference = smallest_singular_value(p - q);
  rep.difference_invertible = rep.smin_difference > tau;

  const Matrix ker_q = nullspace(q, tol);
  const Matrix ran_p = orth(p, tol);
  const Matrix ker_qstar = nullspace(Matrix(q.adjoint()), tol);
  const Matrix ran_pstar = orth(Matrix(p.adjoint()), tol);
  const Matrix ran_q = orth(q, tol);
  const Matrix ker_p = nullspace(p, tol);

  rep.smin_p_on_ker_q = restriction_margin(p, ker_q, ran_p);
  rep.smin_pstar_on_ker_qstar =
      restriction_margin(p.adjoint(), ker_qstar, ran_pstar);
  const Matrix one_minus_p = Matrix::Identity(p.rows(), p.cols()) - p;
  rep.smin_complement_on_ran_q = restriction_margin(one_minus_p, ran_q, ker_p);

  rep.adjoint_pair_iso =
      rep.smin_p_on_ker_q > tau && rep.smin_pstar_on_ker_qstar > tau;
  rep.restriction_pair_iso =
      rep.smin_p_on_ker_q > tau && rep.smin_complement_on_ran_q > tau;
  rep.consistent = rep.difference_invertible == rep.adjoint_pair_iso &&
                   rep.adjoint_pair_iso == rep.restriction_pair_iso;

  for (const double v :
       {rep.smin_difference, rep.smin_p_on_ker_q, rep.smin_pstar_on_ker_qstar,
        rep.smin_complement_on_ran_q}) {
    if (v > tau / tol.ambiguity_band && v < tau * tol.ambiguity_band)
      rep.ambiguous = true;
  }
  return rep;
}

}  // namespace specbvp
