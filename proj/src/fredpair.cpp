#include "specbvp/fredpair.hpp"

#include <Eigen/Eigenvalues>

namespace specbvp {

Matrix chi_plus_dense(const SpectralSplit& split) {
  return assemble_blocks(split, split.chi_plus);
}

Matrix chi_minus_dense(const SpectralSplit& split) {
  return Matrix::Identity(split.dim(), split.dim()) - chi_plus_dense(split);
}

Subspace aps_condition(const SpectralSplit& split, const Tolerances& tol) {
  return span_of(chi_minus_dense(split), 0.5, tol);
}

GraphConditionBases graph_condition_bases(const SpectralSplit& split,
                                          const Tolerances& tol) {
  GraphConditionBases gb;
  gb.minus = span_of(chi_minus_dense(split), 0.5, tol);
  gb.plus = span_of(chi_plus_dense(split), 0.5, tol);
  return gb;
}

Subspace graph_condition(const SpectralSplit& split, const Matrix& g,
                         const Matrix& extra_plus, const Tolerances& tol) {
  const GraphConditionBases gb = graph_condition_bases(split, tol);
  if (g.rows() != gb.plus.dim() || g.cols() != gb.minus.dim())
    throw Error(ErrorCode::DimensionMismatch,
                "graph map has the wrong shape");
  Matrix span(split.dim(), gb.minus.dim() + extra_plus.cols());
  span.leftCols(gb.minus.dim()) = gb.minus.basis + gb.plus.basis * g;
  if (extra_plus.cols() > 0) span.rightCols(extra_plus.cols()) = extra_plus;
  return span_of(span, 0.5, tol);
}

Subspace local_condition(const SpectralSplit& split,
                         const Matrix& fiber_projector,
                         const Tolerances& tol) {
  if (fiber_projector.rows() != split.fiber_dim)
    throw Error(ErrorCode::DimensionMismatch, "fiber projector size");
  const Matrix fb = orth(fiber_projector, tol);
  const Index m = split.fiber_dim;
  const Index nmodes = static_cast<Index>(split.modes.size());
  Matrix span = Matrix::Zero(nmodes * m, nmodes * fb.cols());
  for (Index p = 0; p < nmodes; ++p)
    span.block(p * m, p * fb.cols(), m, fb.cols()) = fb;
  return span_of(span, 0.5, tol);
}

AdjointCondition adjoint_condition(const Subspace& b, const Matrix& sigma0,
                                   int fiber_dim, const Tolerances& tol) {
  AdjointCondition out;
  out.sigma0_star_b_star = annihilator(b, tol);
  out.sigma0_star_b_star.s = 0.5;
  // B^* = (sigma0^*)^{-1} (sigma0^* B^*), fiberwise.
  if (sigma0.rows() != fiber_dim || sigma0.cols() != fiber_dim)
    throw Error(ErrorCode::DimensionMismatch, "sigma0 size");
  const Matrix sinv_star = sigma0.adjoint().inverse();
  const Index nmodes = b.ambient() / fiber_dim;
  Matrix mapped = out.sigma0_star_b_star.basis;
  for (Index p = 0; p < nmodes; ++p)
    mapped.middleRows(p * fiber_dim, fiber_dim) =
        sinv_star * mapped.middleRows(p * fiber_dim, fiber_dim);
  out.b_star = span_of(mapped, 0.5, tol);
  return out;
}

FpDecompositionReport fp_decomposition_check(const Subspace& b,
                                             const SpectralSplit& split,
                                             const SpectralSplit& split_star,
                                             const Tolerances& tol) {
  FpDecompositionReport rep;
  const Subspace plus = span_of(chi_plus_dense(split), 0.5, tol);
  rep.pair_plus = fredholm_pair(plus, b, tol);

  const Subspace minus_star = span_of(chi_minus_dense(split_star), 0.5, tol);
  const Subspace b_perp = annihilator(b, tol);
  rep.pair_minus = fredholm_pair(minus_star, b_perp, tol);

  // Alternative reading: the annihilator within the H^{1/2} inner product.
  const SobolevMetric half = modulus_metric(split, 0.5);
  const Matrix w = half.dense();
  const Subspace b_perp_inner = annihilator(b, Matrix(w.adjoint() * w), tol);
  rep.pair_minus_h12_inner = fredholm_pair(minus_star, b_perp_inner, tol);

  rep.index_antisymmetric = rep.pair_plus.index == -rep.pair_minus.index;
  rep.pass = rep.index_antisymmetric;
  return rep;
}

namespace {

// Basis of x restricted to the orthogonal complement of w (within span x).
Matrix restrict_orthogonal(const Matrix& x, const Matrix& w,
                           const Tolerances& tol) {
  if (w.cols() == 0) return x;
  return orth(x * nullspace(Matrix(w.adjoint() * x), tol), tol);
}

}  // namespace

EllipticDecomposition extract_elliptic_decomposition(
    const Subspace& b, const SpectralSplit& split,
    const SpectralSplit& split_star, double residual_tol,
    const Tolerances& tol) {
  EllipticDecomposition dec;
  const Index n = split.dim();
  const Matrix chi_p = chi_plus_dense(split);
  const Matrix chi_m = Matrix::Identity(n, n) - chi_p;
  const Matrix chi_ps = chi_plus_dense(split_star);
  const Matrix chi_ms = Matrix::Identity(n, n) - chi_ps;

  const Subspace ran_p = span_of(chi_p, 0.0, tol);
  const Subspace ran_ms = span_of(chi_ms, 0.0, tol);
  const Subspace ann_b = annihilator(b, tol);

  // The eight spaces.
  dec.w_plus = intersection(span_of(chi_p, 0.5, tol), b, tol);
  dec.w_minus_star = intersection(span_of(chi_ms, 0.5, tol), ann_b, tol);
  dec.w_minus = span_of(chi_m * dec.w_minus_star.basis, 0.0, tol);
  dec.w_plus_star = span_of(chi_ps * dec.w_plus.basis, 0.0, tol);
  dec.v_minus_star =
      span_of(restrict_orthogonal(ran_ms.basis, dec.w_minus_star.basis, tol),
              0.0, tol);
  dec.v_minus = span_of(chi_m * dec.v_minus_star.basis, 0.0, tol);
  dec.v_plus = span_of(restrict_orthogonal(ran_p.basis, dec.w_plus.basis, tol),
                       0.0, tol);
  dec.v_plus_star = span_of(chi_ps * dec.v_plus.basis, 0.0, tol);

  if (dec.w_plus.dim() != dec.w_plus_star.dim() ||
      dec.w_minus.dim() != dec.w_minus_star.dim())
    throw Error(ErrorCode::DecompositionResidualTooLarge,
                "correction space dimensions disagree across the adjoint");

  // V+- (+) W+- must recover ran chi+-.
  dec.splitting_residual = std::max(
      subspace_gap(subspace_sum(dec.v_plus, dec.w_plus, tol),
                   span_of(chi_p, 0.0, tol)),
      subspace_gap(subspace_sum(dec.v_minus, dec.w_minus, tol),
                   span_of(chi_m, 0.0, tol)));

  // Graph map g = P_+ o (X_-)^{-1} with X_- = chi^-|_{B cap W+^perp} and
  // P_+ the projector onto V+ along W- (+) V- (+) W+.
  const Matrix bw = restrict_orthogonal(b.basis, dec.w_plus.basis, tol);
  const Matrix x_minus = chi_m * bw;
  Matrix kernel_p(n, dec.w_minus.dim() + dec.v_minus.dim() + dec.w_plus.dim());
  kernel_p << dec.w_minus.basis, dec.v_minus.basis, dec.w_plus.basis;
  const Matrix proj_plus =
      oblique_projector(dec.v_plus, span_of(kernel_p, 0.0, tol), tol);

  dec.g = Matrix::Zero(dec.v_plus.dim(), dec.v_minus.dim());
  {
    const auto qr = x_minus.colPivHouseholderQr();
    for (Index j = 0; j < dec.v_minus.dim(); ++j) {
      const Vector c = qr.solve(dec.v_minus.basis.col(j));
      dec.g.col(j) = dec.v_plus.basis.adjoint() * (proj_plus * (bw * c));
    }
  }

  // Reconstruction B = W+ (+) {v + g v}.
  Matrix rebuilt(n, dec.w_plus.dim() + dec.v_minus.dim());
  rebuilt << dec.w_plus.basis,
      dec.v_minus.basis + dec.v_plus.basis * dec.g;
  dec.reconstruction_residual = subspace_gap(span_of(rebuilt, 0.5, tol), b);

  // Adjoint side: h0 = P_-^* o (X_+^*)^{-1}; g^* = -h0 under the duality
  // pairing, and ann(B) = W-* (+) {u - g^* u : u in V+*}.
  const Matrix bws =
      restrict_orthogonal(ann_b.basis, dec.w_minus_star.basis, tol);
  const Matrix x_plus_star = chi_ps * bws;
  Matrix kernel_ms(n, dec.w_minus_star.dim() + dec.v_plus_star.dim() +
                          dec.w_plus_star.dim());
  kernel_ms << dec.w_minus_star.basis, dec.v_plus_star.basis,
      dec.w_plus_star.basis;
  const Matrix proj_minus_star =
      oblique_projector(dec.v_minus_star, span_of(kernel_ms, 0.0, tol), tol);
  Matrix h0 = Matrix::Zero(dec.v_minus_star.dim(), dec.v_plus_star.dim());
  {
    const auto qr = x_plus_star.colPivHouseholderQr();
    for (Index j = 0; j < dec.v_plus_star.dim(); ++j) {
      const Vector c = qr.solve(dec.v_plus_star.basis.col(j));
      h0.col(j) =
          dec.v_minus_star.basis.adjoint() * (proj_minus_star * (bws * c));
    }
  }
  dec.g_star = -h0;

  Matrix rebuilt_star(n, dec.w_minus_star.dim() + dec.v_plus_star.dim());
  rebuilt_star << dec.w_minus_star.basis,
      dec.v_plus_star.basis - dec.v_minus_star.basis * dec.g_star;
  dec.adjoint_reconstruction_residual =
      subspace_gap(span_of(rebuilt_star, 0.5, tol), ann_b);

  if (dec.reconstruction_residual > residual_tol ||
      dec.adjoint_reconstruction_residual > residual_tol ||
      dec.splitting_residual > residual_tol)
    throw Error(ErrorCode::DecompositionResidualTooLarge,
                "elliptic decomposition residual above tolerance");
  return dec;
}

Matrix graph_map_matrix(const EllipticDecomposition& dec) {
  return dec.v_plus.basis * dec.g * dec.v_minus.basis.adjoint();
}

SemiregularityReport semiregularity_check(const EllipticDecomposition& dec,
                                          const SpectralSplit& split, double s,
                                          SobolevMetric::Kind kind) {
  SemiregularityReport rep;
  rep.s = s;
  const SobolevMetric metric = make_metric(split, s, kind);
  const Matrix w = metric.dense();
  const Matrix ym = w * dec.v_minus.basis;
  const Matrix ypg = w * (dec.v_plus.basis * dec.g);

  auto gen_sup = [](const Matrix& num, const Matrix& den) {
    // sup |num c| / |den c| via the pencil (num^H num, den^H den).
    const Matrix gn = num.adjoint() * num;
    const Matrix gd = den.adjoint() * den;
    const Eigen::LLT<Matrix> llt(gd);
    const Matrix linv =
        llt.matrixL().solve(Matrix::Identity(gd.rows(), gd.cols()));
    Eigen::SelfAdjointEigenSolver<Matrix> es(linv * gn * linv.adjoint());
    return std::sqrt(
        std::max(0.0, es.eigenvalues()(es.eigenvalues().size() - 1)));
  };

  if (dec.v_minus.dim() > 0) {
    rep.g_norm = gen_sup(ypg, ym);
    rep.graph_constant = gen_sup(Matrix(ym + ypg), ym);
  }
  for (Index j = 0; j < dec.w_plus.dim(); ++j)
    rep.w_plus_norm =
        std::max(rep.w_plus_norm, (w * dec.w_plus.basis.col(j)).norm());
  return rep;
}

PseudoLocalReport pseudo_local_symbol_test(
    const ProjectorSymbol& sigma_p, const SymbolField& sigma_a,
    const std::vector<CosphereSample>& grid, const Tolerances& tol) {
  PseudoLocalReport rep;
  rep.pass = true;
  for (const auto& sample : grid) {
    const Matrix p = sigma_p(sample.x, sample.xi);
    const double pscale = std::max(1.0, spectral_norm(p));
    if (spectral_norm(p * p - p) > 1e-8 * pscale)
      throw Error(ErrorCode::NotAProjectorSymbol,
                  "sigma_P is not idempotent at a sample");
    const Matrix sa = sigma_a.eval_principal(sample.x, sample.xi);

    PseudoLocalReport::Sample out;
    out.at = sample;

    // Negative-real-part generalized eigenspace of i sigma_A; the shift by
    // the cut is order zero and invisible at the symbol level.
    auto negative = [](Complex z) { return z.real() < 0.0; };
    const OrderedSchur os = ordered_schur(Complex(0, 1) * sa, negative);
    const Matrix eneg = os.q.leftCols(os.n_selected);
    const Matrix ran_p = orth(p, tol);
    out.margin = (eneg.cols() == ran_p.cols() && eneg.cols() > 0)
                     ? smallest_singular_value(
                           Matrix(ran_p.adjoint() * p * eneg))
                     : 0.0;

    // The formal adjoint of a first-order operator has principal symbol
    // -sigma^H, so i sigma_{A^*} = (i sigma_A)^H.
    const OrderedSchur oss =
        ordered_schur(Matrix((Complex(0, 1) * sa).adjoint()), negative);
    const Matrix eneg_star = oss.q.leftCols(oss.n_selected);
    const Matrix ran_pstar = orth(Matrix(p.adjoint()), tol);
    out.margin_adjoint =
        (eneg_star.cols() == ran_pstar.cols() && eneg_star.cols() > 0)
            ? smallest_singular_value(
                  Matrix(ran_pstar.adjoint() * p.adjoint() * eneg_star))
            : 0.0;

    const double tau = tol.rank_threshold(pscale);
    out.pass = out.margin > tau && out.margin_adjoint > tau;
    rep.pass = rep.pass && out.pass;
    rep.samples.push_back(out);
  }
  return rep;
}

}  // namespace specbvp
