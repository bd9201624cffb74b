#include "specbvp/sobolev.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>

namespace specbvp {

namespace {

std::vector<Index> block_offsets(const SpectralSplit& split) {
  std::vector<Index> offs;
  Index off = 0;
  for (int b = 0; b < split.nblocks(); ++b) {
    offs.push_back(off);
    off += split.block_size(b);
  }
  offs.push_back(off);
  return offs;
}

}  // namespace

double SobolevMetric::norm(const Vector& u) const { return apply(u).norm(); }

Vector SobolevMetric::apply(const Vector& u) const {
  if (u.size() != dim())
    throw Error(ErrorCode::DimensionMismatch, "vector size");
  Vector out(u.size());
  for (std::size_t b = 0; b < weight.size(); ++b) {
    const Index off = offsets[b];
    const Index sz = weight[b].rows();
    out.segment(off, sz) = weight[b] * u.segment(off, sz);
  }
  return out;
}

Vector SobolevMetric::apply_inv(const Vector& u) const {
  if (u.size() != dim())
    throw Error(ErrorCode::DimensionMismatch, "vector size");
  Vector out(u.size());
  for (std::size_t b = 0; b < weight.size(); ++b) {
    const Index off = offsets[b];
    const Index sz = weight[b].rows();
    out.segment(off, sz) = weight_inv[b] * u.segment(off, sz);
  }
  return out;
}

Matrix SobolevMetric::dense() const {
  Matrix full = Matrix::Zero(dim(), dim());
  for (std::size_t b = 0; b < weight.size(); ++b)
    full.block(offsets[b], offsets[b], weight[b].rows(), weight[b].cols()) =
        weight[b];
  return full;
}

Index SobolevMetric::dim() const {
  return weight.empty() ? 0 : offsets[weight.size() - 1] +
                                  weight.back().rows();
}

SobolevMetric modulus_metric(const SpectralSplit& split, double s) {
  SobolevMetric m;
  m.s = s;
  m.kind = SobolevMetric::Modulus;
  m.weight = modulus_power(split, s);
  m.weight_inv = modulus_power(split, -s);
  std::vector<Index> offs = block_offsets(split);
  offs.pop_back();
  m.offsets = offs;
  return m;
}

SobolevMetric reference_metric(const SpectralSplit& split, double s) {
  SobolevMetric m;
  m.s = s;
  m.kind = SobolevMetric::Reference;
  std::vector<Index> offs = block_offsets(split);
  offs.pop_back();
  m.offsets = offs;
  if (split.blocked) {
    for (std::size_t b = 0; b < split.modes.size(); ++b) {
      const ModeIndex k = split.modes[b];
      const double bracket =
          std::pow(1.0 + k.k1 * k.k1 + k.k2 * k.k2, 0.5 * s);
      m.weight.push_back(bracket *
                         Matrix::Identity(split.fiber_dim, split.fiber_dim));
      m.weight_inv.push_back((1.0 / bracket) *
                             Matrix::Identity(split.fiber_dim,
                                              split.fiber_dim));
    }
  } else {
    const Index n = split.dim();
    Matrix w = Matrix::Zero(n, n);
    for (std::size_t p = 0; p < split.modes.size(); ++p) {
      const ModeIndex k = split.modes[p];
      const double bracket =
          std::pow(1.0 + k.k1 * k.k1 + k.k2 * k.k2, 0.5 * s);
      for (int f = 0; f < split.fiber_dim; ++f) {
        const Index idx = static_cast<Index>(p) * split.fiber_dim + f;
        w(idx, idx) = bracket;
      }
    }
    m.weight.push_back(w);
    m.weight_inv.push_back(w.inverse());
  }
  return m;
}

SobolevMetric make_metric(const SpectralSplit& split, double s,
                          SobolevMetric::Kind kind) {
  return kind == SobolevMetric::Modulus ? modulus_metric(split, s)
                                        : reference_metric(split, s);
}

double sobolev_norm(const Vector& u, const SobolevMetric& metric) {
  return metric.norm(u);
}

MetricEquivalence metric_equivalence(const SobolevMetric& a,
                                     const SobolevMetric& b) {
  if (a.dim() != b.dim())
    throw Error(ErrorCode::DimensionMismatch, "metric dimensions");
  // |u|_a / |u|_b ranges over the singular values of W_a W_b^{-1}
  // (block diagonal, so the extrema are taken over blocks).
  MetricEquivalence eq;
  eq.lower = std::numeric_limits<double>::infinity();
  eq.upper = 0.0;
  if (a.weight.size() != b.weight.size())
    throw Error(ErrorCode::DimensionMismatch, "metric block structure");
  for (std::size_t blk = 0; blk < a.weight.size(); ++blk) {
    Eigen::JacobiSVD<Matrix> svd(a.weight[blk] * b.weight_inv[blk]);
    const auto& sv = svd.singularValues();
    eq.lower = std::min(eq.lower, sv(sv.size() - 1));
    eq.upper = std::max(eq.upper, sv(0));
  }
  return eq;
}

Subspace spectral_subspace(const SpectralSplit& split,
                           const SobolevMetric& metric, int sign,
                           const Tolerances& tol) {
  // Per-block range of chi^{+-}, orthonormalised in the weighted coordinates
  // and mapped back: basis^H W^H W basis = I.
  const Index n = split.dim();
  std::vector<Matrix> pieces;
  Index total = 0;
  for (int b = 0; b < split.nblocks(); ++b) {
    const auto bi = static_cast<size_t>(b);
    const Matrix chi =
        sign > 0 ? split.chi_plus[bi] : split.chi_minus(b);
    const Matrix w = metric.weight[bi];
    const Matrix q = orth(w * chi, tol);
    pieces.push_back(metric.weight_inv[bi] * q);
    total += q.cols();
  }
  Subspace out;
  out.s = metric.s;
  out.basis = Matrix::Zero(n, total);
  Index col = 0;
  for (int b = 0; b < split.nblocks(); ++b) {
    const auto bi = static_cast<size_t>(b);
    out.basis.block(metric.offsets[bi], col, pieces[bi].rows(),
                    pieces[bi].cols()) = pieces[bi];
    col += pieces[bi].cols();
  }
  return out;
}

CheckSpaceNorm check_space_norm(const SpectralSplit& split,
                                SobolevMetric::Kind kind) {
  CheckSpaceNorm cs;
  cs.chi_plus = split.chi_plus;
  std::vector<Index> offs = block_offsets(split);
  offs.pop_back();
  cs.offsets = offs;
  cs.half = make_metric(split, 0.5, kind);
  cs.minus_half = make_metric(split, -0.5, kind);
  return cs;
}

double CheckSpaceNorm::check(const Vector& u) const {
  double acc = 0.0;
  for (std::size_t b = 0; b < chi_plus.size(); ++b) {
    const Index off = offsets[b];
    const Index sz = chi_plus[b].rows();
    const Vector ub = u.segment(off, sz);
    const Vector up = chi_plus[b] * ub;
    const Vector um = ub - up;
    acc += (half.weight[b] * um).squaredNorm() +
           (minus_half.weight[b] * up).squaredNorm();
  }
  return std::sqrt(acc);
}

double CheckSpaceNorm::hat(const Vector& u) const {
  double acc = 0.0;
  for (std::size_t b = 0; b < chi_plus.size(); ++b) {
    const Index off = offsets[b];
    const Index sz = chi_plus[b].rows();
    const Vector ub = u.segment(off, sz);
    const Vector up = chi_plus[b] * ub;
    const Vector um = ub - up;
    acc += (minus_half.weight[b] * um).squaredNorm() +
           (half.weight[b] * up).squaredNorm();
  }
  return std::sqrt(acc);
}

double check_norm(const Vector& u, const CheckSpaceNorm& cs) {
  return cs.check(u);
}

double hat_norm(const Vector& u, const CheckSpaceNorm& cs) {
  return cs.hat(u);
}

CutIndependenceReport cut_independence_report(const FourierOperator& a,
                                              double r, double q,
                                              int sample_count,
                                              std::uint64_t seed,
                                              const Tolerances& tol) {
  const SpectralSplit split_r = spectral_split_oracle(a, {r, 0.0}, tol);
  const SpectralSplit split_q = spectral_split_oracle(a, {q, 0.0}, tol);
  const CheckSpaceNorm cs_r = check_space_norm(split_r);
  const CheckSpaceNorm cs_q = check_space_norm(split_q);

  CutIndependenceReport rep;
  rep.seed = seed;
  rep.inf_ratio = std::numeric_limits<double>::infinity();
  rep.sup_ratio = 0.0;

  // Sharp bracket: per block, the extremal generalized eigenvalues of the
  // pencil (G_r, G_q) where G = S^H S and S stacks the two weighted
  // projector parts of the norm.
  rep.predicted_lower = std::numeric_limits<double>::infinity();
  rep.predicted_upper = 0.0;
  for (int b = 0; b < split_r.nblocks(); ++b) {
    const auto bi = static_cast<size_t>(b);
    const Index sz = split_r.block_size(b);
    Matrix s_r(2 * sz, sz), s_q(2 * sz, sz);
    const Matrix eye = Matrix::Identity(sz, sz);
    s_r << cs_r.half.weight[bi] * (eye - split_r.chi_plus[bi]),
        cs_r.minus_half.weight[bi] * split_r.chi_plus[bi];
    s_q << cs_q.half.weight[bi] * (eye - split_q.chi_plus[bi]),
        cs_q.minus_half.weight[bi] * split_q.chi_plus[bi];
    const Matrix g_r = s_r.adjoint() * s_r;
    const Matrix g_q = s_q.adjoint() * s_q;
    const Eigen::LLT<Matrix> llt(g_q);
    const Matrix l_inv =
        llt.matrixL().solve(Matrix::Identity(sz, sz));
    Eigen::SelfAdjointEigenSolver<Matrix> es(l_inv * g_r * l_inv.adjoint());
    rep.predicted_lower =
        std::min(rep.predicted_lower, std::sqrt(es.eigenvalues()(0)));
    rep.predicted_upper = std::max(
        rep.predicted_upper, std::sqrt(es.eigenvalues()(sz - 1)));
  }

  Rng rng(seed);
  for (int i = 0; i < sample_count; ++i) {
    const Vector u = rng.cgaussian_vector(split_r.dim());
    CutIndependenceReport::Sample s;
    s.norm_r = cs_r.check(u);
    s.norm_q = cs_q.check(u);
    s.ratio = s.norm_r / s.norm_q;
    rep.inf_ratio = std::min(rep.inf_ratio, s.ratio);
    rep.sup_ratio = std::max(rep.sup_ratio, s.ratio);
    rep.samples.push_back(s);
  }

  // Cross projector chi^-(A_hi) chi^+(A_lo) with hi > lo (the order in which
  // it catches exactly the strip): finite rank = strip count.
  const SpectralSplit& hi = split_r.cut.r >= split_q.cut.r ? split_r : split_q;
  const SpectralSplit& lo = split_r.cut.r >= split_q.cut.r ? split_q : split_r;
  for (int b = 0; b < hi.nblocks(); ++b) {
    const auto bi = static_cast<size_t>(b);
    const Matrix chi_m_hi = Matrix::Identity(hi.block_size(b),
                                             hi.block_size(b)) -
                            hi.chi_plus[bi];
    const Matrix cross = chi_m_hi * lo.chi_plus[bi];
    Eigen::JacobiSVD<Matrix> svd(cross);
    // Rank scale from the factors: the product of two projectors that
    // annihilate each other exactly is pure rounding noise.
    const double scale =
        spectral_norm(chi_m_hi) * spectral_norm(lo.chi_plus[bi]);
    rep.cross_rank += static_cast<int>(
        rank_decision(svd.singularValues(), tol, scale).rank);
  }
  rep.strip_count = strip_count(a, std::min(r, q), std::max(r, q), tol);
  return rep;
}

PairingReport duality_pairing(const SpectralSplit& split,
                              const SpectralSplit& split_star, double s,
                              int sign, const Vector& u, const Vector& v,
                              const Tolerances& tol) {
  const SobolevMetric metric_s = modulus_metric(split, s);
  const SobolevMetric metric_ms = modulus_metric(split_star, -s);
  const Subspace ys = spectral_subspace(split, metric_s, sign, tol);
  const Subspace xs = spectral_subspace(split_star, metric_ms, sign, tol);
  PairingReport rep;
  rep.value = u.dot(v);
  if (xs.dim() != ys.dim())
    throw Error(ErrorCode::DegeneratePairing,
                "subspace dimensions differ across the pairing");
  if (xs.dim() > 0)
    rep.gram_smin =
        smallest_singular_value(Matrix(xs.basis.adjoint() * ys.basis));
  else
    rep.gram_smin = 1.0;
  rep.perfect = rep.gram_smin > tol.pairing_min;
  if (!rep.perfect)
    throw Error(ErrorCode::DegeneratePairing,
                "pairing Gram matrix nearly singular");
  return rep;
}

}  // namespace specbvp
