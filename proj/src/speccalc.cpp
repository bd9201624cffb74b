#include "specbvp/speccalc.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <thread>

namespace specbvp {

namespace {

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  const int nt = std::min(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(nt));
  for (int t = 0; t < nt; ++t) {
    pool.emplace_back([&, t]() {
      for (int i = t; i < n; i += nt) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(static_cast<size_t>(n), 0.0);
  w.assign(static_cast<size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double xi = std::cos(pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = xi;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * xi * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = n * (xi * p1 - p0) / (xi * xi - 1.0);
      const double dx = p1 / dp;
      xi -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double p0 = 1.0, p1 = xi;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * xi * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    const double dp = n * (xi * p1 - p0) / (xi * xi - 1.0);
    x[static_cast<size_t>(i)] = xi;
    w[static_cast<size_t>(i)] = 2.0 / ((1.0 - xi * xi) * dp * dp);
  }
}

struct PanelSet {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss panels covering [lo, hi] with geometrically graded panel edges.
PanelSet graded_panels(double lo, double hi, int panels_per_decade,
                       int nodes_per_panel) {
  PanelSet out;
  std::vector<double> xg, wg;
  gauss_legendre(nodes_per_panel, xg, wg);
  const double decades = std::log10(hi / lo);
  const int npanels = std::max(1, static_cast<int>(
                                      std::ceil(decades * panels_per_decade)));
  const double growth = std::pow(hi / lo, 1.0 / npanels);
  double a = lo;
  for (int p = 0; p < npanels; ++p) {
    const double b = (p == npanels - 1) ? hi : a * growth;
    for (int i = 0; i < nodes_per_panel; ++i) {
      out.nodes.push_back(0.5 * (a + b) +
                          0.5 * (b - a) * xg[static_cast<size_t>(i)]);
      out.weights.push_back(0.5 * (b - a) * wg[static_cast<size_t>(i)]);
    }
    a = b;
  }
  return out;
}

double angle_from_real_axis(Complex lam) {
  const double mod = std::abs(lam);
  if (mod == 0.0) return 0.0;
  return std::asin(std::min(1.0, std::abs(lam.imag()) / mod));
}

std::vector<Matrix> blocks_of(const FourierOperator& a) {
  if (a.block_diagonal()) return a.blocks;
  return {a.dense};
}

}  // namespace

Index SpectralSplit::block_offset(int b) const {
  Index off = 0;
  for (int i = 0; i < b; ++i) off += block_size(i);
  return off;
}

Index SpectralSplit::dim() const {
  Index d = 0;
  for (int b = 0; b < nblocks(); ++b) d += block_size(b);
  return d;
}

Vector apply_blocks(const SpectralSplit& split, const std::vector<Matrix>& b,
                    const Vector& u) {
  if (u.size() != split.dim())
    throw Error(ErrorCode::DimensionMismatch, "vector size");
  Vector out(u.size());
  Index off = 0;
  for (const auto& m : b) {
    out.segment(off, m.rows()) = m * u.segment(off, m.rows());
    off += m.rows();
  }
  return out;
}

Matrix assemble_blocks(const SpectralSplit& split,
                       const std::vector<Matrix>& b) {
  Matrix full = Matrix::Zero(split.dim(), split.dim());
  Index off = 0;
  for (const auto& m : b) {
    full.block(off, off, m.rows(), m.cols()) = m;
    off += m.rows();
  }
  return full;
}

double blocks_spectral_norm(const std::vector<Matrix>& b) {
  double n = 0.0;
  for (const auto& m : b) n = std::max(n, spectral_norm(m));
  return n;
}

Vector SpectralSplit::apply_chi_plus(const Vector& u) const {
  return apply_blocks(*this, chi_plus, u);
}

Vector SpectralSplit::apply_chi_minus(const Vector& u) const {
  Vector v = apply_blocks(*this, chi_plus, u);
  return u - v;
}

Vector SpectralSplit::apply_modulus(const Vector& u) const {
  return apply_blocks(*this, modulus, u);
}

Vector SpectralSplit::apply_a_r(const Vector& u) const {
  return apply_blocks(*this, a_r, u);
}

std::vector<Matrix> SpectralSplit::modulus_function(
    const ScalarFunctionJet& fj) const {
  std::vector<Matrix> out;
  out.reserve(modulus_calc.size());
  for (const auto& fc : modulus_calc) out.push_back(fc.evaluate(fj));
  return out;
}

Vector SpectralSplit::apply_modulus_function(const ScalarFunctionJet& fj,
                                             const Vector& u) const {
  return apply_blocks(*this, modulus_function(fj), u);
}

std::vector<Complex> SpectralSplit::spectrum_a() const {
  std::vector<Complex> evs;
  for (const auto& es : eigendata)
    for (const auto& c : es.clusters)
      for (int i = 0; i < c.algebraic; ++i) evs.push_back(c.lambda + cut.r);
  std::sort(evs.begin(), evs.end(), [](Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return evs;
}

std::vector<SpectralCut> find_cuts(const FourierOperator& a, double window_lo,
                                   double window_hi, const Tolerances& tol) {
  if (window_hi <= window_lo)
    throw Error(ErrorCode::InvalidArgument, "empty window");
  // Cluster per block first: computed eigenvalues of defective pairs carry
  // sqrt(eps) noise that must not masquerade as spectral gaps.
  std::vector<double> re;
  double scale = 1.0;
  for (const auto& blk : blocks_of(a)) {
    const EigStructure es = eig_structure(blk, tol);
    for (const auto& c : es.clusters) {
      re.push_back(c.lambda.real());
      scale = std::max(scale, std::abs(c.lambda.real()));
    }
  }
  std::sort(re.begin(), re.end());
  const double dedup =
      std::max(1e-9 * scale,
               640.0 * std::sqrt(std::numeric_limits<double>::epsilon() *
                                 scale));
  std::vector<double> distinct;
  for (const double v : re) {
    if (distinct.empty() || v - distinct.back() > dedup) distinct.push_back(v);
  }

  std::vector<SpectralCut> cuts;
  auto push = [&](double mid, double eps) {
    if (mid < window_lo || mid > window_hi) return;
    if (eps <= dedup) return;
    cuts.push_back({mid, eps});
  };
  if (distinct.empty()) {
    push(0.5 * (window_lo + window_hi), 0.5 * (window_hi - window_lo));
  } else {
    if (window_lo < distinct.front())
      push(0.5 * (window_lo + distinct.front()),
           0.5 * (distinct.front() - window_lo));
    for (std::size_t i = 0; i + 1 < distinct.size(); ++i)
      push(0.5 * (distinct[i] + distinct[i + 1]),
           0.5 * (distinct[i + 1] - distinct[i]));
    if (window_hi > distinct.back())
      push(0.5 * (distinct.back() + window_hi),
           0.5 * (window_hi - distinct.back()));
  }
  if (cuts.empty())
    throw Error(ErrorCode::NoGapInWindow, "no admissible cut in window");
  return cuts;
}

SpectralSplit spectral_split_oracle(const FourierOperator& a,
                                    const SpectralCut& cut,
                                    const Tolerances& tol, int threads) {
  SpectralSplit split;
  split.cut = cut;
  split.fiber_dim = a.fiber_dim();
  split.base = a.data.base;
  split.modes = a.modes;
  split.blocked = a.block_diagonal();

  const std::vector<Matrix> blocks = blocks_of(a);
  const int nb = static_cast<int>(blocks.size());
  split.a_r.resize(static_cast<size_t>(nb));
  split.chi_plus.resize(static_cast<size_t>(nb));
  split.modulus.resize(static_cast<size_t>(nb));
  split.eigendata.resize(static_cast<size_t>(nb));
  split.modulus_calc.resize(static_cast<size_t>(nb));

  std::vector<std::string> failures(static_cast<size_t>(nb));
  parallel_for(nb, threads, [&](int b) {
    const auto bi = static_cast<size_t>(b);
    try {
      Matrix ar = blocks[bi];
      ar.diagonal().array() -= cut.r;
      split.a_r[bi] = ar;
      split.eigendata[bi] = eig_structure(ar, tol);
      double margin = std::numeric_limits<double>::infinity();
      for (const auto& c : split.eigendata[bi].clusters)
        margin = std::min(margin, std::abs(c.lambda.real()));
      const double scale = std::max(1.0, spectral_norm(ar));
      if (margin <= tol.rank_threshold(scale) * 1e2)
        throw Error(ErrorCode::CutHitsSpectrum,
                    "cut passes through Re spec(A)");
      split.chi_plus[bi] =
          spectral_projector(ar, [](Complex z) { return z.real() > 0.0; });
      const Matrix sgn = 2.0 * split.chi_plus[bi] -
                         Matrix::Identity(ar.rows(), ar.cols());
      split.modulus[bi] = sgn * ar;
      split.modulus_calc[bi] = function_calculus(split.modulus[bi], tol);
    } catch (const Error& e) {
      failures[bi] = e.what();
    }
  });
  for (const auto& f : failures)
    if (!f.empty()) throw Error(ErrorCode::CutHitsSpectrum, f);

  // Empirical angles and envelope from the eigenvalues.
  double omega_r = 0.0;
  double max_mod_a = 0.0;
  std::vector<Complex> spec_a;
  for (const auto& es : split.eigendata) {
    for (const auto& c : es.clusters) {
      omega_r = std::max(omega_r, angle_from_real_axis(c.lambda));
      const Complex lam_a = c.lambda + cut.r;
      spec_a.push_back(lam_a);
      max_mod_a = std::max(max_mod_a, std::abs(lam_a));
    }
  }
  split.omega_r = omega_r;
  double env_omega = 0.0;
  for (const Complex lam : spec_a)
    if (std::abs(lam) >= 0.5 * max_mod_a)
      env_omega = std::max(env_omega, angle_from_real_axis(lam));
  double env_r = 0.0;
  for (const Complex lam : spec_a)
    if (angle_from_real_axis(lam) > env_omega + 1e-12)
      env_r = std::max(env_r, std::abs(lam));
  split.envelope_omega = env_omega;
  split.envelope_R = env_r;

  // ||A_r u|| vs |||A_r| u||: the ratio is controlled by the singular values
  // of sgn(A_r).
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (int b = 0; b < nb; ++b) {
    Eigen::JacobiSVD<Matrix> svd(split.sgn(b));
    const auto& sv = svd.singularValues();
    if (sv.size() > 0) {
      lo = std::min(lo, sv(sv.size() - 1));
      hi = std::max(hi, sv(0));
    }
  }
  split.opsect_lower = lo;
  split.opsect_upper = hi;
  return split;
}

ContourProjector spectral_split_contour(const FourierOperator& a,
                                        const SpectralCut& cut,
                                        const ContourQuadrature& quad,
                                        const Tolerances& tol, int threads) {
  const std::vector<Matrix> blocks = blocks_of(a);
  const int nb = static_cast<int>(blocks.size());

  // Spectral extent of A_r for automatic quadrature parameters.
  double min_mod = std::numeric_limits<double>::infinity();
  double max_mod = 0.0;
  for (const auto& blk : blocks) {
    Matrix ar = blk;
    ar.diagonal().array() -= cut.r;
    Eigen::ComplexEigenSolver<Matrix> es(ar, false);
    for (Index i = 0; i < es.eigenvalues().size(); ++i) {
      const double m = std::abs(es.eigenvalues()(i));
      min_mod = std::min(min_mod, m);
      max_mod = std::max(max_mod, m);
    }
  }
  if (!(min_mod > 0.0))
    throw Error(ErrorCode::CutHitsSpectrum, "A_r is singular");

  const double h = quad.truncation > 0.0 ? quad.truncation : 50.0 * max_mod;
  const double inner = quad.inner > 0.0 ? quad.inner : 0.1 * min_mod;
  if (h <= max_mod)
    throw Error(ErrorCode::InvalidArgument,
                "truncation height below the spectral radius");
  PanelSet ps = graded_panels(inner, h, quad.panels_per_decade,
                              quad.nodes_per_panel);
  // One panel covering [0, inner]; the paired integrand is regular there.
  {
    std::vector<double> xg, wg;
    gauss_legendre(quad.nodes_per_panel, xg, wg);
    for (int i = 0; i < quad.nodes_per_panel; ++i) {
      ps.nodes.push_back(0.5 * inner * (1.0 + xg[static_cast<size_t>(i)]));
      ps.weights.push_back(0.5 * inner * wg[static_cast<size_t>(i)]);
    }
  }

  ContourProjector out;
  out.chi_plus.resize(static_cast<size_t>(nb));
  out.truncation_h = h;
  out.nodes_used = 2 * static_cast<int>(ps.nodes.size());

  std::vector<double> worst_cond(static_cast<size_t>(nb), 0.0);
  std::vector<double> tail_est(static_cast<size_t>(nb), 0.0);
  std::vector<std::string> failures(static_cast<size_t>(nb));

  parallel_for(nb, threads, [&](int b) {
    const auto bi = static_cast<size_t>(b);
    try {
      Matrix ar = blocks[bi];
      ar.diagonal().array() -= cut.r;
      const Index n = ar.rows();
      const Matrix eye = Matrix::Identity(n, n);
      Matrix acc = Matrix::Zero(n, n);
      for (std::size_t j = 0; j < ps.nodes.size(); ++j) {
        const double y = ps.nodes[j];
        const double w = ps.weights[j];
        for (const double sign : {1.0, -1.0}) {
          const Complex zeta(0.0, sign * y);
          Matrix shifted = zeta * eye - ar;
          Eigen::PartialPivLU<Matrix> lu(shifted);
          const double rc = lu.rcond();
          if (rc > 0.0)
            worst_cond[bi] = std::max(worst_cond[bi], 1.0 / rc);
          if (rc > 0.0 && 1.0 / rc > quad.condition_limit)
            throw Error(ErrorCode::ResolventIllConditioned,
                        "resolvent condition number beyond limit");
          // (i/2pi) zeta^{-1} A_r (zeta - A_r)^{-1} dzeta, dzeta = i dy.
          const Matrix resolvent = lu.solve(eye);
          acc += (w * Complex(0, 1) * Complex(0, 1) / (2.0 * pi) / zeta) *
                 (ar * resolvent);
        }
      }
      // Truncation tail from chi^+ = 1/2 + (1/pi) int_0^inf A (y^2+A^2)^-1 dy:
      // int_H^inf = sum_l (-1)^l A^{2l+1} / ((2l+1) H^{2l+1}).
      Matrix tail = Matrix::Zero(n, n);
      Matrix apow = ar;
      const Matrix ar2 = ar * ar;
      for (int l = 0; l < quad.tail_terms; ++l) {
        const double c = (l % 2 == 0 ? 1.0 : -1.0) /
                         ((2.0 * l + 1.0) * std::pow(h, 2.0 * l + 1.0));
        tail += (c / pi) * apow;
        apow = apow * ar2;
      }
      tail_est[bi] =
          spectral_norm(apow) /
          (pi * (2.0 * quad.tail_terms + 1.0) *
           std::pow(h, 2.0 * quad.tail_terms + 1.0));
      out.chi_plus[bi] = 0.5 * eye + acc + tail;
    } catch (const Error& e) {
      failures[bi] = e.what();
    }
  });
  for (const auto& f : failures)
    if (!f.empty()) throw Error(ErrorCode::ResolventIllConditioned, f);

  out.worst_resolvent_condition =
      *std::max_element(worst_cond.begin(), worst_cond.end());
  out.truncation_estimate = *std::max_element(tail_est.begin(), tail_est.end());
  (void)tol;
  return out;
}

std::vector<Matrix> modulus_power(const SpectralSplit& split, double s) {
  for (const auto& es : split.eigendata)
    for (const auto& c : es.clusters)
      if (std::abs(c.lambda) == 0.0)
        throw Error(ErrorCode::SingularModulus, "modulus not invertible");
  auto jet = [s](Complex lam, int j) {
    double coeff = 1.0;
    for (int l = 0; l < j; ++l) coeff *= (s - l);
    return coeff * std::pow(lam, Complex(s - j, 0.0));
  };
  return split.modulus_function(jet);
}

std::vector<Matrix> semigroup(const SpectralSplit& split, double t) {
  return semigroup(split, Complex(t, 0.0));
}

std::vector<Matrix> semigroup(const SpectralSplit& split, Complex zeta) {
  if (zeta.real() < 0.0)
    throw Error(ErrorCode::InvalidArgument,
                "semigroup time must have Re >= 0");
  auto jet = [zeta](Complex lam, int j) {
    Complex c(1, 0);
    for (int l = 0; l < j; ++l) c *= -zeta;
    return c * std::exp(-zeta * lam);
  };
  return split.modulus_function(jet);
}

ScalarFunctionJet PsiFunction::jet() const {
  const auto fn = f;
  const double holo = holomorphy_angle;
  return [fn, holo](Complex lam, int j) -> Complex {
    if (j == 0) return fn(lam);
    const double arg = std::abs(std::arg(lam));
    const double room = std::max(holo - arg, 0.05);
    const double radius = 0.5 * std::abs(lam) * std::sin(std::min(room, 1.0));
    return cauchy_derivative(fn, lam, j, std::max(radius, 1e-8));
  };
}

PsiFunction psi_alpha(double alpha) {
  PsiFunction psi;
  psi.alpha = alpha;
  psi.f = [alpha](Complex z) {
    return std::pow(z, Complex(alpha, 0.0)) * std::exp(-z);
  };
  return psi;
}

PsiResult psi_calculus(const SpectralSplit& split, const PsiFunction& psi,
                       PsiMethod method, const Tolerances& tol) {
  PsiResult out;
  if (method == PsiMethod::Eigen) {
    out.value = split.modulus_function(psi.jet());
    return out;
  }

  // Contour method: boundary rays of a sector of angle theta strictly
  // between omega_r and the holomorphy angle.
  if (split.omega_r >= psi.holomorphy_angle - 1e-3)
    throw Error(ErrorCode::SectorTooNarrow,
                "spectrum angle reaches the holomorphy sector");
  const double theta =
      0.5 * (split.omega_r + psi.holomorphy_angle);

  double min_mod = std::numeric_limits<double>::infinity(), max_mod = 0.0;
  for (const auto& es : split.eigendata) {
    for (const auto& c : es.clusters) {
      min_mod = std::min(min_mod, std::abs(c.lambda));
      max_mod = std::max(max_mod, std::abs(c.lambda));
    }
  }
  const double rho_min =
      min_mod * std::pow(1e-9, 1.0 / std::max(psi.alpha, 0.25));
  const double rho_max =
      max_mod * std::pow(1e9, 1.0 / std::max(psi.alpha, 0.25));
  PanelSet ps = graded_panels(rho_min, rho_max, 6, 10);

  out.value.resize(split.modulus.size());
  const Complex eip = std::polar(1.0, theta);
  const Complex eim = std::polar(1.0, -theta);
  for (int b = 0; b < split.nblocks(); ++b) {
    const Matrix& t = split.modulus[static_cast<size_t>(b)];
    const Index n = t.rows();
    const Matrix eye = Matrix::Identity(n, n);
    Matrix acc = Matrix::Zero(n, n);
    for (std::size_t j = 0; j < ps.nodes.size(); ++j) {
      const double rho = ps.nodes[j];
      const double w = ps.weights[j];
      const Complex zm = rho * eim;
      const Complex zp = rho * eip;
      const Matrix rm = (zm * eye - t).partialPivLu().solve(eye);
      const Matrix rp = (zp * eye - t).partialPivLu().solve(eye);
      // Counterclockwise around the spectrum sector (Riesz-Dunford
      // orientation): out along the +theta ray, in along -theta.
      acc += (w * Complex(0, 1) / (2.0 * pi)) *
             (psi.f(zp) * eip * rp - psi.f(zm) * eim * rm);
    }
    out.value[static_cast<size_t>(b)] = acc;
  }
  // Endpoint decay estimate: |psi| <= C min(rho^a, rho^-a) against the
  // sectorial resolvent bound.
  out.quadrature_estimate =
      std::pow(rho_min / min_mod, psi.alpha) +
      std::pow(max_mod / rho_max, psi.alpha);
  (void)tol;
  return out;
}

std::vector<QuadraticEstimateResult> quadratic_estimate_batch(
    const SpectralSplit& split, const Matrix& u_cols, const PsiFunction& psi,
    const LogGrid& grid) {
  if (u_cols.rows() != split.dim())
    throw Error(ErrorCode::DimensionMismatch, "vector size");
  const Index ncols = u_cols.cols();
  for (Index c = 0; c < ncols; ++c)
    if (u_cols.col(c).squaredNorm() == 0.0)
      throw Error(ErrorCode::InvalidArgument, "zero vector");

  double min_mod = std::numeric_limits<double>::infinity(), max_mod = 0.0;
  for (const auto& es : split.eigendata) {
    for (const auto& c : es.clusters) {
      min_mod = std::min(min_mod, std::abs(c.lambda));
      max_mod = std::max(max_mod, std::abs(c.lambda));
    }
  }
  const double t_lo =
      grid.t_min > 0.0 ? grid.t_min : 1e-4 / std::max(max_mod, 1e-300);
  const double t_hi = grid.t_max > 0.0 ? grid.t_max : 1e4 / min_mod;
  const int npts = std::max(grid.points, 8);
  if (!(t_lo * max_mod < 0.5) || !(t_hi * min_mod > 2.0))
    throw Error(ErrorCode::GridTooCoarse, "grid does not span the spectrum");

  // log-trapezoid: int g(t) dt/t = int g(e^s) ds.
  const double ds = std::log(t_hi / t_lo) / (npts - 1);
  const auto jet = psi.jet();
  Eigen::MatrixXd g(npts, ncols);
  for (int i = 0; i < npts; ++i) {
    const double t = t_lo * std::exp(ds * i);
    auto scaled = [&jet, t](Complex lam, int j) {
      // d^j/dlam^j psi(t lam) = t^j psi^(j)(t lam)
      return std::pow(t, j) * jet(t * lam, j);
    };
    const std::vector<Matrix> blocks = split.modulus_function(scaled);
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(ncols);
    Index off = 0;
    for (const auto& blk : blocks) {
      const Matrix applied = blk * u_cols.middleRows(off, blk.rows());
      row += applied.colwise().squaredNorm().real();
      off += blk.rows();
    }
    g.row(i) = row;
  }

  std::vector<QuadraticEstimateResult> out(static_cast<size_t>(ncols));
  for (Index c = 0; c < ncols; ++c) {
    double integral = 0.0;
    for (int i = 0; i + 1 < npts; ++i)
      integral += 0.5 * ds * (g(i, c) + g(i + 1, c));
    auto& res = out[static_cast<size_t>(c)];
    res.integral = integral;
    res.ratio = integral / u_cols.col(c).squaredNorm();
    res.truncation_estimate =
        (g(0, c) + g(npts - 1, c)) * ds / std::max(integral, 1e-300);
    if (res.truncation_estimate > 1e-6)
      throw Error(ErrorCode::GridTooCoarse,
                  "endpoint contribution above tolerance");
  }
  return out;
}

QuadraticEstimateResult quadratic_estimate(const SpectralSplit& split,
                                           const Vector& u,
                                           const PsiFunction& psi,
                                           const LogGrid& grid) {
  QuadraticEstimateResult out =
      quadratic_estimate_batch(split, u, psi, grid)[0];

  double min_mod = std::numeric_limits<double>::infinity(), max_mod = 0.0;
  for (const auto& es : split.eigendata) {
    for (const auto& c : es.clusters) {
      min_mod = std::min(min_mod, std::abs(c.lambda));
      max_mod = std::max(max_mod, std::abs(c.lambda));
    }
  }
  const double t_lo =
      grid.t_min > 0.0 ? grid.t_min : 1e-4 / std::max(max_mod, 1e-300);
  const double t_hi = grid.t_max > 0.0 ? grid.t_max : 1e4 / min_mod;
  const int npts = std::max(grid.points, 8);

  // Analytic per-eigenvalue reference when the modulus is normal: expand u
  // in the orthonormal eigenbasis and integrate |psi(t lambda)|^2 dt/t per
  // component on a refined grid.
  bool normal = true;
  for (const auto& m : split.modulus) {
    if (spectral_norm(m * m.adjoint() - m.adjoint() * m) >
        1e-10 * std::max(1.0, spectral_norm(m) * spectral_norm(m)))
      normal = false;
  }
  if (normal) {
    double analytic = 0.0;
    Index off = 0;
    const int refined = 4 * npts;
    const double rlo = t_lo * 1e-2, rhi = t_hi * 1e2;
    const double rds = std::log(rhi / rlo) / (refined - 1);
    for (int b = 0; b < split.nblocks(); ++b) {
      const Matrix& m = split.modulus[static_cast<size_t>(b)];
      Eigen::ComplexSchur<Matrix> schur(m, true);
      const Vector c = schur.matrixU().adjoint() * u.segment(off, m.rows());
      for (Index i = 0; i < m.rows(); ++i) {
        const Complex lam = schur.matrixT()(i, i);
        double comp = 0.0;
        double prev = std::norm(psi.f(rlo * lam));
        for (int q = 1; q < refined; ++q) {
          const double t = rlo * std::exp(rds * q);
          const double cur = std::norm(psi.f(t * lam));
          comp += 0.5 * rds * (prev + cur);
          prev = cur;
        }
        analytic += std::norm(c(i)) * comp;
      }
      off += m.rows();
    }
    out.analytic = analytic;
  }
  return out;
}

AdjointConsistencyReport adjoint_split_consistency(const FourierOperator& a,
                                                   const SpectralCut& cut,
                                                   double tolerance,
                                                   const Tolerances& tol) {
  const SpectralSplit split = spectral_split_oracle(a, cut, tol);
  const SpectralSplit adj = spectral_split_oracle(adjoint(a), cut, tol);
  AdjointConsistencyReport rep;
  double smin_p = std::numeric_limits<double>::infinity();
  double smin_m = std::numeric_limits<double>::infinity();
  for (int b = 0; b < split.nblocks(); ++b) {
    const auto bi = static_cast<size_t>(b);
    rep.projector_deviation = std::max(
        rep.projector_deviation,
        spectral_norm(split.chi_plus[bi].adjoint() - adj.chi_plus[bi]));
    rep.modulus_deviation = std::max(
        rep.modulus_deviation,
        spectral_norm(split.modulus[bi].adjoint() - adj.modulus[bi]));
    // Restriction isomorphisms chi+-(A_r^*)|ran chi+-(A_r).
    const Matrix xp = orth(split.chi_plus[bi], tol);
    const Matrix yp = orth(adj.chi_plus[bi], tol);
    if (xp.cols() != yp.cols())
      throw Error(ErrorCode::ConsistencyFailure, "range dimension mismatch");
    if (xp.cols() > 0)
      smin_p = std::min(
          smin_p, smallest_singular_value(yp.adjoint() * adj.chi_plus[bi] * xp));
    const Matrix xm = orth(split.chi_minus(b), tol);
    const Matrix ym = orth(Matrix(Matrix::Identity(adj.block_size(b),
                                                   adj.block_size(b)) -
                                  adj.chi_plus[bi]),
                           tol);
    if (xm.cols() != ym.cols())
      throw Error(ErrorCode::ConsistencyFailure, "range dimension mismatch");
    if (xm.cols() > 0)
      smin_m = std::min(smin_m,
                        smallest_singular_value(
                            ym.adjoint() *
                            (Matrix::Identity(adj.block_size(b),
                                              adj.block_size(b)) -
                             adj.chi_plus[bi]) *
                            xm));
  }
  rep.restriction_smin_plus = smin_p;
  rep.restriction_smin_minus = smin_m;
  rep.pass = rep.projector_deviation <= tolerance &&
             rep.modulus_deviation <= tolerance &&
             rep.restriction_smin_plus > tol.pairing_min &&
             rep.restriction_smin_minus > tol.pairing_min;
  if (!rep.pass && (rep.projector_deviation > tolerance ||
                    rep.modulus_deviation > tolerance))
    throw Error(ErrorCode::ConsistencyFailure,
                "adjoint split deviates beyond tolerance");
  return rep;
}

double resolvent_certificate(const SpectralSplit& split, double mu,
                             int samples) {
  if (mu <= split.omega_r)
    throw Error(ErrorCode::InvalidArgument, "mu must exceed omega_r");
  double min_mod = std::numeric_limits<double>::infinity(), max_mod = 0.0;
  for (const auto& es : split.eigendata) {
    for (const auto& c : es.clusters) {
      min_mod = std::min(min_mod, std::abs(c.lambda));
      max_mod = std::max(max_mod, std::abs(c.lambda));
    }
  }
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double rho = 0.1 * min_mod *
                       std::pow(100.0 * max_mod / min_mod,
                                static_cast<double>(i) / (samples - 1));
    for (const double ang : {mu, -mu, pi - mu, pi + mu}) {
      const Complex zeta = std::polar(rho, ang);
      double rnorm = 0.0;
      for (const auto& ar : split.a_r) {
        const Matrix eye = Matrix::Identity(ar.rows(), ar.cols());
        rnorm = std::max(
            rnorm, spectral_norm((zeta * eye - ar).partialPivLu().solve(eye)));
      }
      worst = std::max(worst, rho * rnorm);
    }
  }
  return worst;
}

int strip_count(const FourierOperator& a, double lo, double hi,
                const Tolerances& tol) {
  if (hi < lo) std::swap(lo, hi);
  int count = 0;
  for (const auto& blk : blocks_of(a)) {
    const EigStructure es = eig_structure(blk, tol);
    for (const auto& c : es.clusters)
      if (c.lambda.real() > lo && c.lambda.real() < hi) count += c.algebraic;
  }
  return count;
}

CutTranslationReport cut_translation(const SpectralSplit& split_r,
                                     const SpectralSplit& split_q,
                                     const Tolerances& tol) {
  if (split_r.nblocks() != split_q.nblocks())
    throw Error(ErrorCode::DimensionMismatch, "block structure mismatch");
  CutTranslationReport rep;
  const double lo = std::min(split_r.cut.r, split_q.cut.r);
  const double hi = std::max(split_r.cut.r, split_q.cut.r);
  double resid = 0.0;
  for (int b = 0; b < split_r.nblocks(); ++b) {
    const auto bi = static_cast<size_t>(b);
    const Matrix diff = split_r.chi_plus[bi] - split_q.chi_plus[bi];
    // Rank threshold on the scale of the projectors, not of the (possibly
    // numerically zero) difference.
    const double scale = std::max(spectral_norm(split_r.chi_plus[bi]),
                                  spectral_norm(split_q.chi_plus[bi]));
    Eigen::JacobiSVD<Matrix> svd(diff, Eigen::ComputeThinU);
    const RankDecision rd = rank_decision(svd.singularValues(), tol, scale);
    const Matrix range = svd.matrixU().leftCols(rd.rank);
    rep.rank += static_cast<int>(rd.rank);
    // Strip eigenvectors of this block (generalized, w.r.t. A).
    Matrix strip_basis(diff.rows(), 0);
    for (const auto& c : split_r.eigendata[bi].clusters) {
      const double re_a = c.lambda.real() + split_r.cut.r;
      if (re_a > lo && re_a < hi) {
        Matrix tmp(diff.rows(), strip_basis.cols() + c.basis.cols());
        tmp << strip_basis, c.basis;
        strip_basis = tmp;
      }
    }
    rep.strip_count += static_cast<int>(strip_basis.cols());
    if (range.cols() > 0) {
      const Matrix sb = orth(strip_basis, tol);
      resid = std::max(
          resid, spectral_norm(range - sb * (sb.adjoint() * range)));
    }
  }
  rep.range_residual = resid;
  return rep;
}

}  // namespace specbvp
