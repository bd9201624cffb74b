#include "specbvp/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace specbvp {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotElliptic: return "NotElliptic";
    case ErrorCode::RealEigenvalueFound: return "RealEigenvalueFound";
    case ErrorCode::ClusterAmbiguity: return "ClusterAmbiguity";
    case ErrorCode::BandwidthExceeded: return "BandwidthExceeded";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NoGapInWindow: return "NoGapInWindow";
    case ErrorCode::CutHitsSpectrum: return "CutHitsSpectrum";
    case ErrorCode::ResolventIllConditioned: return "ResolventIllConditioned";
    case ErrorCode::SingularModulus: return "SingularModulus";
    case ErrorCode::SectorTooNarrow: return "SectorTooNarrow";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::ConsistencyFailure: return "ConsistencyFailure";
    case ErrorCode::AmbiguousRank: return "AmbiguousRank";
    case ErrorCode::DegeneratePairing: return "DegeneratePairing";
    case ErrorCode::NotAProjectorSymbol: return "NotAProjectorSymbol";
    case ErrorCode::DecompositionResidualTooLarge:
      return "DecompositionResidualTooLarge";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::MethodDisagreement: return "MethodDisagreement";
    case ErrorCode::ProjectorConstructionFailure:
      return "ProjectorConstructionFailure";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

namespace {

// Swaps the diagonal entries at positions (p, p+1) of an upper-triangular T
// by a unitary similarity, updating Q alongside.
void swap_adjacent(Matrix& t, Matrix& q, Index p) {
  const Complex a = t(p, p);
  const Complex b = t(p, p + 1);
  const Complex c = t(p + 1, p + 1);
  if (std::abs(c - a) == 0.0) return;  // equal eigenvalues, order immaterial
  // Eigenvector of [[a,b],[0,c]] for eigenvalue c.
  Eigen::Vector2cd v(b, c - a);
  const double nv = v.norm();
  if (nv == 0.0) return;
  v /= nv;
  Eigen::Matrix2cd g;
  g << v(0), -std::conj(v(1)), v(1), std::conj(v(0));
  t.middleCols(p, 2) = t.middleCols(p, 2) * g;
  t.middleRows(p, 2) = g.adjoint() * t.middleRows(p, 2);
  q.middleCols(p, 2) = q.middleCols(p, 2) * g;
  t(p + 1, p) = Complex(0, 0);
}

}  // namespace

OrderedSchur ordered_schur(const Matrix& m,
                           const std::function<bool(Complex)>& select) {
  OrderedSchur out;
  const Index n = m.rows();
  if (n == 0) {
    out.q = Matrix::Identity(0, 0);
    out.t = Matrix::Identity(0, 0);
    return out;
  }
  Eigen::ComplexSchur<Matrix> schur(m, /*computeU=*/true);
  out.q = schur.matrixU();
  out.t = schur.matrixT();
  Index front = 0;
  for (Index i = 0; i < n; ++i) {
    if (!select(out.t(i, i))) continue;
    for (Index p = i; p > front; --p) swap_adjacent(out.t, out.q, p - 1);
    ++front;
  }
  out.n_selected = front;
  return out;
}

Matrix triangular_sylvester(const Matrix& t11, const Matrix& t22,
                            const Matrix& c) {
  const Index p = t11.rows();
  const Index q = t22.rows();
  Matrix x(p, q);
  for (Index j = 0; j < q; ++j) {
    Vector rhs = c.col(j);
    for (Index i = 0; i < j; ++i) rhs += x.col(i) * t22(i, j);
    Matrix shifted = t11;
    shifted.diagonal().array() -= t22(j, j);
    x.col(j) = shifted.triangularView<Eigen::Upper>().solve(rhs);
  }
  return x;
}

Matrix spectral_projector(const Matrix& m,
                          const std::function<bool(Complex)>& select) {
  const Index n = m.rows();
  OrderedSchur os = ordered_schur(m, select);
  const Index p = os.n_selected;
  if (p == 0) return Matrix::Zero(n, n);
  if (p == n) return Matrix::Identity(n, n);
  const Matrix t11 = os.t.topLeftCorner(p, p);
  const Matrix t22 = os.t.bottomRightCorner(n - p, n - p);
  const Matrix t12 = os.t.topRightCorner(p, n - p);
  const Matrix x = triangular_sylvester(t11, t22, -t12);
  Matrix core = Matrix::Zero(n, n);
  core.topLeftCorner(p, p).setIdentity();
  core.topRightCorner(p, n - p) = -x;
  return os.q * core * os.q.adjoint();
}

int EigStructure::total_algebraic() const {
  int sum = 0;
  for (const auto& c : clusters) sum += c.algebraic;
  return sum;
}

EigStructure eig_structure(const Matrix& m, const Tolerances& tol) {
  EigStructure out;
  const Index n = m.rows();
  if (n == 0) return out;

  Eigen::ComplexSchur<Matrix> schur(m, /*computeU=*/false);
  std::vector<Complex> evs(n);
  for (Index i = 0; i < n; ++i) evs[i] = schur.matrixT()(i, i);
  std::sort(evs.begin(), evs.end(), [](Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });

  // Merge radius: the declared relative radius with a sqrt(eps) floor, since
  // computed eigenvalues of a defective pair split at the square root of the
  // working precision.
  const double scale0 = spectral_norm(m);
  const double jordan_floor =
      64.0 * std::sqrt(std::numeric_limits<double>::epsilon() *
                       std::max(1.0, scale0));
  auto merge_radius = [&](Complex ev) {
    return std::max(tol.cluster_rel * std::max(1.0, std::abs(ev)),
                    jordan_floor);
  };

  // Single-linkage clustering along the sorted list.
  std::vector<std::vector<Complex>> groups;
  for (const Complex ev : evs) {
    bool merged = false;
    for (auto& g : groups) {
      for (const Complex w : g) {
        if (std::abs(ev - w) <= merge_radius(ev)) {
          g.push_back(ev);
          merged = true;
          break;
        }
      }
      if (merged) break;
    }
    if (!merged) groups.push_back({ev});
  }

  std::vector<Complex> centers;
  for (const auto& g : groups) {
    Complex mean(0, 0);
    for (const Complex w : g) mean += w;
    centers.push_back(mean / static_cast<double>(g.size()));
  }
  for (size_t a = 0; a < centers.size(); ++a) {
    for (size_t b = a + 1; b < centers.size(); ++b) {
      const double sep = std::abs(centers[a] - centers[b]);
      if (sep < 10.0 * merge_radius(centers[a]))
        throw Error(ErrorCode::ClusterAmbiguity,
                    "eigenvalue clusters overlap within tolerance");
    }
  }

  auto nearest_center = [&centers](Complex z) {
    size_t best = 0;
    double dist = std::abs(z - centers[0]);
    for (size_t i = 1; i < centers.size(); ++i) {
      const double d = std::abs(z - centers[i]);
      if (d < dist) {
        dist = d;
        best = i;
      }
    }
    return best;
  };

  const double scale = scale0;
  for (size_t gi = 0; gi < groups.size(); ++gi) {
    EigCluster cluster;
    cluster.lambda = centers[gi];
    cluster.algebraic = static_cast<int>(groups[gi].size());
    const Complex lam = cluster.lambda;
    OrderedSchur os = ordered_schur(
        m, [&nearest_center, gi](Complex z) { return nearest_center(z) == gi; });
    cluster.basis = os.q.leftCols(os.n_selected);
    Matrix shifted = m;
    shifted.diagonal().array() -= lam;
    Eigen::JacobiSVD<Matrix> svd(shifted);
    RankDecision rd = rank_decision(svd.singularValues(), tol, scale);
    cluster.geometric = static_cast<int>(n - rd.rank);
    out.clusters.push_back(std::move(cluster));
  }
  std::sort(out.clusters.begin(), out.clusters.end(),
            [](const EigCluster& a, const EigCluster& b) {
              if (a.lambda.real() != b.lambda.real())
                return a.lambda.real() < b.lambda.real();
              return a.lambda.imag() < b.lambda.imag();
            });
  return out;
}

Matrix FunctionCalculus::evaluate(const ScalarFunctionJet& fj) const {
  const Index n = dim();
  Matrix d = Matrix::Zero(n, n);
  for (const auto& blk : blocks) {
    Matrix f = Matrix::Zero(blk.size, blk.size);
    Matrix npow = Matrix::Identity(blk.size, blk.size);
    double factorial = 1.0;
    for (Index j = 0; j < blk.size; ++j) {
      if (j > 0) {
        npow = npow * blk.nilpotent;
        factorial *= static_cast<double>(j);
      }
      f += (fj(blk.lambda, static_cast<int>(j)) / factorial) * npow;
    }
    d.block(blk.offset, blk.offset, blk.size, blk.size) = f;
  }
  return s * d * s_inv;
}

Vector FunctionCalculus::apply(const ScalarFunctionJet& fj,
                               const Vector& u) const {
  // Small dimensions throughout; form the matrix.
  return evaluate(fj) * u;
}

FunctionCalculus function_calculus(const Matrix& m, const Tolerances& tol) {
  FunctionCalculus fc;
  const Index n = m.rows();
  EigStructure es = eig_structure(m, tol);

  // Ordered Schur with clusters contiguous, in the sorted cluster order.
  std::vector<Complex> centers;
  for (const auto& c : es.clusters) centers.push_back(c.lambda);
  auto cluster_of = [&centers](Complex z) {
    int best = 0;
    double dist = std::abs(z - centers[0]);
    for (size_t i = 1; i < centers.size(); ++i) {
      const double d = std::abs(z - centers[i]);
      if (d < dist) {
        dist = d;
        best = static_cast<int>(i);
      }
    }
    return best;
  };

  Eigen::ComplexSchur<Matrix> schur(m, /*computeU=*/true);
  Matrix q = schur.matrixU();
  Matrix t = schur.matrixT();
  Index front = 0;
  for (size_t ci = 0; ci < centers.size(); ++ci) {
    for (Index i = front; i < n; ++i) {
      if (cluster_of(t(i, i)) != static_cast<int>(ci)) continue;
      for (Index p = i; p > front; --p) swap_adjacent(t, q, p - 1);
      ++front;
    }
  }

  // Peel clusters off the front, decoupling with Sylvester transforms:
  // S collects Q * prod of [[I, X],[0, I]] factors.
  fc.s = q;
  fc.s_inv = q.adjoint();
  Index offset = 0;
  for (const auto& c : es.clusters) {
    const Index sz = c.algebraic;
    const Index rest = n - offset - sz;
    if (rest > 0) {
      const Matrix t11 = t.block(offset, offset, sz, sz);
      const Matrix t22 = t.block(offset + sz, offset + sz, rest, rest);
      const Matrix t12 = t.block(offset, offset + sz, sz, rest);
      const Matrix x = triangular_sylvester(t11, t22, -t12);
      // Right-multiply S by Z = [[I, X],[0, I]] acting on cols >= offset.
      fc.s.middleCols(offset + sz, rest) += fc.s.middleCols(offset, sz) * x;
      fc.s_inv.middleRows(offset, sz) -= x * fc.s_inv.middleRows(offset + sz, rest);
      t.block(offset, offset + sz, sz, rest).setZero();
    }
    FunctionCalculus::Block blk;
    blk.lambda = c.lambda;
    blk.offset = offset;
    blk.size = sz;
    Matrix tc = t.block(offset, offset, sz, sz);
    tc.diagonal().array() -= c.lambda;
    blk.nilpotent = tc;
    fc.blocks.push_back(std::move(blk));
    offset += sz;
  }
  return fc;
}

Matrix matrix_function(const Matrix& m, const ScalarFunctionJet& fj,
                       const Tolerances& tol) {
  return function_calculus(m, tol).evaluate(fj);
}

RankDecision rank_decision(const Eigen::VectorXd& sv, const Tolerances& tol,
                           double scale_hint) {
  RankDecision rd;
  const double scale =
      std::max(scale_hint, sv.size() > 0 ? sv(0) : 0.0);
  rd.tau = tol.rank_threshold(scale);
  rd.smallest_accepted = std::numeric_limits<double>::infinity();
  rd.largest_rejected = 0.0;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > rd.tau) {
      ++rd.rank;
      rd.smallest_accepted = std::min(rd.smallest_accepted, sv(i));
    } else {
      rd.largest_rejected = std::max(rd.largest_rejected, sv(i));
    }
    if (sv(i) > rd.tau && sv(i) < tol.ambiguity_band * rd.tau)
      rd.ambiguous = true;
    if (sv(i) <= rd.tau && sv(i) > rd.tau / tol.ambiguity_band)
      rd.ambiguous = true;
  }
  return rd;
}

Matrix orth(const Matrix& m, const Tolerances& tol, RankDecision* decision) {
  if (m.cols() == 0 || m.rows() == 0) {
    if (decision) *decision = RankDecision{};
    return Matrix(m.rows(), 0);
  }
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU);
  RankDecision rd = rank_decision(svd.singularValues(), tol);
  if (decision) *decision = rd;
  return svd.matrixU().leftCols(rd.rank);
}

Matrix nullspace(const Matrix& m, const Tolerances& tol,
                 RankDecision* decision) {
  if (m.rows() == 0) {
    if (decision) *decision = RankDecision{};
    return Matrix::Identity(m.cols(), m.cols());
  }
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  RankDecision rd = rank_decision(svd.singularValues(), tol);
  if (decision) *decision = rd;
  return svd.matrixV().rightCols(m.cols() - rd.rank);
}

double spectral_norm(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

double smallest_singular_value(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  const auto sv = Eigen::JacobiSVD<Matrix>(m).singularValues();
  return sv(sv.size() - 1);
}

Complex cauchy_derivative(const std::function<Complex(Complex)>& f, Complex z,
                          int order, double radius, int nodes) {
  // f^(k)(z) = k!/(2 pi i) \oint f(w)/(w-z)^{k+1} dw on a circle around z.
  Complex acc(0, 0);
  for (int j = 0; j < nodes; ++j) {
    const double th = 2.0 * pi * j / nodes;
    const Complex w = std::polar(radius, th);
    acc += f(z + w) * std::exp(Complex(0, -th * order));
  }
  double factorial = 1.0;
  for (int j = 2; j <= order; ++j) factorial *= j;
  return acc * factorial / (static_cast<double>(nodes) * std::pow(radius, order));
}

}  // namespace specbvp
