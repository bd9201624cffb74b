#include "specbvp/fourier.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>

namespace specbvp {

bool MatrixSeries::constant() const {
  for (const auto& [k, m] : coeff)
    if (!(k == ModeIndex{}) && m.norm() > 0.0) return false;
  return true;
}

int MatrixSeries::bandwidth() const {
  int bw = 0;
  for (const auto& [k, m] : coeff) {
    if (m.norm() == 0.0) continue;
    bw = std::max({bw, std::abs(k.k1), std::abs(k.k2)});
  }
  return bw;
}

MatrixSeries MatrixSeries::constant_series(const Matrix& m) {
  MatrixSeries s;
  s.fiber_dim = static_cast<int>(m.rows());
  s.coeff[ModeIndex{}] = m;
  return s;
}

std::vector<ModeIndex> mode_set(const BaseManifold& base, int cutoff) {
  std::vector<ModeIndex> modes;
  if (base.kind == BaseManifold::Circle) {
    for (int k = -cutoff; k <= cutoff; ++k) modes.push_back({k, 0});
  } else {
    for (int k1 = -cutoff; k1 <= cutoff; ++k1)
      for (int k2 = -cutoff; k2 <= cutoff; ++k2) modes.push_back({k1, k2});
  }
  return modes;
}

std::size_t FourierOperator::mode_position(const ModeIndex& k) const {
  const auto it = std::lower_bound(modes.begin(), modes.end(), k);
  if (it == modes.end() || !(*it == k))
    throw Error(ErrorCode::DimensionMismatch, "mode outside truncation");
  return static_cast<std::size_t>(it - modes.begin());
}

namespace {

Matrix series_coeff(const MatrixSeries& s, int m, const ModeIndex& k) {
  const auto it = s.coeff.find(k);
  if (it != s.coeff.end()) return it->second;
  return Matrix::Zero(m, m);
}

// Per-mode symbol of the operator at mode k for constant coefficients:
// M_k = sum_j (i freq(k_j)) B_j + C.
Matrix constant_block(const OperatorData& d, const ModeIndex& k) {
  const int m = d.fiber_dim;
  Matrix blk = series_coeff(d.zero_order, m, ModeIndex{});
  if (blk.rows() == 0) blk = Matrix::Zero(m, m);
  const int kk[2] = {k.k1, k.k2};
  for (std::size_t j = 0; j < d.first_order.size(); ++j) {
    const Matrix b = series_coeff(d.first_order[j], m, ModeIndex{});
    if (b.rows() == 0) continue;
    blk += Complex(0, d.base.frequency(kk[j])) * b;
  }
  return blk;
}

bool data_constant(const OperatorData& d) {
  for (const auto& s : d.first_order)
    if (!s.constant()) return false;
  return d.zero_order.constant();
}

}  // namespace

FourierOperator assemble(const OperatorData& data, int cutoff) {
  if (data.fiber_dim <= 0)
    throw Error(ErrorCode::InvalidArgument, "fiber_dim must be positive");
  if (static_cast<int>(data.first_order.size()) != data.base.base_dim())
    throw Error(ErrorCode::InvalidArgument,
                "one first-order series per base direction required");
  int bw = data.zero_order.bandwidth();
  for (const auto& s : data.first_order) bw = std::max(bw, s.bandwidth());
  if (bw > cutoff)
    throw Error(ErrorCode::BandwidthExceeded,
                "coefficient bandwidth exceeds mode cutoff");

  FourierOperator op;
  op.data = data;
  op.cutoff = cutoff;
  op.modes = mode_set(data.base, cutoff);

  const int m = data.fiber_dim;
  if (data_constant(data)) {
    op.blocks.reserve(op.modes.size());
    for (const auto& k : op.modes) op.blocks.push_back(constant_block(data, k));
    return op;
  }

  // Variable coefficients: convolution in the mode index. Row mode k picks
  // up contributions from column mode l through the coefficient at k - l;
  // first-order terms differentiate before multiplying, so the frequency of
  // the column mode enters.
  const Index n = op.dim();
  op.dense = Matrix::Zero(n, n);
  for (std::size_t row = 0; row < op.modes.size(); ++row) {
    for (std::size_t col = 0; col < op.modes.size(); ++col) {
      const ModeIndex diff{op.modes[row].k1 - op.modes[col].k1,
                           op.modes[row].k2 - op.modes[col].k2};
      Matrix contrib = series_coeff(data.zero_order, m, diff);
      if (contrib.rows() == 0) contrib = Matrix::Zero(m, m);
      const int kk[2] = {op.modes[col].k1, op.modes[col].k2};
      for (std::size_t j = 0; j < data.first_order.size(); ++j) {
        const Matrix b = series_coeff(data.first_order[j], m, diff);
        if (b.rows() == 0) continue;
        contrib += Complex(0, data.base.frequency(kk[j])) * b;
      }
      if (contrib.norm() > 0.0)
        op.dense.block(op.mode_offset(row), op.mode_offset(col), m, m) =
            contrib;
    }
  }
  return op;
}

FourierOperator adjoint(const FourierOperator& op) {
  FourierOperator adj;
  adj.cutoff = op.cutoff;
  adj.modes = op.modes;
  adj.data.fiber_dim = op.data.fiber_dim;
  adj.data.base = op.data.base;
  if (op.block_diagonal()) {
    // In the orthonormal plane-wave basis the adjoint is the conjugate
    // transpose, blockwise. At the coefficient level: B_j -> -B_j^H,
    // C -> C^H for constant coefficients.
    adj.blocks.reserve(op.blocks.size());
    for (const auto& b : op.blocks) adj.blocks.push_back(b.adjoint());
    for (const auto& s : op.data.first_order) {
      MatrixSeries as;
      as.fiber_dim = s.fiber_dim;
      for (const auto& [k, mat] : s.coeff) as.coeff[k] = -mat.adjoint();
      adj.data.first_order.push_back(std::move(as));
    }
    MatrixSeries zs;
    zs.fiber_dim = op.data.zero_order.fiber_dim;
    for (const auto& [k, mat] : op.data.zero_order.coeff)
      zs.coeff[k] = mat.adjoint();
    adj.data.zero_order = std::move(zs);
  } else {
    adj.data = op.data;  // coefficient data retained for bookkeeping only
    adj.dense = op.dense.adjoint();
  }
  return adj;
}

Vector FourierOperator::apply(const Vector& u) const {
  if (u.size() != dim())
    throw Error(ErrorCode::DimensionMismatch, "coefficient vector size");
  if (!block_diagonal()) return dense * u;
  Vector out(u.size());
  const int m = fiber_dim();
  for (std::size_t p = 0; p < blocks.size(); ++p) {
    const Index off = mode_offset(p);
    out.segment(off, m) = blocks[p] * u.segment(off, m);
  }
  return out;
}

std::vector<Complex> spectrum(const FourierOperator& op) {
  std::vector<Complex> evs;
  if (op.block_diagonal()) {
    for (const auto& b : op.blocks) {
      Eigen::ComplexEigenSolver<Matrix> es(b, false);
      for (Index i = 0; i < es.eigenvalues().size(); ++i)
        evs.push_back(es.eigenvalues()(i));
    }
  } else {
    Eigen::ComplexEigenSolver<Matrix> es(op.dense, false);
    for (Index i = 0; i < es.eigenvalues().size(); ++i)
      evs.push_back(es.eigenvalues()(i));
  }
  std::sort(evs.begin(), evs.end(), [](Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return evs;
}

Matrix dense_matrix(const FourierOperator& op) {
  if (!op.block_diagonal()) return op.dense;
  Matrix full = Matrix::Zero(op.dim(), op.dim());
  const int m = op.fiber_dim();
  for (std::size_t p = 0; p < op.blocks.size(); ++p)
    full.block(op.mode_offset(p), op.mode_offset(p), m, m) = op.blocks[p];
  return full;
}

FourierOperator shift(const FourierOperator& op, Complex c) {
  FourierOperator out = op;
  const int m = op.fiber_dim();
  if (out.block_diagonal()) {
    for (auto& b : out.blocks) b += c * Matrix::Identity(m, m);
    Matrix z = out.data.zero_order.coeff.count(ModeIndex{})
                   ? out.data.zero_order.coeff[ModeIndex{}]
                   : Matrix::Zero(m, m);
    out.data.zero_order.fiber_dim = m;
    out.data.zero_order.coeff[ModeIndex{}] = z + c * Matrix::Identity(m, m);
  } else {
    out.dense += c * Matrix::Identity(out.dim(), out.dim());
  }
  return out;
}

FourierOperator scale(const FourierOperator& op, Complex c) {
  FourierOperator out = op;
  for (auto& b : out.blocks) b *= c;
  if (out.dense.size() > 0) out.dense *= c;
  for (auto& s : out.data.first_order)
    for (auto& [k, mat] : s.coeff) mat *= c;
  for (auto& [k, mat] : out.data.zero_order.coeff) mat *= c;
  return out;
}

}  // namespace specbvp
