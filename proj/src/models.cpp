#include "specbvp/models.hpp"

#include <Eigen/QR>

namespace specbvp {

namespace {

SymbolField make_symbol(int fiber_dim, int base_dim,
                        const std::vector<std::string>& names,
                        const std::vector<Matrix>& coeffs,
                        BaseManifold base = {}) {
  SymbolField s;
  s.fiber_dim = fiber_dim;
  s.base_dim = base_dim;
  s.base = base;
  s.direction_names = names;
  for (const auto& c : coeffs)
    s.directions.push_back(MatrixSeries::constant_series(c));
  return s;
}

}  // namespace

BoundaryModel nondiag_model() {
  const Complex i(0, 1);
  Matrix bt(2, 2), bx(2, 2);
  bt << -i, 1, 0, -i;
  bx << 1, 0, 0, 1;

  BoundaryModel m;
  m.name = "nondiag";
  m.sigma_d = make_symbol(2, 1, {"dt", "dx"}, {bt, bx});
  m.tau.direction_names = {"dt"};
  m.tau.coefficients = RealVector::Ones(1);
  m.sigma_a = adapted_symbol(m.sigma_d, m.tau, {"dx"});
  m.sigma0 = bt;
  m.operator_data = operator_from_symbol(m.sigma_a);
  return m;
}

FourierOperator build_nondiag(int cutoff) {
  return assemble(nondiag_model().operator_data, cutoff);
}

BoundaryModel tilted_dirac_model(double alpha) {
  const Complex i(0, 1);
  Matrix bt(2, 2), btheta(2, 2);
  bt << 0, -1, 1, 0;
  btheta << 0, i, i, 0;

  BoundaryModel m;
  m.name = "tilted-dirac";
  m.sigma_d = make_symbol(2, 1, {"dt", "dtheta"}, {bt, btheta});
  m.tau.direction_names = {"dt", "dtheta"};
  m.tau.coefficients = RealVector(2);
  m.tau.coefficients << 1.0, alpha;
  m.sigma_a = adapted_symbol(m.sigma_d, m.tau, {"dtheta"});
  m.sigma0 = bt + alpha * btheta;
  m.operator_data = operator_from_symbol(m.sigma_a);
  return m;
}

FourierOperator build_tilted_dirac(double alpha, int cutoff) {
  return assemble(tilted_dirac_model(alpha).operator_data, cutoff);
}

Matrix CliffordModel::gamma_of(const Eigen::Vector3d& v) const {
  return v(0) * gamma[0] + v(1) * gamma[1] + v(2) * gamma[2];
}

CliffordModel clifford3() {
  const Complex i(0, 1);
  CliffordModel c;
  Matrix g1(2, 2), g2(2, 2), g3(2, 2);
  g1 << 0, i, i, 0;
  g2 << 0, 1, -1, 0;
  g3 << i, 0, 0, -i;
  c.gamma = {g1, g2, g3};
  return c;
}

RaritaSchwingerModel rarita_schwinger() {
  RaritaSchwingerModel rs;
  rs.clifford = clifford3();

  // S (x) T ~ C^6 with index (a, j) -> a + 2 j, a spinor index, j frame
  // index. gamma(phi (x) e_j) = gamma_j phi; iota(phi) = -(1/3) sum_j
  // gamma_j phi (x) e_j.
  rs.contraction = Matrix::Zero(2, 6);
  rs.iota = Matrix::Zero(6, 2);
  for (int j = 0; j < 3; ++j) {
    rs.contraction.block(0, 2 * j, 2, 2) = rs.clifford.gamma[static_cast<size_t>(j)];
    rs.iota.block(2 * j, 0, 2, 2) =
        (-1.0 / 3.0) * rs.clifford.gamma[static_cast<size_t>(j)];
  }
  rs.projector = Matrix::Identity(6, 6) - rs.iota * rs.contraction;

  Eigen::ColPivHouseholderQR<Matrix> qr(rs.projector);
  if (qr.rank() != 4)
    throw Error(ErrorCode::ProjectorConstructionFailure,
                "pi^{3/2} does not have rank 4");
  rs.basis = Matrix(qr.householderQ()).leftCols(4);
  return rs;
}

Matrix RaritaSchwingerModel::ambient_symbol(const Eigen::Vector3d& xi) const {
  // sigma_D(xi) Phi = (xi (x) 1) Phi + 2 iota(Phi(xi)) on ker(contraction).
  const Matrix cl = clifford.gamma_of(xi);
  Matrix out = Matrix::Zero(6, 6);
  for (int j = 0; j < 3; ++j) out.block(2 * j, 2 * j, 2, 2) = cl;
  Matrix eval = Matrix::Zero(2, 6);  // Phi -> Phi(xi) = sum_j xi_j phi_j
  for (int j = 0; j < 3; ++j)
    eval.block(0, 2 * j, 2, 2) = xi(j) * Matrix::Identity(2, 2);
  out += 2.0 * iota * eval;
  return out;
}

Matrix RaritaSchwingerModel::symbol(const Eigen::Vector3d& xi) const {
  return basis.adjoint() * ambient_symbol(xi) * basis;
}

std::pair<SymbolField, SymbolField> build_rs_symbols() {
  const RaritaSchwingerModel rs = rarita_schwinger();
  const Matrix bt = rs.symbol(Eigen::Vector3d::UnitX());
  const Matrix b1 = rs.symbol(Eigen::Vector3d::UnitY());
  const Matrix b2 = rs.symbol(Eigen::Vector3d::UnitZ());

  BaseManifold torus;
  torus.kind = BaseManifold::Torus2;
  SymbolField sigma_d =
      make_symbol(4, 2, {"dt", "dx1", "dx2"}, {bt, b1, b2}, torus);

  CovectorField tau;
  tau.direction_names = {"dt"};
  tau.coefficients = RealVector::Ones(1);
  SymbolField sigma_a = adapted_symbol(sigma_d, tau, {"dx1", "dx2"});
  return {sigma_d, sigma_a};
}

BoundaryModel rarita_schwinger_model() {
  auto [sigma_d, sigma_a] = build_rs_symbols();
  BoundaryModel m;
  m.name = "rarita-schwinger";
  m.sigma_d = sigma_d;
  m.sigma_a = sigma_a;
  m.tau.direction_names = {"dt"};
  m.tau.coefficients = RealVector::Ones(1);
  const RealVector x0 = RealVector::Zero(2);
  RealVector et = RealVector::Zero(3);
  et(0) = 1.0;
  m.sigma0 = sigma_d.eval_principal(x0, et);
  m.operator_data = operator_from_symbol(m.sigma_a);
  return m;
}

FourierOperator build_rs_torus(int cutoff) {
  return assemble(rarita_schwinger_model().operator_data, cutoff);
}

BoundaryModel model_by_name(const std::string& name, double alpha) {
  if (name == "nondiag") return nondiag_model();
  if (name == "tilted-dirac") return tilted_dirac_model(alpha);
  if (name == "rarita-schwinger") return rarita_schwinger_model();
  throw Error(ErrorCode::InvalidArgument, "unknown example " + name);
}

}  // namespace specbvp
