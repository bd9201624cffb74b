#include "specbvp/symbols.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace specbvp {

namespace {

Matrix series_eval(const MatrixSeries& s, int m, const RealVector& x,
                   const BaseManifold& base) {
  Matrix out = Matrix::Zero(m, m);
  for (const auto& [k, mat] : s.coeff) {
    double phase = base.frequency(k.k1) * (x.size() > 0 ? x(0) : 0.0);
    if (x.size() > 1) phase += base.frequency(k.k2) * x(1);
    out += std::exp(Complex(0, phase)) * mat;
  }
  return out;
}

}  // namespace

Matrix SymbolField::eval(const RealVector& x, const RealVector& xi) const {
  Matrix out = eval_principal(x, xi);
  if (!zero_order.empty()) out += series_eval(zero_order, fiber_dim, x, base);
  return out;
}

Matrix SymbolField::eval_principal(const RealVector& x,
                                   const RealVector& xi) const {
  if (xi.size() != static_cast<Index>(directions.size()))
    throw Error(ErrorCode::DimensionMismatch, "covector component count");
  Matrix out = Matrix::Zero(fiber_dim, fiber_dim);
  for (std::size_t j = 0; j < directions.size(); ++j) {
    if (xi(static_cast<Index>(j)) == 0.0) continue;
    out += xi(static_cast<Index>(j)) *
           series_eval(directions[j], fiber_dim, x, base);
  }
  return out;
}

std::size_t SymbolField::direction_index(const std::string& name) const {
  for (std::size_t j = 0; j < direction_names.size(); ++j)
    if (direction_names[j] == name) return j;
  throw Error(ErrorCode::InvalidArgument, "unknown direction " + name);
}

std::vector<CosphereSample> default_cosphere_grid(const SymbolField& sigma,
                                                  int n_angles) {
  std::vector<CosphereSample> grid;
  bool constant = sigma.zero_order.constant();
  for (const auto& s : sigma.directions) constant &= s.constant();
  std::vector<RealVector> points;
  if (constant) {
    points.push_back(RealVector::Zero(sigma.base_dim));
  } else {
    // Coefficients vary: sample x on a uniform grid resolving the series.
    int bw = sigma.zero_order.bandwidth();
    for (const auto& s : sigma.directions) bw = std::max(bw, s.bandwidth());
    const int nx = std::max(8, 4 * bw + 1);
    const double lx = sigma.base.kind == BaseManifold::Circle
                          ? sigma.base.circumference
                          : 1.0;
    for (int i = 0; i < nx; ++i) {
      RealVector x = RealVector::Zero(sigma.base_dim);
      x(0) = lx * i / nx;
      if (sigma.base_dim == 2) {
        for (int j = 0; j < nx; ++j) {
          x(1) = lx * j / nx;
          points.push_back(x);
        }
      } else {
        points.push_back(x);
      }
    }
  }

  const std::size_t ndirs = sigma.directions.size();
  for (const auto& x : points) {
    if (ndirs == 1) {
      for (const double s : {1.0, -1.0}) {
        RealVector xi(1);
        xi(0) = s;
        grid.push_back({x, xi});
      }
    } else {
      for (int a = 0; a < n_angles; ++a) {
        const double th = 2.0 * pi * a / n_angles;
        RealVector xi(2);
        xi << std::cos(th), std::sin(th);
        grid.push_back({x, xi});
      }
    }
  }
  return grid;
}

SymbolField adapted_symbol(const SymbolField& sigma_d, const CovectorField& tau,
                           const std::vector<std::string>& tangential_names,
                           const Tolerances& tol) {
  if (tau.direction_names.size() !=
      static_cast<std::size_t>(tau.coefficients.size()))
    throw Error(ErrorCode::InvalidArgument, "tau coefficient mismatch");

  // tau in sigma_d's direction ordering.
  RealVector tau_full = RealVector::Zero(sigma_d.directions.size());
  for (std::size_t j = 0; j < tau.direction_names.size(); ++j)
    tau_full(static_cast<Index>(
        sigma_d.direction_index(tau.direction_names[j]))) =
        tau.coefficients(static_cast<Index>(j));

  // Product model: constant coefficients. sigma_D(tau) is one matrix.
  for (const auto& s : sigma_d.directions)
    if (!s.constant())
      throw Error(ErrorCode::InvalidArgument,
                  "adapted_symbol supports x-independent symbols only");

  const RealVector x0 = RealVector::Zero(std::max(sigma_d.base_dim, 1));
  const Matrix st = sigma_d.eval_principal(x0, tau_full);
  const double smin = smallest_singular_value(st);
  if (smin <= tol.rank_threshold(spectral_norm(st)))
    throw Error(ErrorCode::NotElliptic,
                "sigma_D(x, tau) singular beyond rank tolerance");
  const Matrix st_inv = st.inverse();

  SymbolField out;
  out.fiber_dim = sigma_d.fiber_dim;
  out.base_dim = static_cast<int>(tangential_names.size());
  out.base = sigma_d.base;
  for (const auto& name : tangential_names) {
    const std::size_t j = sigma_d.direction_index(name);
    const Matrix bj =
        sigma_d.directions[j].coeff.count(ModeIndex{})
            ? sigma_d.directions[j].coeff.at(ModeIndex{})
            : Matrix::Zero(out.fiber_dim, out.fiber_dim);
    out.direction_names.push_back(name);
    out.directions.push_back(MatrixSeries::constant_series(st_inv * bj));
  }
  return out;
}

EllipticityReport check_ellipticity(const SymbolField& sigma,
                                    const std::vector<CosphereSample>& grid,
                                    const Tolerances& tol) {
  if (grid.empty())
    throw Error(ErrorCode::InvalidArgument, "empty cosphere grid");
  EllipticityReport rep;
  rep.worst_smin = std::numeric_limits<double>::infinity();
  double scale = 0.0;
  for (const auto& s : grid) {
    const Matrix m = sigma.eval(s.x, s.xi);
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& sv = svd.singularValues();
    const double smin = sv.size() > 0 ? sv(sv.size() - 1) : 0.0;
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    scale = std::max(scale, smax);
    if (smin < rep.worst_smin) {
      rep.worst_smin = smin;
      rep.worst_condition = smin > 0 ? smax / smin
                                     : std::numeric_limits<double>::infinity();
      rep.minimizer = s;
    }
  }
  rep.elliptic = rep.worst_smin > tol.rank_threshold(scale);
  return rep;
}

BisectorReport bisector_angle(const SymbolField& sigma_a,
                              const std::vector<CosphereSample>& grid,
                              const Tolerances& tol) {
  BisectorReport rep;
  rep.nu = pi / 2.0;
  rep.min_real_gap = std::numeric_limits<double>::infinity();
  for (const auto& s : grid) {
    const Matrix m = sigma_a.eval_principal(s.x, s.xi);
    Eigen::ComplexEigenSolver<Matrix> es(m, false);
    BisectorReport::Sample sample;
    sample.at = s;
    for (Index i = 0; i < es.eigenvalues().size(); ++i) {
      const Complex lam = es.eigenvalues()(i);
      sample.eigenvalues.push_back(lam);
      const double mod = std::abs(lam);
      if (std::abs(lam.imag()) <= tol.rank_threshold(std::max(1.0, mod)) * 1e3)
        throw Error(ErrorCode::RealEigenvalueFound,
                    "symbol eigenvalue on the real axis");
      // Angle distance from the real axis; S_nu is open, so nu itself is
      // attainable.
      const double angle = std::asin(std::min(1.0, std::abs(lam.imag()) / mod));
      rep.nu = std::min(rep.nu, angle);
      rep.min_real_gap = std::min(rep.min_real_gap, std::abs(lam.imag()));
    }
    rep.samples.push_back(std::move(sample));
  }
  return rep;
}

EigStructure symbol_eig_structure(const Matrix& m, const Tolerances& tol) {
  return eig_structure(m, tol);
}

OperatorData operator_from_symbol(const SymbolField& sigma) {
  OperatorData data;
  data.fiber_dim = sigma.fiber_dim;
  data.base = sigma.base;
  data.base.kind =
      sigma.base_dim == 1 ? BaseManifold::Circle : BaseManifold::Torus2;
  data.first_order = sigma.directions;
  data.zero_order = sigma.zero_order;
  return data;
}

}  // namespace specbvp
