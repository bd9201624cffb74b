#include "specbvp/io.hpp"

#include <cstdio>
#include <fstream>

namespace specbvp {

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j)
      row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(row);
  }
  return rows;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty())
    throw Error(ErrorCode::IoFailure, "matrix json must be a nested array");
  const Index rows = static_cast<Index>(j.size());
  const Index cols = static_cast<Index>(j[0].size());
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    if (static_cast<Index>(j[r].size()) != cols)
      throw Error(ErrorCode::IoFailure, "ragged matrix json");
    for (Index c = 0; c < cols; ++c) {
      const auto& e = j[r][c];
      m(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
    }
  }
  return m;
}

namespace {

Json mode_to_json(const ModeIndex& k, int base_dim) {
  if (base_dim == 1) return k.k1;
  return Json::array({k.k1, k.k2});
}

ModeIndex mode_from_json(const Json& j) {
  ModeIndex k;
  if (j.is_number_integer()) {
    k.k1 = j.get<int>();
  } else if (j.is_array() && j.size() == 2) {
    k.k1 = j[0].get<int>();
    k.k2 = j[1].get<int>();
  } else {
    throw Error(ErrorCode::IoFailure, "mode index must be int or [int,int]");
  }
  return k;
}

}  // namespace

Json series_to_json(const MatrixSeries& s) {
  Json out = Json::array();
  for (const auto& [k, m] : s.coeff) {
    const int base_dim = (k.k2 != 0) ? 2 : 1;
    out.push_back(Json::array({mode_to_json(k, base_dim), matrix_to_json(m)}));
  }
  return out;
}

MatrixSeries series_from_json(const Json& j, int fiber_dim) {
  MatrixSeries s;
  s.fiber_dim = fiber_dim;
  if (j.is_null()) return s;
  for (const auto& entry : j) {
    if (!entry.is_array() || entry.size() != 2)
      throw Error(ErrorCode::IoFailure, "series entry must be [k, matrix]");
    const ModeIndex k = mode_from_json(entry[0]);
    const Matrix m = matrix_from_json(entry[1]);
    if (m.rows() != fiber_dim || m.cols() != fiber_dim)
      throw Error(ErrorCode::IoFailure, "series coefficient size mismatch");
    s.coeff[k] = m;
  }
  return s;
}

Json symbol_to_json(const SymbolField& s) {
  Json j;
  j["fiber_dim"] = s.fiber_dim;
  j["base_dim"] = s.base_dim;
  if (s.base.kind == BaseManifold::Circle)
    j["base"] = {{"type", "s1"}, {"circumference", s.base.circumference}};
  else
    j["base"] = {{"type", "t2"}};
  Json dirs = Json::array();
  for (std::size_t d = 0; d < s.directions.size(); ++d)
    dirs.push_back({{"name", s.direction_names[d]},
                    {"coeff_fourier", series_to_json(s.directions[d])}});
  j["directions"] = dirs;
  j["zero_order"] = series_to_json(s.zero_order);
  return j;
}

SymbolField symbol_from_json(const Json& j) {
  SymbolField s;
  s.fiber_dim = j.at("fiber_dim").get<int>();
  s.base_dim = j.value("base_dim", 1);
  if (j.contains("base")) {
    const auto& b = j["base"];
    if (b.at("type") == "t2") {
      s.base.kind = BaseManifold::Torus2;
    } else {
      s.base.kind = BaseManifold::Circle;
      s.base.circumference = b.value("circumference", 2.0 * pi);
    }
  }
  for (const auto& d : j.at("directions")) {
    s.direction_names.push_back(d.at("name").get<std::string>());
    s.directions.push_back(
        series_from_json(d.at("coeff_fourier"), s.fiber_dim));
  }
  if (j.contains("zero_order"))
    s.zero_order = series_from_json(j["zero_order"], s.fiber_dim);
  else
    s.zero_order.fiber_dim = s.fiber_dim;
  return s;
}

Json operator_data_to_json(const OperatorData& d) {
  SymbolField s;
  s.fiber_dim = d.fiber_dim;
  s.base_dim = d.base.base_dim();
  s.base = d.base;
  s.directions = d.first_order;
  s.zero_order = d.zero_order;
  for (int k = 0; k < d.base.base_dim(); ++k)
    s.direction_names.push_back(k == 0 ? "dx1" : "dx2");
  return symbol_to_json(s);
}

OperatorData operator_data_from_json(const Json& j) {
  const SymbolField s = symbol_from_json(j);
  OperatorData d;
  d.fiber_dim = s.fiber_dim;
  d.base = s.base;
  d.base.kind = s.base_dim == 1 ? BaseManifold::Circle : BaseManifold::Torus2;
  d.first_order = s.directions;
  d.zero_order = s.zero_order;
  if (d.zero_order.fiber_dim == 0) d.zero_order.fiber_dim = d.fiber_dim;
  return d;
}

Subspace boundary_condition_from_json(const Json& j,
                                      const SpectralSplit& split,
                                      const Tolerances& tol) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "aps") return aps_condition(split, tol);
  if (kind == "graph") {
    const Matrix g = matrix_from_json(j.at("g"));
    Matrix extra(split.dim(), 0);
    if (j.contains("extra_plus")) extra = matrix_from_json(j["extra_plus"]);
    return graph_condition(split, g, extra, tol);
  }
  if (kind == "local" || kind == "pseudo_local") {
    // A constant fiber projector applied per mode. This covers local
    // conditions exactly; x- or xi-dependent projector symbols enter the
    // symbol-level test instead of a coefficient-space subspace.
    return local_condition(split, matrix_from_json(j.at("projector")), tol);
  }
  if (kind == "explicit_basis") {
    return span_of(matrix_from_json(j.at("basis")), 0.5, tol);
  }
  throw Error(ErrorCode::IoFailure, "unknown boundary condition kind " + kind);
}

void write_matrix_csv(const std::string& path, const Json& header,
                      const Matrix& m) {
  std::vector<std::vector<double>> rows;
  rows.reserve(static_cast<std::size_t>(m.rows() * m.cols()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      rows.push_back({static_cast<double>(i), static_cast<double>(j),
                      m(i, j).real(), m(i, j).imag()});
  write_csv(path, header, {"row", "col", "re", "im"}, rows);
}

CylinderField source_from_json(const Json& j, const FourierOperator& op,
                               const TimeGrid& grid) {
  CylinderField f = zero_field(grid, op.dim());
  if (j.is_null()) return f;
  for (const auto& entry : j) {
    const ModeIndex k = mode_from_json(entry.at("mode"));
    const auto pos = op.mode_position(k);
    const auto& val = entry.at("value");
    if (static_cast<int>(val.size()) != op.fiber_dim())
      throw Error(ErrorCode::IoFailure, "source fiber vector size");
    Vector v(op.fiber_dim());
    for (int c = 0; c < op.fiber_dim(); ++c)
      v(c) = Complex(val[c][0].get<double>(), val[c][1].get<double>());
    const double omega = entry.value("omega", 0.0);
    for (int t = 0; t < grid.nodes(); ++t)
      f.values.block(op.mode_offset(pos), t, op.fiber_dim(), 1) +=
          std::exp(Complex(0, omega * grid.t(t))) * v;
  }
  return f;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const std::string& path, const Json& header,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  out << "# " << header.dump() << "\n";
  for (std::size_t c = 0; c < columns.size(); ++c)
    out << columns[c] << (c + 1 == columns.size() ? "\n" : ",");
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c)
      out << format_double(row[c]) << (c + 1 == row.size() ? "\n" : ",");
  }
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path);
}

void write_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  out << j.dump(2) << "\n";
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path);
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  Json j;
  in >> j;
  return j;
}

std::uint64_t config_hash(const std::string& canonical) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const char c : canonical) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace specbvp
