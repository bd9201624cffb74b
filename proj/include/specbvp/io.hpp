#ifndef SPECBVP_IO_HPP
#define SPECBVP_IO_HPP

#include <json.hpp>
#include <string>

#include "specbvp/cylinder.hpp"
#include "specbvp/fredpair.hpp"
#include "specbvp/symbols.hpp"

namespace specbvp {

using Json = nlohmann::json;

Json matrix_to_json(const Matrix& m);       // nested [re, im] entries
Matrix matrix_from_json(const Json& j);

Json series_to_json(const MatrixSeries& s);
MatrixSeries series_from_json(const Json& j, int fiber_dim);

/// {"fiber_dim": m, "directions": [{"name": ..., "coeff_fourier":
///  [[k, matrix], ...]}, ...], "zero_order": [[k, matrix], ...]}
Json symbol_to_json(const SymbolField& s);
SymbolField symbol_from_json(const Json& j);

Json operator_data_to_json(const OperatorData& d);
OperatorData operator_data_from_json(const Json& j);

/// {"kind": "aps" | "graph" | "local" | "explicit_basis", ...}.
Subspace boundary_condition_from_json(const Json& j,
                                      const SpectralSplit& split,
                                      const Tolerances& tol = {});

/// Source field from a mode-coefficient table:
/// [{"mode": k or [k1,k2], "value": [[re,im],...], "omega": w}, ...]
/// meaning f(t) = sum e^{i w t} * (coefficient vector placed at the mode).
CylinderField source_from_json(const Json& j, const FourierOperator& op,
                               const TimeGrid& grid);

/// Writes a CSV file with a one-line JSON header ("# {...}") and fixed
/// 17-significant-digit formatting; reruns with identical input are
/// byte-identical.
void write_csv(const std::string& path, const Json& header,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);

/// Sparse-style dump (row, col, re, im) of an assembled matrix.
void write_matrix_csv(const std::string& path, const Json& header,
                      const Matrix& m);

void write_json(const std::string& path, const Json& j);

Json read_json_file(const std::string& path);

/// FNV-1a hash of the canonical configuration string, for output headers.
std::uint64_t config_hash(const std::string& canonical);

std::string format_double(double v);

}  // namespace specbvp

#endif
