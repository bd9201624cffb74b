#ifndef SPECBVP_TYPES_HPP
#define SPECBVP_TYPES_HPP

#include <Eigen/Dense>
#include <complex>
#include <random>
#include <stdexcept>
#include <string>

namespace specbvp {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double pi = 3.14159265358979323846;

enum class ErrorCode {
  NotElliptic,
  RealEigenvalueFound,
  ClusterAmbiguity,
  BandwidthExceeded,
  DimensionMismatch,
  NoGapInWindow,
  CutHitsSpectrum,
  ResolventIllConditioned,
  SingularModulus,
  SectorTooNarrow,
  GridTooCoarse,
  ConsistencyFailure,
  AmbiguousRank,
  DegeneratePairing,
  NotAProjectorSymbol,
  DecompositionResidualTooLarge,
  PreconditionViolated,
  MethodDisagreement,
  ProjectorConstructionFailure,
  InvalidArgument,
  IoFailure,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

const char* error_code_name(ErrorCode code);

/// Numerical policy shared across the library. Rank decisions use
/// tau = rank_factor * machine_eps * scale, where scale is the spectral
/// norm (or largest singular value) of the matrix in question.
struct Tolerances {
  double rank_factor = 64.0;
  double cluster_rel = 1e-8;     // eigenvalue clustering radius, relative
  double ambiguity_band = 10.0;  // sigma within band*tau flags AmbiguousRank
  double pairing_min = 1e-8;     // perfect-pairing certificate threshold

  double rank_threshold(double scale) const {
    const double eps = std::numeric_limits<double>::epsilon();
    return rank_factor * eps * std::max(scale, 1e-300);
  }
};

/// Deterministic complex Gaussian sampling; substreams are derived from
/// (seed, stream) so parallel loops stay reproducible.
class Rng {
public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : gen_(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1))) {}

  double gaussian() { return normal_(gen_); }
  Complex cgaussian() { return Complex(normal_(gen_), normal_(gen_)); }
  double uniform() { return uni_(gen_); }

  Vector cgaussian_vector(Index n) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = cgaussian();
    return v;
  }

  Matrix cgaussian_matrix(Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) m(i, j) = cgaussian();
    return m;
  }

private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uni_{0.0, 1.0};
};

}  // namespace specbvp

#endif
