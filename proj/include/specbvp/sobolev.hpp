#ifndef SPECBVP_SOBOLEV_HPP
#define SPECBVP_SOBOLEV_HPP

#include <array>

#include "specbvp/speccalc.hpp"
#include "specbvp/subspace.hpp"

namespace specbvp {

/// Discrete H^s weight on the truncated space: either |A_r|^s (the norms of
/// the fractional-power scale) or the reference multiplier <k>^s per mode.
/// Stored per diagonal block of the split it was built from.
struct SobolevMetric {
  double s = 0.0;
  enum Kind { Modulus, Reference } kind = Modulus;
  std::vector<Matrix> weight;
  std::vector<Matrix> weight_inv;
  std::vector<Index> offsets;

  double norm(const Vector& u) const;
  Vector apply(const Vector& u) const;
  Vector apply_inv(const Vector& u) const;
  Matrix dense() const;
  Index dim() const;
};

SobolevMetric modulus_metric(const SpectralSplit& split, double s);
SobolevMetric reference_metric(const SpectralSplit& split, double s);
SobolevMetric make_metric(const SpectralSplit& split, double s,
                          SobolevMetric::Kind kind);

double sobolev_norm(const Vector& u, const SobolevMetric& metric);

/// Two-sided constants c, C with c * |u|_b <= |u|_a <= C * |u|_b; sharp on
/// the truncated space (extremal generalized singular values).
struct MetricEquivalence {
  double lower = 0.0;
  double upper = 0.0;
};

MetricEquivalence metric_equivalence(const SobolevMetric& a,
                                     const SobolevMetric& b);

/// Orthonormal basis (in the s-metric) of chi^{+-}(A_r) applied to the
/// truncated space, tagged with s.
Subspace spectral_subspace(const SpectralSplit& split,
                           const SobolevMetric& metric, int sign,
                           const Tolerances& tol = {});

/// The check norm  |u|^2 = |chi^- u|_{H^{1/2}}^2 + |chi^+ u|_{H^{-1/2}}^2
/// and the hat norm with the Sobolev orders exchanged (= check norm of -A).
struct CheckSpaceNorm {
  std::vector<Matrix> chi_plus;
  std::vector<Index> offsets;
  SobolevMetric half;
  SobolevMetric minus_half;

  double check(const Vector& u) const;
  double hat(const Vector& u) const;
};

CheckSpaceNorm check_space_norm(const SpectralSplit& split,
                                SobolevMetric::Kind kind =
                                    SobolevMetric::Modulus);

double check_norm(const Vector& u, const CheckSpaceNorm& cs);
double hat_norm(const Vector& u, const CheckSpaceNorm& cs);

/// Cut independence of the check space: sampled norm ratios against the
/// sharp predicted bracket, and the finite rank of the cross projector
/// chi^-(A_r) chi^+(A_q) against the strip eigenvalue count.
struct CutIndependenceReport {
  double sup_ratio = 0.0;
  double inf_ratio = 0.0;
  double predicted_lower = 0.0;
  double predicted_upper = 0.0;
  int cross_rank = 0;
  int strip_count = 0;
  std::uint64_t seed = 0;
  struct Sample {
    double norm_r;
    double norm_q;
    double ratio;
  };
  std::vector<Sample> samples;
};

CutIndependenceReport cut_independence_report(const FourierOperator& a,
                                              double r, double q,
                                              int sample_count,
                                              std::uint64_t seed = 2024,
                                              const Tolerances& tol = {});

/// L^2 pairing between H^{-s}_{sign}(A_r^*) and H^{s}_{sign}(A_r) with a
/// perfectness certificate: the smallest singular value of the Gram matrix
/// between the metric-orthonormal bases of the two subspaces.
struct PairingReport {
  Complex value{0, 0};
  double gram_smin = 0.0;
  bool perfect = false;
};

PairingReport duality_pairing(const SpectralSplit& split,
                              const SpectralSplit& split_star, double s,
                              int sign, const Vector& u, const Vector& v,
                              const Tolerances& tol = {});

}  // namespace specbvp

#endif
