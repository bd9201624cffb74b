#include <doctest.h>

#include "specbvp/models.hpp"
#include "specbvp/sobolev.hpp"
#include "test_helpers.hpp"

using namespace specbvp;

TEST_SUITE_BEGIN("sobolev");

namespace {

OperatorData a0_data() {
  Matrix b(2, 2);
  b << Complex(0, 1), 0, 0, Complex(0, -1);
  OperatorData d;
  d.fiber_dim = 2;
  d.first_order = {MatrixSeries::constant_series(b)};
  d.zero_order.fiber_dim = 2;
  return d;
}

// Coefficient index of the fiber component f at mode k.
Index idx_of(const FourierOperator& op, int k, int f) {
  return op.mode_offset(op.mode_position({k, 0})) + f;
}

}  // namespace

TEST_CASE("s = 0 reproduces the L2 norm") {
  const FourierOperator a0 = assemble(a0_data(), 3);
  const SpectralSplit s = spectral_split_oracle(a0, {0.5, 0.5});
  const SobolevMetric m0 = modulus_metric(s, 0.0);
  Rng rng(1);
  const Vector u = rng.cgaussian_vector(s.dim());
  CHECK(sobolev_norm(u, m0) == doctest::Approx(u.norm()).epsilon(1e-12));
}

TEST_CASE("modulus weight on A0 eigenvectors is |k - 1/2|^s") {
  const FourierOperator a0 = assemble(a0_data(), 4);
  const SpectralSplit sp = spectral_split_oracle(a0, {0.5, 0.5});
  for (const double s : {-0.5, 0.5, 1.0}) {
    const SobolevMetric m = modulus_metric(sp, s);
    for (const int k : {-3, 0, 2}) {
      // Second fiber component at mode k has A0-eigenvalue k.
      Vector u = Vector::Zero(sp.dim());
      u(idx_of(a0, k, 1)) = 1.0;
      CHECK(sobolev_norm(u, m) ==
            doctest::Approx(std::pow(std::abs(k - 0.5), s)).epsilon(1e-12));
    }
  }
}

TEST_CASE("reference and modulus norms are equivalent with recorded constants") {
  const FourierOperator a0 = assemble(a0_data(), 4);
  const SpectralSplit sp = spectral_split_oracle(a0, {0.5, 0.5});
  Rng rng(7);
  for (const double s : {-0.5, 0.5, 1.0}) {
    const SobolevMetric mm = modulus_metric(sp, s);
    const SobolevMetric mr = reference_metric(sp, s);
    const MetricEquivalence eq = metric_equivalence(mm, mr);
    CHECK(eq.lower > 0.0);
    CHECK(eq.upper < 1e3);
    for (int trial = 0; trial < 50; ++trial) {
      const Vector u = rng.cgaussian_vector(sp.dim());
      const double ratio = sobolev_norm(u, mm) / sobolev_norm(u, mr);
      CHECK(ratio >= eq.lower * (1 - 1e-10));
      CHECK(ratio <= eq.upper * (1 + 1e-10));
    }
    // The reference weight on a mode-k eigenvector is <k>^s.
    Vector u = Vector::Zero(sp.dim());
    u(idx_of(a0, 3, 1)) = 1.0;
    CHECK(sobolev_norm(u, mr) ==
          doctest::Approx(std::pow(1.0 + 9.0, 0.5 * s)).epsilon(1e-12));
  }
}

TEST_CASE("spectral subspaces have the right dimensions and metric") {
  // Cut below the whole spectrum: the plus subspace is everything.
  const FourierOperator a0 = assemble(a0_data(), 4);
  const SpectralSplit below = spectral_split_oracle(a0, {-4.5, 0.5});
  const SobolevMetric m = modulus_metric(below, 0.5);
  CHECK(spectral_subspace(below, m, +1).dim() == below.dim());
  CHECK(spectral_subspace(below, m, -1).dim() == 0);

  // A0 at r = 1/2, N = 4: eigenvalues >= 1 live on 2N coefficient lines.
  const SpectralSplit half = spectral_split_oracle(a0, {0.5, 0.5});
  const SobolevMetric mh = modulus_metric(half, 0.5);
  const Subspace plus = spectral_subspace(half, mh, +1);
  CHECK(plus.dim() == 8);
  CHECK(plus.s == 0.5);
  // Orthonormal in the weighted inner product: basis^H W^H W basis = I.
  const Matrix wb = mh.dense() * plus.basis;
  CHECK(spectral_norm(Matrix(wb.adjoint() * wb -
                             Matrix::Identity(plus.dim(), plus.dim()))) <
        1e-10);

  // Nondiag at r = -1/2, N = 4: block k contributes for -k > -1/2,
  // i.e. k <= 0: dimension 2 (N + 1).
  const FourierOperator nd = build_nondiag(4);
  const SpectralSplit snd = spectral_split_oracle(nd, {-0.5, 0.5});
  const SobolevMetric mnd = modulus_metric(snd, 0.5);
  CHECK(spectral_subspace(snd, mnd, +1).dim() == 10);
}

TEST_CASE("check norm splits into the two weighted halves") {
  const FourierOperator a0 = assemble(a0_data(), 4);
  const SpectralSplit sp = spectral_split_oracle(a0, {0.5, 0.5});
  const CheckSpaceNorm cs = check_space_norm(sp);

  // chi^- range: only the H^{1/2} term contributes.
  Vector um = Vector::Zero(sp.dim());
  um(idx_of(a0, -2, 1)) = 1.0;  // eigenvalue -2 < 1/2
  const SobolevMetric mh = modulus_metric(sp, 0.5);
  CHECK(check_norm(um, cs) ==
        doctest::Approx(sobolev_norm(um, mh)).epsilon(1e-12));
  CHECK(check_norm(um, cs) ==
        doctest::Approx(std::pow(2.5, 0.5)).epsilon(1e-12));

  // chi^+ eigenvector at eigenvalue k: |k - 1/2|^{-1/2}.
  Vector up = Vector::Zero(sp.dim());
  up(idx_of(a0, 3, 1)) = 1.0;
  CHECK(check_norm(up, cs) ==
        doctest::Approx(std::pow(2.5, -0.5)).epsilon(1e-12));

  // Mixed vectors: Pythagorean sum of the two tagged pieces.
  const Vector mixed = 2.0 * um + 3.0 * up;
  CHECK(check_norm(mixed, cs) ==
        doctest::Approx(std::sqrt(4.0 * 2.5 + 9.0 / 2.5)).epsilon(1e-12));
}

TEST_CASE("hat norm equals the check norm of the negated operator") {
  const FourierOperator a = build_tilted_dirac(1.0, 3);
  const double r = 0.25;
  const SpectralSplit sp = spectral_split_oracle(a, {r, 0.2});
  const CheckSpaceNorm cs = check_space_norm(sp);

  const FourierOperator neg = scale(a, Complex(-1, 0));
  const SpectralSplit sneg = spectral_split_oracle(neg, {-r, 0.2});
  const CheckSpaceNorm cs_neg = check_space_norm(sneg);

  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector u = rng.cgaussian_vector(sp.dim());
    CHECK(hat_norm(u, cs) ==
          doctest::Approx(check_norm(u, cs_neg)).epsilon(1e-10));
  }
}

TEST_CASE("cut independence: equal cuts give ratio one") {
  const FourierOperator a0 = assemble(a0_data(), 3);
  const CutIndependenceReport rep =
      cut_independence_report(a0, 0.5, 0.5, 32);
  CHECK(rep.sup_ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.inf_ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.cross_rank == 0);
  CHECK(rep.strip_count == 0);
}

TEST_CASE("cut independence: A0 between 1/2 and 3/2") {
  const FourierOperator a0 = assemble(a0_data(), 4);
  const CutIndependenceReport rep =
      cut_independence_report(a0, 3.0 / 2.0, 1.0 / 2.0, 200);
  CHECK(rep.cross_rank == 2);  // eigenvalue 1 with multiplicity 2
  CHECK(rep.strip_count == 2);
  CHECK(rep.predicted_lower > 0.0);
  for (const auto& s : rep.samples) {
    CHECK(s.ratio >= rep.predicted_lower * (1 - 1e-9));
    CHECK(s.ratio <= rep.predicted_upper * (1 + 1e-9));
  }
  CHECK(rep.inf_ratio >= rep.predicted_lower * (1 - 1e-9));
  CHECK(rep.sup_ratio <= rep.predicted_upper * (1 + 1e-9));
}

TEST_CASE("cut independence: tilted Dirac between 1/4 and 3/4") {
  // Cut order must not matter for the strip bookkeeping.
  const FourierOperator td = build_tilted_dirac(1.0, 4);
  const CutIndependenceReport rep =
      cut_independence_report(td, 0.25, 0.75, 100);
  CHECK(rep.cross_rank == 2);  // both eigenvalues with Re = 1/2
  CHECK(rep.strip_count == 2);
  const CutIndependenceReport swapped =
      cut_independence_report(td, 0.75, 0.25, 100);
  CHECK(swapped.cross_rank == 2);
}

TEST_CASE("duality pairing certificates") {
  // Selfadjoint A0: the bases on the two sides coincide, Gram = identity.
  const FourierOperator a0 = assemble(a0_data(), 3);
  const SpectralSplit sp = spectral_split_oracle(a0, {0.5, 0.5});
  const SpectralSplit sps = spectral_split_oracle(adjoint(a0), {0.5, 0.5});
  Rng rng(3);
  const Vector u = rng.cgaussian_vector(sp.dim());
  const Vector v = rng.cgaussian_vector(sp.dim());
  const PairingReport rep = duality_pairing(sp, sps, 0.5, +1, u, v);
  CHECK(rep.perfect);
  CHECK(rep.gram_smin == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(rep.value - u.dot(v)) < 1e-12);

  // Torus operator at a cut inside its Jordan blocks: the pairing stays
  // perfect even though the split is non-orthogonal.
  const FourierOperator rs = build_rs_torus(2);
  const SpectralSplit srs = spectral_split_oracle(rs, {1.0, 0.5});
  const SpectralSplit srss = spectral_split_oracle(adjoint(rs), {1.0, 0.5});
  Rng rng2(4);
  const Vector u2 = rng2.cgaussian_vector(srs.dim());
  const Vector v2 = rng2.cgaussian_vector(srs.dim());
  const PairingReport rep2 = duality_pairing(srs, srss, 0.5, +1, u2, v2);
  CHECK(rep2.perfect);
  CHECK(rep2.gram_smin > 1e-3);

  // A generic non-normal block with spectrum on both sides of the cut gives
  // a nonsingular but non-unitary Gram.
  Matrix c(3, 3);
  c << Complex(2, 0), Complex(1, 1), Complex(0, 0.5), Complex(0, 0),
      Complex(-1.5, 0.3), Complex(1, 0), Complex(0, 0), Complex(0, 0),
      Complex(0.8, -0.2);
  OperatorData d;
  d.fiber_dim = 3;
  d.first_order = {MatrixSeries::constant_series(Matrix::Zero(3, 3))};
  d.zero_order = MatrixSeries::constant_series(c);
  const FourierOperator gop = assemble(d, 0);
  const SpectralSplit sg = spectral_split_oracle(gop, {0.0, 0.3});
  const SpectralSplit sgs = spectral_split_oracle(adjoint(gop), {0.0, 0.3});
  Rng rng3(6);
  const Vector u3 = rng3.cgaussian_vector(3);
  const Vector v3 = rng3.cgaussian_vector(3);
  const PairingReport rep3 = duality_pairing(sg, sgs, 0.5, +1, u3, v3);
  CHECK(rep3.perfect);
  CHECK(rep3.gram_smin > 1e-3);
  CHECK(rep3.gram_smin < 1.0 - 1e-3);
}

TEST_CASE("cross-sign ranges annihilate each other") {
  // <chi^+(A_r^*) x, chi^-(A_r) y> = 0: ker(chi^-(A_r)^*) is orthogonal to
  // ran(chi^-(A_r)).
  const FourierOperator nd = build_nondiag(3);
  const SpectralSplit sp = spectral_split_oracle(nd, {-0.5, 0.5});
  const SpectralSplit sps = spectral_split_oracle(adjoint(nd), {-0.5, 0.5});
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const Vector x = rng.cgaussian_vector(sp.dim());
    const Vector y = rng.cgaussian_vector(sp.dim());
    const Vector xp = sps.apply_chi_plus(x);
    const Vector ym = sp.apply_chi_minus(y);
    CHECK(std::abs(xp.dot(ym)) < 1e-10 * (1.0 + xp.norm() * ym.norm()));
  }
}

TEST_CASE("adjoint projector identity under the pairing") {
  const FourierOperator td = build_tilted_dirac(1.0, 3);
  const SpectralSplit sp = spectral_split_oracle(td, {0.25, 0.2});
  const SpectralSplit sps = spectral_split_oracle(adjoint(td), {0.25, 0.2});
  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const Vector u = rng.cgaussian_vector(sp.dim());
    const Vector v = rng.cgaussian_vector(sp.dim());
    const Complex lhs = sps.apply_chi_plus(u).dot(v);
    const Complex rhs = u.dot(sp.apply_chi_plus(v));
    CHECK(std::abs(lhs - rhs) < 1e-12 * (1.0 + std::abs(lhs)));
  }
}

TEST_SUITE_END();
