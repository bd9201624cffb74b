// Acceptance suite: closed-form example reproduction, oracle equivalence,
// and invariant checks, one criterion per section. Prints one line per
// criterion and exits nonzero on any failure.

#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#include "specbvp/cylinder.hpp"
#include "specbvp/fredpair.hpp"
#include "specbvp/io.hpp"
#include "specbvp/models.hpp"
#include "test_helpers.hpp"

using namespace specbvp;

namespace {

struct Harness {
  int failures = 0;
  int current = 0;
  bool current_ok = true;
  std::string detail;

  void begin(int number) {
    current = number;
    current_ok = true;
    detail.clear();
  }
  void require(bool ok, const std::string& what) {
    if (!ok) {
      current_ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  void finish(const std::string& label, double seconds) {
    std::printf("[%s] C%d %s (%.2fs)%s%s\n", current_ok ? "PASS" : "FAIL",
                current, label.c_str(), seconds,
                current_ok ? "" : " -- ", current_ok ? "" : detail.c_str());
    if (!current_ok) ++failures;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

struct NamedOperator {
  std::string name;
  FourierOperator op;
  double cut;
};

std::vector<NamedOperator> section3_operators(int n) {
  return {{"nondiag", build_nondiag(n), -0.5},
          {"tilted-dirac", build_tilted_dirac(1.0, n), 0.25},
          {"rarita-schwinger", build_rs_torus(n), pi}};
}

}  // namespace

int main() {
  Harness h;

  // ---------------------------------------------------------------- C1
  {
    h.begin(1);
    const auto t0 = std::chrono::steady_clock::now();
    const int n = 16;
    for (const double alpha : {0.0, 0.5, 1.0, 2.0}) {
      const FourierOperator a = build_tilted_dirac(alpha, n);
      std::vector<Complex> expected;
      const double d = alpha * alpha + 1.0;
      for (int k = -n; k <= n; ++k) {
        expected.push_back(Complex(1, -alpha) * static_cast<double>(k) / d);
        expected.push_back(Complex(1, alpha) * static_cast<double>(k) / d);
      }
      const double dist =
          testing::spectrum_distance(spectrum(a), expected);
      h.require(dist <= 1e-10 * n,
                "spectrum mismatch at alpha=" + std::to_string(alpha));
      // Multiplicities: per-mode clusters are simple for alpha != 0 and
      // double for alpha = 0.
      for (std::size_t p = 0; p < a.blocks.size(); ++p) {
        const EigStructure es = eig_structure(a.blocks[p]);
        for (const auto& c : es.clusters) {
          if (alpha == 0.0 && a.modes[p].k1 == 0) {
            h.require(c.algebraic == 2, "zero-mode multiplicity");
          } else if (alpha == 0.0) {
            h.require(c.algebraic == 1 && c.geometric == 1,
                      "A0 per-mode multiplicity");
          } else {
            h.require(c.algebraic == (a.modes[p].k1 == 0 ? 2 : 1),
                      "tilted per-mode multiplicity");
          }
        }
      }
    }
    const double secs = seconds_since(t0);
    h.require(secs < 1.0, "runtime above one second");
    h.finish("tilted Dirac closed-form spectra, N=16, rel err <= 1e-10", secs);
  }

  // ---------------------------------------------------------------- C2
  {
    h.begin(2);
    const auto t0 = std::chrono::steady_clock::now();
    auto [sigma_d, sigma_a] = build_rs_symbols();
    for (int a = 0; a < 64; ++a) {
      const double th = 2.0 * pi * a / 64;
      RealVector xi(2);
      xi << std::cos(th), std::sin(th);
      const EigStructure es = symbol_eig_structure(
          sigma_a.eval_principal(RealVector::Zero(2), xi));
      h.require(es.clusters.size() == 2, "cluster count");
      for (const auto& c : es.clusters) {
        h.require(std::min(std::abs(c.lambda - Complex(0, 1)),
                           std::abs(c.lambda - Complex(0, -1))) <= 1e-8,
                  "eigenvalue not +-i");
        h.require(c.algebraic == 2 && c.geometric == 1,
                  "multiplicities not (alg 2, geom 1)");
      }
    }
    // det [[2, (l-1/l)i], [(l-1/l)i, 2]] = (l + 1/l)^2 at 20 sample points.
    Rng rng(2026);
    for (int s = 0; s < 20; ++s) {
      const Complex l = rng.cgaussian() + Complex(2.5, 0.0);
      Matrix m(2, 2);
      const Complex off = (l - 1.0 / l) * Complex(0, 1);
      m << 2.0, off, off, 2.0;
      const Complex expected = std::pow(l + 1.0 / l, 2.0);
      h.require(std::abs(m.determinant() - expected) <=
                    1e-12 * std::max(1.0, std::abs(expected)),
                "determinant identity");
    }
    h.finish("Rarita-Schwinger symbol: +-i Jordan blocks, det identity",
             seconds_since(t0));
  }

  // ---------------------------------------------------------------- C3
  {
    h.begin(3);
    const auto t0 = std::chrono::steady_clock::now();
    const int n = 8;
    const FourierOperator a = build_rs_torus(n);
    double max_im = 0.0;
    for (std::size_t p = 0; p < a.blocks.size(); ++p) {
      const ModeIndex k = a.modes[p];
      const EigStructure es = eig_structure(a.blocks[p]);
      for (const auto& c : es.clusters)
        max_im = std::max(max_im, std::abs(c.lambda.imag()));
      if (k.k1 == 0 && k.k2 == 0) {
        h.require(es.clusters.size() == 1 && es.clusters[0].geometric == 4,
                  "zero mode kernel dimension");
        continue;
      }
      const double kn = 2.0 * pi * std::hypot(k.k1, k.k2);
      h.require(es.clusters.size() == 2, "per-mode cluster count");
      for (const auto& c : es.clusters) {
        h.require(std::min(std::abs(c.lambda - Complex(kn, 0)),
                           std::abs(c.lambda - Complex(-kn, 0))) <=
                      1e-8 * (1.0 + kn),
                  "eigenvalue not +-2pi|k|");
        h.require(c.algebraic == 2 && c.geometric == 1,
                  "Jordan block size");
      }
    }
    h.require(max_im <= 1e-10, "imaginary residual above 1e-10");
    const Matrix full = dense_matrix(build_rs_torus(2));
    h.require(spectral_norm(full - full.adjoint()) >= 0.1,
              "operator unexpectedly close to selfadjoint");
    h.finish("torus operator: +-2pi|k| Jordan pairs, real spectrum, "
             "non-selfadjoint",
             seconds_since(t0));
  }

  // ---------------------------------------------------------------- C4
  {
    h.begin(4);
    const auto t0 = std::chrono::steady_clock::now();
    ContourQuadrature quad;  // documented defaults; H chosen per operator
    for (const auto& named : section3_operators(16)) {
      const SpectralCut cut{named.cut, 0.0};
      const SpectralSplit split = spectral_split_oracle(named.op, cut);
      const ContourProjector contour =
          spectral_split_contour(named.op, cut, quad);
      double dev = 0.0, idem = 0.0, comm = 0.0;
      for (int b = 0; b < split.nblocks(); ++b) {
        const auto bi = static_cast<size_t>(b);
        dev = std::max(dev, spectral_norm(contour.chi_plus[bi] -
                                          split.chi_plus[bi]));
        idem = std::max(idem,
                        spectral_norm(split.chi_plus[bi] * split.chi_plus[bi] -
                                      split.chi_plus[bi]));
        comm = std::max(comm,
                        spectral_norm(split.chi_plus[bi] * split.a_r[bi] -
                                      split.a_r[bi] * split.chi_plus[bi]));
      }
      h.require(dev <= 1e-6, named.name + ": contour vs oracle " +
                                 format_double(dev));
      h.require(idem <= 1e-10, named.name + ": idempotence " +
                                   format_double(idem));
      h.require(comm <= 1e-10, named.name + ": commutation " +
                                   format_double(comm));
    }
    h.finish("contour projector matches the invariant-subspace oracle, "
             "residuals in tolerance",
             seconds_since(t0));
  }

  // ---------------------------------------------------------------- C5
  {
    h.begin(5);
    const auto t0 = std::chrono::steady_clock::now();
    // Selfadjoint A0 at r = 1/2: the square function equals |u|^2 / 4.
    const FourierOperator a0 = build_tilted_dirac(0.0, 16);
    const SpectralSplit split = spectral_split_oracle(a0, {0.5, 0.5});
    Rng rng(505);
    double worst = 0.0;
    const Matrix samples = rng.cgaussian_matrix(split.dim(), 100);
    for (const auto& q :
         quadratic_estimate_batch(split, samples, psi_alpha(1.0)))
      worst = std::max(worst, std::abs(q.ratio / 0.25 - 1.0));
    h.require(worst <= 1e-6,
              "selfadjoint ratio deviation " + format_double(worst));

    // Nondiagonalisable operator: the ratio bracket stabilizes under
    // refinement.
    std::vector<double> spread;
    for (const int n : {8, 16, 32}) {
      const FourierOperator nd = build_nondiag(n);
      const SpectralSplit s = spectral_split_oracle(nd, {-0.5, 0.5});
      double lo = 1e300, hi = 0.0;
      Rng rng2(707);
      const Matrix batch = rng2.cgaussian_matrix(s.dim(), 40);
      for (const auto& q : quadratic_estimate_batch(s, batch, psi_alpha(1.0))) {
        lo = std::min(lo, q.ratio);
        hi = std::max(hi, q.ratio);
      }
      spread.push_back(hi / lo);
    }
    const double drift = std::abs(spread[2] - spread[1]) / spread[1];
    h.require(drift < 0.25,
              "bracket drift between the two finest levels " +
                  format_double(drift));
    h.finish("quadratic estimate: |u|^2/4 for A0; stable bracket for the "
             "nondiagonalisable operator",
             seconds_since(t0));
  }

  // ---------------------------------------------------------------- C6
  {
    h.begin(6);
    const auto t0 = std::chrono::steady_clock::now();
    struct Pick {
      std::string name;
      FourierOperator op;
      double r, q;
    };
    std::vector<Pick> picks;
    picks.push_back({"nondiag", build_nondiag(8), -0.5, -2.5});
    picks.push_back({"tilted-dirac", build_tilted_dirac(1.0, 8), 0.75, 0.25});
    picks.push_back({"rarita-schwinger", build_rs_torus(4), 3.0 * pi, pi});
    for (const auto& pick : picks) {
      const CutIndependenceReport rep =
          cut_independence_report(pick.op, pick.r, pick.q, 1000, 2024);
      h.require(rep.cross_rank == rep.strip_count,
                pick.name + ": cross rank " + std::to_string(rep.cross_rank) +
                    " vs strip " + std::to_string(rep.strip_count));
      h.require(rep.inf_ratio >= rep.predicted_lower * (1 - 1e-9) &&
                    rep.sup_ratio <= rep.predicted_upper * (1 + 1e-9),
                pick.name + ": sampled ratios escape the predicted bracket");
    }
    h.finish("check-space cut independence: strip ranks exact, ratios inside "
             "the predicted bracket",
             seconds_since(t0));
  }

  // ---------------------------------------------------------------- C7
  {
    h.begin(7);
    const auto t0 = std::chrono::steady_clock::now();
    const FourierOperator a0 = build_tilted_dirac(0.0, 8);
    const SpectralSplit split = spectral_split_oracle(a0, {0.5, 0.5});

    // Right-inverse residual: slope >= 1.9 over J in {64, 128, 256}.
    std::vector<double> residuals;
    for (const int steps : {64, 128, 256}) {
      TimeGrid grid{1.0, steps};
      Rng rng(909);
      CylinderField u = zero_field(grid, split.dim());
      const Vector xi = rng.cgaussian_vector(split.dim());
      const Vector xi2 = rng.cgaussian_vector(split.dim());
      for (int j = 0; j < grid.nodes(); ++j)
        u.values.col(j) = std::cos(2.0 * pi * grid.t(j)) * xi +
                          std::sin(pi * grid.t(j)) * xi2;
      const CylinderField su = solution_operator(u, split);
      const CylinderField dsu =
          model_operator_apply(su, split, Matrix::Identity(2, 2));
      double resid = 0.0;
      for (int j = 1; j < grid.steps; ++j)
        resid = std::max(resid, (dsu.values.col(j) - u.values.col(j)).norm());
      residuals.push_back(resid);

      // Boundary vanishing, exact at the quadrature level.
      h.require(split.apply_chi_plus(su.values.col(0)).norm() == 0.0,
                "chi+ S u (0) != 0");
      h.require(split.apply_chi_minus(su.values.col(grid.steps)).norm() == 0.0,
                "chi- S u (rho) != 0");
    }
    const double slope1 = std::log2(residuals[0] / residuals[1]);
    const double slope2 = std::log2(residuals[1] / residuals[2]);
    h.require(slope1 >= 1.9 && slope2 >= 1.9,
              "refinement slopes " + format_double(slope1) + ", " +
                  format_double(slope2));

    // Maximal-regularity constant, rho independent within 20%.
    std::vector<double> constants;
    for (const double rho : {0.25, 0.5, 1.0})
      constants.push_back(
          maximal_regularity_constant(split, TimeGrid{rho, 64}));
    const double cmin = *std::min_element(constants.begin(), constants.end());
    const double cmax = *std::max_element(constants.begin(), constants.end());
    h.require(cmax / cmin <= 1.2, "regularity constant varies by " +
                                      format_double(cmax / cmin));
    h.finish("model operator: right inverse at order 2, exact boundary "
             "vanishing, rho-independent regularity constant",
             seconds_since(t0));
  }

  // ---------------------------------------------------------------- C8
  {
    h.begin(8);
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(808);
    for (const auto& named : section3_operators(4)) {
      double lo_re = 0.0, hi_re = 0.0;
      for (const Complex z : spectrum(named.op)) {
        lo_re = std::min(lo_re, z.real());
        hi_re = std::max(hi_re, z.real());
      }
      const auto cuts = find_cuts(named.op, lo_re - 1.0, hi_re + 1.0);
      h.require(cuts.size() >= 2, named.name + ": not enough cuts");
      for (int trial = 0; trial < 10; ++trial) {
        const std::size_t i =
            static_cast<std::size_t>(rng.uniform() * cuts.size());
        std::size_t j =
            static_cast<std::size_t>(rng.uniform() * cuts.size());
        if (j == i) j = (j + 1) % cuts.size();
        const double r = cuts[i].r, r2 = cuts[j].r;
        try {
          const IndexReport rep = index_strip(named.op, r, r2, 0.25, 16);
          h.require(rep.agree, named.name + ": methods disagree");
          const IndexReport swapped =
              index_strip(named.op, r2, r, 0.25, 16);
          h.require(rep.index_discrete + swapped.index_discrete == 0,
                    named.name + ": antisymmetry fails");
        } catch (const Error& e) {
          h.require(false, named.name + ": " + e.what());
        }
      }
      // B0 conditions: trivial kernel and cokernel at this truncation.
      const IndexReport b0 = index_strip(named.op, named.cut, named.cut,
                                         0.25, 16);
      h.require(b0.kernel_discrete == 0 && b0.cokernel_discrete == 0,
                named.name + ": B0 not an isomorphism");
    }
    h.finish("strip index: discrete system = fundamental-solution oracle = "
             "algebraic count; B0 iso",
             seconds_since(t0));
  }

  // ---------------------------------------------------------------- C9
  {
    h.begin(9);
    const auto t0 = std::chrono::steady_clock::now();
    struct BcCase {
      std::string name;
      FourierOperator op;
      double cut;
      int modes;
    };
    std::vector<BcCase> cases;
    cases.push_back({"nondiag", build_nondiag(3), -0.5, 3});
    cases.push_back({"tilted-dirac", build_tilted_dirac(1.0, 3), 0.25, 3});
    cases.push_back({"rarita-schwinger", build_rs_torus(2), pi, 2});
    Rng rng(909);
    for (const auto& c : cases) {
      const SpectralSplit split = spectral_split_oracle(c.op, {c.cut, 0.0});
      const SpectralSplit split_star =
          spectral_split_oracle(adjoint(c.op), {c.cut, 0.0});

      // APS.
      const Subspace aps = aps_condition(split);
      const FpDecompositionReport fp_aps =
          fp_decomposition_check(aps, split, split_star);
      h.require(fp_aps.pass && fp_aps.pair_plus.index == 0,
                c.name + ": APS index");
      const EllipticDecomposition dec_aps =
          extract_elliptic_decomposition(aps, split, split_star);
      h.require(dec_aps.w_plus.dim() == 0 && dec_aps.w_minus.dim() == 0,
                c.name + ": APS correction spaces");
      h.require(dec_aps.reconstruction_residual <= 1e-9,
                c.name + ": APS reconstruction");

      // Randomized graph conditions, with and without adjoined vectors.
      const GraphConditionBases gb = graph_condition_bases(split);
      for (int trial = 0; trial < 3; ++trial) {
        const Matrix g =
            0.5 * rng.cgaussian_matrix(gb.plus.dim(), gb.minus.dim());
        const int extra = trial;  // 0, 1, 2 adjoined plus-vectors
        const Matrix extra_cols = gb.plus.basis.leftCols(extra);
        const Subspace b = graph_condition(split, g, extra_cols);
        const FpDecompositionReport fp =
            fp_decomposition_check(b, split, split_star);
        const EllipticDecomposition dec =
            extract_elliptic_decomposition(b, split, split_star);
        h.require(fp.pass, c.name + ": graph fp check");
        h.require(fp.pair_plus.index ==
                      static_cast<int>(dec.w_plus.dim() - dec.w_minus.dim()),
                  c.name + ": index vs dim W+ - dim W-");
        h.require(static_cast<int>(dec.w_plus.dim()) == extra,
                  c.name + ": planted W+ dimension");
        h.require(dec.reconstruction_residual <= 1e-9,
                  c.name + ": reconstruction residual");
        if (extra == 0) {
          const Matrix planted = gb.plus.basis * g * gb.minus.basis.adjoint();
          h.require(spectral_norm(graph_map_matrix(dec) - planted) <=
                        1e-10 * (1.0 + spectral_norm(planted)),
                    c.name + ": planted g recovery");
        }
        // Adjoint-condition identity via the double annihilator.
        const AdjointCondition adj =
            adjoint_condition(b, Matrix::Identity(c.op.fiber_dim(),
                                                  c.op.fiber_dim()),
                              c.op.fiber_dim());
        const AdjointCondition back = adjoint_condition(
            adj.sigma0_star_b_star,
            Matrix::Identity(c.op.fiber_dim(), c.op.fiber_dim()),
            c.op.fiber_dim());
        h.require(subspace_gap(back.sigma0_star_b_star, b) <= 1e-9,
                  c.name + ": double annihilator round trip");
        h.require(dec.adjoint_reconstruction_residual <= 1e-9,
                  c.name + ": adjoint-side graph reconstruction");
      }
    }
    h.finish("boundary conditions: APS and planted graphs, predicted "
             "indices, reconstruction and adjoint identities",
             seconds_since(t0));
  }

  // ---------------------------------------------------------------- C10
  {
    h.begin(10);
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(1010);
    auto random_projector = [&rng](Index n, Index p) {
      while (true) {
        const Matrix x = rng.cgaussian_matrix(n, p);
        const Matrix y = rng.cgaussian_matrix(n, p);
        const Matrix gram = y.adjoint() * x;
        if (std::abs(gram.determinant()) < 1e-3) continue;
        return Matrix(x * gram.inverse() * y.adjoint());
      }
    };
    int disagreements = 0, ambiguous = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      const Index n = 2 + trial % 7;
      const Matrix p = random_projector(n, 1 + trial % n);
      const Matrix q = random_projector(n, 1 + (trial / 3) % n);
      const ProjDiffReport rep = projdiff_check(p, q);
      if (rep.ambiguous) {
        ++ambiguous;
        continue;
      }
      if (!rep.consistent) ++disagreements;
    }
    h.require(disagreements == 0,
              std::to_string(disagreements) + " disagreements");

    // The explicit counterexample pair.
    Matrix p(2, 2), q(2, 2);
    p << 1, 1, 0, 0;
    q << 1, 0, 0, 0;
    const ProjDiffReport rep = projdiff_check(p, q);
    h.require(rep.smin_p_on_ker_q > 0.5, "P|ker Q should be iso");
    h.require(rep.smin_pstar_on_ker_qstar < 1e-12,
              "P*|ker Q* should fail");
    h.require(!rep.difference_invertible, "P - Q should be singular");
    h.require(rep.consistent, "criteria must agree on the counterexample");
    h.finish("projector-difference lemma: equivalences on 10^3 random pairs "
             "plus the explicit counterexample",
             seconds_since(t0));
  }

  std::printf("%s: %d of 10 criteria passed\n",
              h.failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL",
              10 - h.failures);
  return h.failures;
}
