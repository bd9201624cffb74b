// Command-line front end: load operators and boundary conditions, run the
// spectral analyses, and emit CSV/JSON results.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "specbvp/io.hpp"
#include "specbvp/models.hpp"

namespace {

using namespace specbvp;
namespace fs = std::filesystem;

constexpr const char* kVersion = "0.1.0";

struct Options {
  std::string op_file;
  std::string example;
  double alpha = 1.0;
  int modes = 16;
  std::string cut = "auto";
  std::string cut2;
  double rho = 1.0;
  int grid_steps = 256;
  double tol_rank = 64.0;
  std::uint64_t seed = 2024;
  std::string out_dir = ".";
  int threads = 1;
  std::string bc_file;
  std::string problem_file;
  bool dump_matrix = false;

  std::string canonical() const {
    Json j;
    j["op"] = op_file;
    j["example"] = example;
    j["alpha"] = alpha;
    j["modes"] = modes;
    j["cut"] = cut;
    j["cut2"] = cut2;
    j["rho"] = rho;
    j["grid"] = grid_steps;
    j["tol_rank"] = tol_rank;
    j["seed"] = seed;
    j["threads"] = threads;
    j["bc"] = bc_file;
    j["problem"] = problem_file;
    return j.dump();
  }
};

struct Loaded {
  OperatorData data;
  FourierOperator op;
  std::optional<BoundaryModel> model;  // set when built from an example
};

Loaded load_operator(const Options& opt) {
  Loaded l;
  if (!opt.example.empty()) {
    l.model = model_by_name(opt.example, opt.alpha);
    l.data = l.model->operator_data;
  } else if (!opt.op_file.empty()) {
    l.data = operator_data_from_json(read_json_file(opt.op_file));
  } else {
    throw Error(ErrorCode::InvalidArgument,
                "one of --example or --op is required");
  }
  l.op = assemble(l.data, opt.modes);
  if (l.op.dim() == 0)
    throw Error(ErrorCode::InvalidArgument, "operator has no modes");
  return l;
}

SpectralCut resolve_cut(const FourierOperator& op, const std::string& text,
                        const Tolerances& tol) {
  if (text != "auto") {
    const double r = std::stod(text);
    // Margin from the actual spectrum.
    double eps = std::numeric_limits<double>::infinity();
    for (const Complex z : spectrum(op))
      eps = std::min(eps, std::abs(z.real() - r));
    if (!(eps > 0.0))
      throw Error(ErrorCode::CutHitsSpectrum, "cut passes through Re spec(A)");
    return {r, eps};
  }
  const auto evs = spectrum(op);
  double lo = 0.0, hi = 0.0;
  for (const Complex z : evs) {
    lo = std::min(lo, z.real());
    hi = std::max(hi, z.real());
  }
  const auto cuts = find_cuts(op, lo - 1.0, hi + 1.0, tol);
  // Deterministic pick: widest margin, then smallest |r|, then smallest r.
  SpectralCut best = cuts.front();
  for (const auto& c : cuts) {
    if (c.epsilon > best.epsilon + 1e-12 ||
        (std::abs(c.epsilon - best.epsilon) <= 1e-12 &&
         (std::abs(c.r) < std::abs(best.r) - 1e-12 ||
          (std::abs(std::abs(c.r) - std::abs(best.r)) <= 1e-12 &&
           c.r < best.r))))
      best = c;
  }
  return best;
}

Json base_header(const Options& opt, const std::string& command) {
  Json h;
  h["tool"] = "specbvp";
  h["version"] = kVersion;
  h["command"] = command;
  h["config_hash"] = config_hash(opt.canonical());
  h["seed"] = opt.seed;
  h["modes"] = opt.modes;
  return h;
}

std::string out_path(const Options& opt, const std::string& name) {
  fs::create_directories(opt.out_dir);
  return (fs::path(opt.out_dir) / name).string();
}

Tolerances make_tol(const Options& opt) {
  Tolerances tol;
  tol.rank_factor = opt.tol_rank;
  return tol;
}

void cmd_spectrum(const Options& opt) {
  const Loaded l = load_operator(opt);
  const Tolerances tol = make_tol(opt);
  Json header = base_header(opt, "spectrum");

  std::vector<std::vector<double>> rows;
  const std::vector<Matrix>& blocks =
      l.op.block_diagonal() ? l.op.blocks : std::vector<Matrix>{l.op.dense};
  for (std::size_t p = 0; p < blocks.size(); ++p) {
    const EigStructure es = eig_structure(blocks[p], tol);
    const ModeIndex k = l.op.block_diagonal() ? l.op.modes[p] : ModeIndex{};
    for (const auto& c : es.clusters)
      rows.push_back({static_cast<double>(k.k1), static_cast<double>(k.k2),
                      c.lambda.real(), c.lambda.imag(),
                      static_cast<double>(c.algebraic),
                      static_cast<double>(c.geometric)});
  }
  write_csv(out_path(opt, "spectrum.csv"), header,
            {"k1", "k2", "re", "im", "alg_mult", "geom_mult"}, rows);

  // Bisector report of the principal symbol.
  SymbolField sigma;
  sigma.fiber_dim = l.data.fiber_dim;
  sigma.base_dim = l.data.base.base_dim();
  sigma.base = l.data.base;
  sigma.directions = l.data.first_order;
  for (int d = 0; d < sigma.base_dim; ++d)
    sigma.direction_names.push_back(d == 0 ? "dx1" : "dx2");
  Json bis;
  try {
    const BisectorReport rep =
        bisector_angle(sigma, default_cosphere_grid(sigma), tol);
    bis["nu"] = rep.nu;
    bis["min_real_gap"] = rep.min_real_gap;
    bis["samples"] = rep.samples.size();
  } catch (const Error& e) {
    bis["error"] = error_code_name(e.code());
    bis["message"] = e.what();
  }
  bis["header"] = header;
  write_json(out_path(opt, "bisector.json"), bis);

  if (opt.dump_matrix)
    write_matrix_csv(out_path(opt, "operator_matrix.csv"), header,
                     dense_matrix(l.op));
}

void cmd_projector(const Options& opt) {
  const Loaded l = load_operator(opt);
  const Tolerances tol = make_tol(opt);
  const SpectralCut cut = resolve_cut(l.op, opt.cut, tol);
  const SpectralSplit split =
      spectral_split_oracle(l.op, cut, tol, opt.threads);
  const ContourProjector contour =
      spectral_split_contour(l.op, cut, {}, tol, opt.threads);

  double deviation = 0.0, idem = 0.0, comm = 0.0;
  int rank = 0;
  for (int b = 0; b < split.nblocks(); ++b) {
    const auto bi = static_cast<size_t>(b);
    deviation = std::max(
        deviation, spectral_norm(contour.chi_plus[bi] - split.chi_plus[bi]));
    idem = std::max(idem, spectral_norm(split.chi_plus[bi] *
                                            split.chi_plus[bi] -
                                        split.chi_plus[bi]));
    comm = std::max(comm,
                    spectral_norm(split.chi_plus[bi] * split.a_r[bi] -
                                  split.a_r[bi] * split.chi_plus[bi]));
    Eigen::JacobiSVD<Matrix> svd(split.chi_plus[bi]);
    rank += static_cast<int>(rank_decision(svd.singularValues(), tol).rank);
  }
  const AdjointConsistencyReport adj =
      adjoint_split_consistency(l.op, cut, 1e-8, tol);

  Json j;
  j["header"] = base_header(opt, "projector");
  j["cut"] = {{"r", cut.r}, {"epsilon", cut.epsilon}};
  j["chi_plus_rank"] = rank;
  j["dim"] = split.dim();
  j["oracle_vs_contour"] = deviation;
  j["contour"] = {{"truncation_h", contour.truncation_h},
                  {"truncation_estimate", contour.truncation_estimate},
                  {"nodes", contour.nodes_used},
                  {"worst_resolvent_condition",
                   contour.worst_resolvent_condition}};
  j["idempotence_residual"] = idem;
  j["commutation_residual"] = comm;
  j["omega_r"] = split.omega_r;
  j["envelope"] = {{"omega", split.envelope_omega}, {"R", split.envelope_R}};
  j["operator_modulus_equivalence"] = {{"lower", split.opsect_lower},
                                       {"upper", split.opsect_upper}};
  j["adjoint_consistency"] = {
      {"projector_deviation", adj.projector_deviation},
      {"modulus_deviation", adj.modulus_deviation},
      {"restriction_smin_plus", adj.restriction_smin_plus},
      {"restriction_smin_minus", adj.restriction_smin_minus},
      {"pass", adj.pass}};
  write_json(out_path(opt, "projector_report.json"), j);

  // Bisectoriality certificate table: |zeta| ||(zeta - A_r)^{-1}|| along the
  // rays of a sector strictly outside omega_r.
  const double mu = 0.5 * (split.omega_r + pi / 2.0);
  double min_mod = std::numeric_limits<double>::infinity(), max_mod = 0.0;
  for (const auto& es : split.eigendata)
    for (const auto& c : es.clusters) {
      min_mod = std::min(min_mod, std::abs(c.lambda));
      max_mod = std::max(max_mod, std::abs(c.lambda));
    }
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 24; ++i) {
    const double rho_s =
        0.1 * min_mod *
        std::pow(100.0 * max_mod / min_mod, static_cast<double>(i) / 23);
    for (const double ang : {mu, -mu, pi - mu, pi + mu}) {
      const Complex zeta = std::polar(rho_s, ang);
      double rnorm = 0.0;
      for (const auto& ar : split.a_r) {
        const Matrix eye = Matrix::Identity(ar.rows(), ar.cols());
        rnorm = std::max(rnorm, spectral_norm(
                                    (zeta * eye - ar).partialPivLu().solve(eye)));
      }
      rows.push_back({zeta.real(), zeta.imag(), rho_s * rnorm});
    }
  }
  Json rhead = base_header(opt, "projector");
  rhead["mu"] = mu;
  rhead["cut"] = cut.r;
  write_csv(out_path(opt, "resolvent_bound.csv"), rhead,
            {"re_zeta", "im_zeta", "scaled_resolvent_norm"}, rows);
}

void cmd_checkspace(const Options& opt) {
  const Loaded l = load_operator(opt);
  const Tolerances tol = make_tol(opt);
  if (opt.cut == "auto" || opt.cut2.empty())
    throw Error(ErrorCode::InvalidArgument,
                "checkspace requires explicit --cut and --cut2");
  const double r = std::stod(opt.cut);
  const double q = std::stod(opt.cut2);
  const CutIndependenceReport rep =
      cut_independence_report(l.op, r, q, 1000, opt.seed, tol);

  Json header = base_header(opt, "checkspace");
  header["cut_r"] = r;
  header["cut_q"] = q;
  header["cross_rank"] = rep.cross_rank;
  header["strip_count"] = rep.strip_count;
  header["predicted_lower"] = rep.predicted_lower;
  header["predicted_upper"] = rep.predicted_upper;
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < rep.samples.size(); ++i)
    rows.push_back({static_cast<double>(i), rep.samples[i].norm_r,
                    rep.samples[i].norm_q, rep.samples[i].ratio});
  write_csv(out_path(opt, "checkspace.csv"), header,
            {"sample", "norm_r", "norm_q", "ratio"}, rows);
}

void cmd_bc_check(const Options& opt) {
  const Loaded l = load_operator(opt);
  const Tolerances tol = make_tol(opt);
  if (opt.bc_file.empty())
    throw Error(ErrorCode::InvalidArgument, "--bc FILE is required");
  const SpectralCut cut = resolve_cut(l.op, opt.cut, tol);
  const SpectralSplit split =
      spectral_split_oracle(l.op, cut, tol, opt.threads);
  const SpectralSplit split_star =
      spectral_split_oracle(adjoint(l.op), cut, tol, opt.threads);
  const Subspace b =
      boundary_condition_from_json(read_json_file(opt.bc_file), split, tol);

  Json j;
  j["header"] = base_header(opt, "bc-check");
  j["cut"] = {{"r", cut.r}, {"epsilon", cut.epsilon}};
  j["dim_b"] = b.dim();

  const FpDecompositionReport fp =
      fp_decomposition_check(b, split, split_star, tol);
  j["fredholm_pairs"] = {
      {"plus",
       {{"intersection", fp.pair_plus.dim_intersection},
        {"cokernel", fp.pair_plus.dim_cokernel},
        {"index", fp.pair_plus.index}}},
      {"minus",
       {{"intersection", fp.pair_minus.dim_intersection},
        {"cokernel", fp.pair_minus.dim_cokernel},
        {"index", fp.pair_minus.index}}},
      {"minus_h12_inner",
       {{"intersection", fp.pair_minus_h12_inner.dim_intersection},
        {"cokernel", fp.pair_minus_h12_inner.dim_cokernel},
        {"index", fp.pair_minus_h12_inner.index}}},
      {"index_antisymmetric", fp.index_antisymmetric},
      {"pass", fp.pass}};

  try {
    const EllipticDecomposition dec =
        extract_elliptic_decomposition(b, split, split_star, 1e-9, tol);
    j["elliptic_decomposition"] = {
        {"dim_w_plus", dec.w_plus.dim()},
        {"dim_w_minus", dec.w_minus.dim()},
        {"dim_v_plus", dec.v_plus.dim()},
        {"dim_v_minus", dec.v_minus.dim()},
        {"g_norm_l2", spectral_norm(dec.g)},
        {"reconstruction_residual", dec.reconstruction_residual},
        {"adjoint_reconstruction_residual",
         dec.adjoint_reconstruction_residual}};
    const SemiregularityReport sr = semiregularity_check(dec, split, 1.0);
    j["semiregularity_s1"] = {{"g_norm", sr.g_norm},
                              {"graph_constant", sr.graph_constant},
                              {"w_plus_norm", sr.w_plus_norm}};
  } catch (const Error& e) {
    j["elliptic_decomposition"] = {{"error", error_code_name(e.code())},
                                   {"message", e.what()}};
  }

  const Matrix sigma0 = l.model ? l.model->sigma0
                                : Matrix(Matrix::Identity(l.data.fiber_dim,
                                                          l.data.fiber_dim));
  const AdjointCondition adj = adjoint_condition(b, sigma0, l.data.fiber_dim, tol);
  j["adjoint_condition"] = {{"dim", adj.sigma0_star_b_star.dim()}};
  write_json(out_path(opt, "bc_report.json"), j);
}

void cmd_solve(const Options& opt) {
  if (opt.problem_file.empty())
    throw Error(ErrorCode::InvalidArgument, "--problem FILE is required");
  const Json pj = read_json_file(opt.problem_file);
  Options local = opt;
  if (pj.contains("example")) local.example = pj["example"].get<std::string>();
  if (pj.contains("alpha")) local.alpha = pj["alpha"].get<double>();
  if (pj.contains("modes")) local.modes = pj["modes"].get<int>();
  Loaded l;
  if (pj.contains("operator")) {
    l.data = operator_data_from_json(pj["operator"]);
    l.op = assemble(l.data, local.modes);
  } else {
    l = load_operator(local);
  }
  const Tolerances tol = make_tol(opt);
  const std::string cut_text =
      pj.contains("cut") ? (pj["cut"].is_string()
                                ? pj["cut"].get<std::string>()
                                : format_double(pj["cut"].get<double>()))
                         : opt.cut;
  const SpectralCut cut = resolve_cut(l.op, cut_text, tol);
  const SpectralSplit split =
      spectral_split_oracle(l.op, cut, tol, opt.threads);

  CylinderProblem prob;
  prob.split = split;
  prob.sigma0 = l.model ? l.model->sigma0
                        : Matrix(Matrix::Identity(l.data.fiber_dim,
                                                  l.data.fiber_dim));
  if (pj.contains("sigma0")) prob.sigma0 = matrix_from_json(pj["sigma0"]);
  prob.grid.rho = pj.value("rho", opt.rho);
  prob.grid.steps = pj.value("grid", opt.grid_steps);
  prob.bc_left = pj.contains("bc_left")
                     ? boundary_condition_from_json(pj["bc_left"], split, tol)
                     : aps_condition(split, tol);
  if (pj.contains("bc_right")) {
    prob.bc_right = boundary_condition_from_json(pj["bc_right"], split, tol);
  } else {
    prob.bc_right = span_of(chi_plus_dense(split), 0.5, tol);
  }
  prob.source = source_from_json(pj.value("source", Json()), l.op, prob.grid);

  const SolveReport rep = solve_bvp(prob, tol);

  Json header = base_header(opt, "solve");
  header["cut"] = cut.r;
  header["rho"] = prob.grid.rho;
  header["grid"] = prob.grid.steps;
  std::vector<std::vector<double>> rows;
  for (int j = 0; j < prob.grid.nodes(); ++j) {
    for (std::size_t p = 0; p < l.op.modes.size(); ++p) {
      for (int f = 0; f < l.op.fiber_dim(); ++f) {
        const Complex v =
            rep.solution.values(l.op.mode_offset(p) + f, j);
        rows.push_back({prob.grid.t(j),
                        static_cast<double>(l.op.modes[p].k1),
                        static_cast<double>(l.op.modes[p].k2),
                        static_cast<double>(f), v.real(), v.imag()});
      }
    }
  }
  write_csv(out_path(opt, "solution.csv"), header,
            {"t", "k1", "k2", "fiber", "re", "im"}, rows);

  Json j;
  j["header"] = header;
  j["residual"] = rep.residual;
  j["smin"] = rep.smin;
  j["kernel_dim"] = rep.kernel_dim;
  j["cokernel_dim"] = rep.cokernel_dim;
  j["singular"] = rep.singular;
  write_json(out_path(opt, "solve_report.json"), j);
}

void cmd_index(const Options& opt) {
  const Loaded l = load_operator(opt);
  const Tolerances tol = make_tol(opt);
  if (opt.cut == "auto" || opt.cut2.empty())
    throw Error(ErrorCode::InvalidArgument,
                "index requires explicit --cut and --cut2");
  const double r = std::stod(opt.cut);
  const double r2 = std::stod(opt.cut2);
  const IndexReport rep = index_strip(l.op, r, r2, opt.rho,
                                      std::min(opt.grid_steps, 64), tol);
  Json j;
  j["header"] = base_header(opt, "index");
  j["r"] = r;
  j["r2"] = r2;
  j["index"] = rep.index_discrete;
  j["discrete"] = {{"kernel", rep.kernel_discrete},
                   {"cokernel", rep.cokernel_discrete}};
  j["oracle"] = {{"kernel", rep.kernel_oracle},
                 {"cokernel", rep.cokernel_oracle}};
  j["strip_count"] = rep.strip;
  j["agree"] = rep.agree;
  write_json(out_path(opt, "index.json"), j);
  std::cout << rep.index_discrete << "\n";
}

void cmd_example(const Options& opt) {
  Options local = opt;
  if (local.example.empty())
    throw Error(ErrorCode::InvalidArgument, "example name required");
  cmd_spectrum(local);
  // Golden spectra live under a name that identifies the example.
  fs::rename(out_path(opt, "spectrum.csv"),
             out_path(opt, local.example + "-spectrum.csv"));
  fs::rename(out_path(opt, "bisector.json"),
             out_path(opt, local.example + "-bisector.json"));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral boundary value problems for first-order elliptic "
               "operators with non-selfadjoint adapted boundary operators"};
  app.require_subcommand(1);

  Options opt;
  app.add_option("--op", opt.op_file, "operator JSON file");
  app.add_option("--example", opt.example,
                 "built-in example: nondiag | tilted-dirac | rarita-schwinger");
  app.add_option("--alpha", opt.alpha, "tilt parameter for tilted-dirac");
  app.add_option("--modes", opt.modes, "Fourier cutoff N");
  app.add_option("--cut", opt.cut, "spectral cut r or 'auto'");
  app.add_option("--cut2", opt.cut2, "second cut r'");
  app.add_option("--rho", opt.rho, "cylinder length");
  app.add_option("--grid", opt.grid_steps, "time steps J");
  app.add_option("--tol-rank", opt.tol_rank, "rank tolerance factor");
  app.add_option("--seed", opt.seed, "random seed");
  app.add_option("--out", opt.out_dir, "output directory");
  app.add_option("--threads", opt.threads, "worker threads");
  app.add_option("--bc", opt.bc_file, "boundary condition JSON file");
  app.add_option("--problem", opt.problem_file, "problem JSON file");
  app.add_flag("--dump-matrix", opt.dump_matrix,
               "also write the assembled matrix as CSV (spectrum command)");

  auto* spectrum_cmd =
      app.add_subcommand("spectrum", "per-mode eigenvalues and multiplicities");
  auto* projector_cmd = app.add_subcommand(
      "projector", "spectral projectors: oracle vs contour, adjoint checks");
  auto* checkspace_cmd =
      app.add_subcommand("checkspace", "check-norm cut independence");
  auto* bc_cmd =
      app.add_subcommand("bc-check", "boundary condition analysis");
  auto* solve_cmd = app.add_subcommand("solve", "model BVP on the cylinder");
  auto* index_cmd = app.add_subcommand("index", "strip index, two methods");
  auto* example_cmd =
      app.add_subcommand("example", "regenerate golden files for an example");
  for (auto* sub : {spectrum_cmd, projector_cmd, checkspace_cmd, bc_cmd,
                    solve_cmd, index_cmd, example_cmd})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    Json err;
    err["error"] = "Usage";
    err["message"] = e.what();
    std::cerr << err.dump() << "\n";
    return 2;
  }

  try {
    if (spectrum_cmd->parsed()) cmd_spectrum(opt);
    if (projector_cmd->parsed()) cmd_projector(opt);
    if (checkspace_cmd->parsed()) cmd_checkspace(opt);
    if (bc_cmd->parsed()) cmd_bc_check(opt);
    if (solve_cmd->parsed()) cmd_solve(opt);
    if (index_cmd->parsed()) cmd_index(opt);
    if (example_cmd->parsed()) cmd_example(opt);
  } catch (const Error& e) {
    Json err;
    err["error"] = error_code_name(e.code());
    err["message"] = e.what();
    std::cerr << err.dump() << "\n";
    switch (e.code()) {
      case ErrorCode::AmbiguousRank:
      case ErrorCode::MethodDisagreement:
      case ErrorCode::ClusterAmbiguity:
        return 3;
      case ErrorCode::IoFailure:
        return 4;
      case ErrorCode::InvalidArgument:
        return 2;
      default:
        return 1;
    }
  } catch (const std::exception& e) {
    Json err;
    err["error"] = "Internal";
    err["message"] = e.what();
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return 0;
}
