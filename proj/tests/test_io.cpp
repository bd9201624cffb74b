#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "specbvp/io.hpp"
#include "specbvp/models.hpp"
#include "test_helpers.hpp"

using namespace specbvp;

TEST_SUITE_BEGIN("io");

TEST_CASE("matrix json round trip") {
  Rng rng(1);
  const Matrix m = rng.cgaussian_matrix(3, 2);
  const Matrix back = matrix_from_json(matrix_to_json(m));
  CHECK((m - back).norm() == 0.0);
}

TEST_CASE("symbol json round trip preserves evaluation") {
  for (const auto& model :
       {nondiag_model(), tilted_dirac_model(0.7), rarita_schwinger_model()}) {
    const Json j = symbol_to_json(model.sigma_a);
    const SymbolField back = symbol_from_json(j);
    Rng rng(2);
    for (int trial = 0; trial < 4; ++trial) {
      RealVector x = RealVector::Zero(model.sigma_a.base_dim);
      RealVector xi(model.sigma_a.directions.size());
      for (Index i = 0; i < xi.size(); ++i) xi(i) = rng.gaussian();
      CHECK((model.sigma_a.eval(x, xi) - back.eval(x, xi)).norm() < 1e-14);
    }
  }
}

TEST_CASE("operator json round trip preserves the assembled blocks") {
  const BoundaryModel model = tilted_dirac_model(1.3);
  const OperatorData back =
      operator_data_from_json(operator_data_to_json(model.operator_data));
  const FourierOperator a = assemble(model.operator_data, 4);
  const FourierOperator b = assemble(back, 4);
  REQUIRE(a.blocks.size() == b.blocks.size());
  for (std::size_t p = 0; p < a.blocks.size(); ++p)
    CHECK((a.blocks[p] - b.blocks[p]).norm() == 0.0);
}

TEST_CASE("boundary conditions from json") {
  const BoundaryModel model = tilted_dirac_model(1.0);
  const FourierOperator a = assemble(model.operator_data, 2);
  const SpectralSplit split = spectral_split_oracle(a, {0.25, 0.25});

  const Subspace aps = boundary_condition_from_json({{"kind", "aps"}}, split);
  CHECK(subspace_gap(aps, aps_condition(split)) < 1e-12);

  const GraphConditionBases gb = graph_condition_bases(split);
  Rng rng(3);
  const Matrix g = 0.5 * rng.cgaussian_matrix(gb.plus.dim(), gb.minus.dim());
  Json jg;
  jg["kind"] = "graph";
  jg["g"] = matrix_to_json(g);
  const Subspace bg = boundary_condition_from_json(jg, split);
  CHECK(subspace_gap(bg, graph_condition(split, g)) < 1e-12);

  Json jb;
  jb["kind"] = "explicit_basis";
  jb["basis"] = matrix_to_json(aps.basis);
  const Subspace be = boundary_condition_from_json(jb, split);
  CHECK(subspace_gap(be, aps) < 1e-12);

  CHECK_THROWS_AS(boundary_condition_from_json({{"kind", "bogus"}}, split),
                  Error);
}

TEST_CASE("source table") {
  const FourierOperator a = build_tilted_dirac(1.0, 2);
  TimeGrid grid{1.0, 8};
  Json src = Json::array();
  src.push_back({{"mode", 1},
                 {"value", {{1.0, 0.0}, {0.0, -1.0}}},
                 {"omega", 2.0}});
  const CylinderField f = source_from_json(src, a, grid);
  const auto pos = a.mode_position({1, 0});
  for (int j = 0; j < grid.nodes(); ++j) {
    const Complex phase = std::exp(Complex(0, 2.0 * grid.t(j)));
    CHECK(std::abs(f.values(a.mode_offset(pos), j) - phase) < 1e-14);
    CHECK(std::abs(f.values(a.mode_offset(pos) + 1, j) -
                   Complex(0, -1) * phase) < 1e-14);
  }
}

TEST_CASE("csv output is byte identical across reruns") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "specbvp_io_test";
  fs::create_directories(dir);
  const std::string path = (dir / "table.csv").string();
  const Json header = {{"tool", "specbvp"}, {"seed", 7}};
  const std::vector<std::string> cols{"a", "b"};
  const std::vector<std::vector<double>> rows{{1.0, pi}, {-0.5, 1e-17}};
  write_csv(path, header, cols, rows);
  std::ifstream first(path);
  std::string contents1((std::istreambuf_iterator<char>(first)),
                        std::istreambuf_iterator<char>());
  write_csv(path, header, cols, rows);
  std::ifstream second(path);
  std::string contents2((std::istreambuf_iterator<char>(second)),
                        std::istreambuf_iterator<char>());
  CHECK(contents1 == contents2);
  CHECK(contents1.rfind("# {", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("config hash is stable and sensitive") {
  CHECK(config_hash("a") != config_hash("b"));
  CHECK(config_hash("same") == config_hash("same"));
}

TEST_SUITE_END();
