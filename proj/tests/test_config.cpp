#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "tubespec/error.hpp"
#include "tubespec/pipeline.hpp"
#include "tubespec/report.hpp"

using namespace tubespec;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(const std::string& text) {
  std::stringstream ss(text);
  try {
    parse_config(ss);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "accepted: " << text;
  return ErrorKind::Numerical;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tubespec_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Config, DefaultFileParses) {
  const RunConfig c = load_config(TUBESPEC_SOURCE_DIR "/configs/default.cfg");
  EXPECT_EQ(c.R0, 2.0);
  EXPECT_EQ(c.eps.size(), 5u);
  EXPECT_EQ(c.eps[2], 0.1);
  EXPECT_EQ(c.order, ElementOrder::P2);
  EXPECT_EQ(c.branches, (std::vector<int>{1, 2}));
  EXPECT_EQ(c.R_grid, (std::vector<double>{4, 8, 16, 32}));
  EXPECT_EQ(c.solver.tol, 1e-10);
}

TEST(Config, EmptyFileGivesDefaults) {
  std::stringstream ss("");
  const RunConfig c = parse_config(ss);
  EXPECT_EQ(c.h_far, RunConfig{}.h_far);
  EXPECT_EQ(c.output_dir, "out");
}

TEST(Config, RejectsBadInput) {
  EXPECT_EQ(kind_of("[mesh]\nh_coarse = 0.1\n"), ErrorKind::Config);
  EXPECT_EQ(kind_of("[plot]\ncolor = red\n"), ErrorKind::Config);
  EXPECT_EQ(kind_of("[solver]\nnum_eigs = 2\n[sweep]\nj = 3\n"), ErrorKind::Config);
  EXPECT_EQ(kind_of("[domain]\neps = 0.2, 0.1, 0.05\n"), ErrorKind::Config);
  EXPECT_EQ(kind_of("[domain]\neps = 0.5, 0.2, 0.1, 0.05\n"), ErrorKind::Config);
  EXPECT_EQ(kind_of("[mesh]\nh_far = fast\n"), ErrorKind::Config);
  EXPECT_EQ(kind_of("[mesh]\norder = P3\n"), ErrorKind::Config);
  EXPECT_EQ(kind_of("[exterior]\nR = 4, 8\n"), ErrorKind::Config);
  EXPECT_EQ(kind_of("[mesh\nh_far = 0.1\n"), ErrorKind::Parse);
}

TEST(Config, ErrorKindsMapToExitCodes) {
  EXPECT_EQ(Error(ErrorKind::Config, "").exit_code(), 2);
  EXPECT_EQ(Error(ErrorKind::Parse, "").exit_code(), 2);
  EXPECT_EQ(Error(ErrorKind::FitUnstable, "").exit_code(), 3);
  EXPECT_EQ(Error(ErrorKind::SimplicityViolated, "").exit_code(), 3);
}

TEST(Report, DoublesRoundTrip) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1e6, 1e6);
  for (int i = 0; i < 200; ++i) {
    const double x = U(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    EXPECT_EQ(std::stod(format_double(x)), x);
  }
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
}

TEST(Report, CsvLayout) {
  const fs::path dir = scratch("csv");
  fs::create_directories(dir);
  const std::string path = (dir / "t.csv").string();
  {
    CsvWriter w(path, {"a", "b"});
    w << 1 << 0.5;
    w.end_row();
    w << 2;
    EXPECT_THROW(w.end_row(), Error);
  }
  EXPECT_EQ(slurp(path).substr(0, 10), "a,b\n1,0.5\n");
  const Vector u = Vector::LinSpaced(7, -1, 2);
  write_field((dir / "u.field").string(), u);
  EXPECT_EQ(read_field((dir / "u.field").string()), u);
}

TEST(Pipeline, EpsLabels) {
  EXPECT_EQ(eps_label(0.1), "0.1");
  EXPECT_EQ(eps_label(0.07), "0.07");
  EXPECT_EQ(eps_label(8), "8");
}

TEST(Pipeline, MeshCommandIsDeterministic) {
  std::stringstream ss(
      "[mesh]\nh_far = 0.15\nh_junction_factor = 0.2\n"
      "[exterior]\nR = 4, 8, 16\nfar_slope = 0.15\nh_junction = 0.02\n");
  const RunConfig c = parse_config(ss);
  const fs::path a = scratch("mesh_a"), b = scratch("mesh_b");
  cmd_mesh(c, a.string());
  cmd_mesh(c, b.string());
  for (const char* f : {"omega.mesh", "omega_eps_0.1.mesh", "pi_R8.mesh", "manifest.json"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  // P2 meshes carry midpoint nodes
  const Mesh m = read_mesh((a / "omega.mesh").string());
  EXPECT_EQ(m.order, ElementOrder::P2);
  EXPECT_GT(m.num_dofs(), m.num_vertices());
}

TEST(Pipeline, BudgetErrorFromMeshCommand) {
  std::stringstream ss("[mesh]\nbudget = 10\n");
  const RunConfig c = parse_config(ss);
  try {
    cmd_mesh(c, scratch("budget").string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Budget);
  }
}
