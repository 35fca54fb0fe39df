#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "hypdyn/io.hpp"

using namespace hypdyn;
namespace fs = std::filesystem;

namespace {

const std::string kCli = HYPDYN_CLI_PATH;
const std::string kSpecs = HYPDYN_SPEC_DIR;

int run_cli(const std::string& args) {
  std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("hypdyn_test_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_SUITE_BEGIN("io");

TEST_CASE("shipped specs parse into the expected towers") {
  LoadedSpec r1 = load_tower_spec(kSpecs + "/row1_scaling_half.json");
  CHECK(r1.kind == LoadedSpec::Kind::tower);
  CHECK(r1.tower.surface_at(0).kind() == SurfaceKind::disc);
  CHECK(r1.tower.map_at(0).family() == MapElement::Family::scaling);
  CHECK(r1.tower.horizon == 64);
  CHECK(r1.tower.tracked_pairs.size() == 1);

  LoadedSpec r3 = load_tower_spec(kSpecs + "/row3_compressed_annulus.json");
  CHECK(r3.tower.surface_at(0).kind() == SurfaceKind::round_annulus);
  CHECK(r3.tower.surface_at(0).log_inv_inner_radius() == doctest::Approx(2 * kPi));
  // compressed: the level-1 annulus is strictly deeper than the pure square
  CHECK(r3.tower.surface_at(1).log_inv_inner_radius() > 2 * (2 * kPi));

  LoadedSpec r5 = load_tower_spec(kSpecs + "/row5_blaschke_model.json");
  CHECK(r5.kind == LoadedSpec::Kind::blaschke_model);
  CHECK(r5.model_levels == 6);

  LoadedSpec r6 = load_tower_spec(kSpecs + "/row6_power_annulus.json");
  CHECK(r6.tower.surface_at(2).log_inv_inner_radius() ==
        doctest::Approx(4 * (2 * kPi)).epsilon(1e-12));

  CHECK_THROWS(load_tower_spec(kSpecs + "/no_such_file.json"));
}

TEST_CASE("trace CSV shape and determinism") {
  TowerSpec t = towers::scaling(Complex(0.5, 0.0), Complex(0.1, 0.0), 4);
  t.tracked_pairs = {{Complex(0.0), Complex(0.5, 0.0)}};
  OrbitTrace tr = iterate_trace(t);
  std::string csv = trace_csv(tr);
  CHECK(csv.substr(0, csv.find('\n')) == "n,base_re,base_im,lambda,delta,dist_pair_0");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);  // header + 5 levels
  CHECK(csv == trace_csv(iterate_trace(t)));
  CHECK(csv.find("inf") != std::string::npos);  // disc levels have delta = inf
}

TEST_CASE("verdict reports are deterministic and carry the tolerances") {
  Tolerances tol;
  SixTypeVerdict v = main_type(towers::scaling(Complex(0.5, 0.0), Complex(0.0), 32), tol);
  Json a = verdict_json(v, tol);
  Json b = verdict_json(main_type(towers::scaling(Complex(0.5, 0.0), Complex(0.0), 32), tol), tol);
  CHECK(a.dump() == b.dump());
  CHECK(a["schema"] == "hypdyn/1");
  CHECK(a["row"] == 1);
  CHECK(a["tolerances"]["tol_zero"] == tol.tol_zero);
  std::string dumped = a.dump();
  CHECK(dumped.find("\"schema\"") < dumped.find("\"row\""));  // field order is fixed
}

TEST_CASE("tolerance ordering is enforced") {
  Tolerances bad;
  bad.tol_zero = 1e-10;  // below tol_const
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("cli: trace command emits CSV and JSON") {
  TempDir tmp;
  int rc = run_cli("trace --tower " + kSpecs + "/row1_scaling_half.json --horizon 8 --out " +
                   tmp.path.string());
  CHECK(rc == 0);
  std::string csv = slurp(tmp.path / "scaling_half.trace.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 10);
  CHECK(fs::exists(tmp.path / "scaling_half.trace.json"));

  // horizon 0: header plus the level-0 row
  TempDir tmp0;
  rc = run_cli("trace --tower " + kSpecs + "/row1_scaling_half.json --horizon 0 --out " +
               tmp0.path.string());
  CHECK(rc == 0);
  std::string csv0 = slurp(tmp0.path / "scaling_half.trace.csv");
  CHECK(std::count(csv0.begin(), csv0.end(), '\n') == 2);
}

TEST_CASE("cli: exit codes for input and precondition failures") {
  CHECK(run_cli("trace --tower /nonexistent/path.json") == 2);
  CHECK(run_cli("blaschke build --levels -3") == 2);
  TempDir tmp;
  // contracting tower: foliation extraction is a precondition violation
  CHECK(run_cli("foliation --tower " + kSpecs + "/row1_scaling_half.json --out " +
                tmp.path.string()) == 3);
}

TEST_CASE("cli: classify reports the expected rows deterministically") {
  TempDir tmp;
  CHECK(run_cli("classify --tower " + kSpecs + "/row1_scaling_half.json --out " +
                tmp.path.string()) == 0);
  Json r1 = Json::parse(slurp(tmp.path / "scaling_half.classify.json"));
  CHECK(r1["row"] == 1);

  CHECK(run_cli("classify --tower " + kSpecs + "/row6_power_annulus.json --out " +
                tmp.path.string()) == 0);
  std::string first = slurp(tmp.path / "power_annulus.classify.json");
  CHECK(run_cli("classify --tower " + kSpecs + "/row6_power_annulus.json --out " +
                tmp.path.string()) == 0);
  CHECK(first == slurp(tmp.path / "power_annulus.classify.json"));
  Json r6 = Json::parse(first);
  CHECK(r6["row"] == 6);
  CHECK(r6["modality"]["aggregate"] == "trimodal");
  CHECK(r6["discrepancies"].empty());
}

TEST_CASE("cli: foliation command writes leaves and an svg on request") {
  TempDir tmp;
  int rc = run_cli("foliation --tower " + kSpecs + "/row6_power_annulus.json --out " +
                   tmp.path.string() + " --emit json,svg");
  CHECK(rc == 0);
  CHECK(fs::exists(tmp.path / "power_annulus.foliation.json"));
  CHECK(fs::exists(tmp.path / "power_annulus.foliation.svg"));
  Json j = Json::parse(slurp(tmp.path / "power_annulus.foliation.json"));
  CHECK(j["foliations"].size() == 2);

  TempDir tmp2;
  rc = run_cli("foliation --tower " + kSpecs + "/row6_power_annulus.json --out " +
               tmp2.path.string() + " --emit json");
  CHECK(rc == 0);
  CHECK_FALSE(fs::exists(tmp2.path / "power_annulus.foliation.svg"));
}

TEST_SUITE_END();
