// End-to-end checks of the krflab binary: exit codes, printed reports, artifacts.
#include <catch_amalgamated.hpp>
#include <json.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

Run krflab(const std::string& args) {
  std::string cmd = std::string(KRFLAB_BINARY) + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, p)) out.append(buf, n);
  int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string sample(const std::string& name) { return std::string(KRFLAB_SAMPLES) + "/" + name; }

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("krflab_test_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool contains(const std::string& s, const std::string& what) { return s.find(what) != std::string::npos; }

}  // namespace

TEST_CASE("usage errors exit with 2", "[cli]") {
  CHECK(krflab("").code == 2);
  CHECK(krflab("frobnicate").code == 2);
  CHECK(krflab("--format xml models").code == 2);
  CHECK(krflab("maxtime p1xp1").code == 2);
  CHECK(krflab("maxtime p1xp1 1,2,3").code == 2);
  CHECK(krflab("ansatz round-p1 -1").code == 2);
  CHECK(krflab("--help").code == 0);
}

TEST_CASE("models lists the built-in catalogue", "[cli]") {
  auto r = krflab("models --json");
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["models"].size() == 6);
  CHECK(krflab("models --name nope").code == 2);

  // JSON mode round-trips through the model schema.
  auto dir = scratch("models");
  fs::create_directories(dir);
  std::ofstream(dir / "cat.json") << r.out;
  auto again = krflab("models --json --models " + (dir / "cat.json").string());
  REQUIRE(again.code == 0);
  CHECK(nlohmann::json::parse(again.out) == j);
}

TEST_CASE("maxtime reports", "[cli]") {
  auto bl = krflab("maxtime blowup-p2 4,-1");
  REQUIRE(bl.code == 0);
  CHECK(contains(bl.out, "T = 1  (exact)"));
  CHECK(contains(bl.out, "limiting class: (1, 0)"));
  CHECK(contains(bl.out, "noncollapsed"));
  CHECK(contains(bl.out, "null locus:     E "));

  auto scaled = krflab("maxtime blowup-p2 8,-2");
  CHECK(contains(scaled.out, "T = 2  (exact)"));
  CHECK(contains(scaled.out, "limiting class: (2, 0)"));

  auto torus = krflab("maxtime torus:1 3/7");
  REQUIRE(torus.code == 0);
  CHECK(contains(torus.out, "T = infinity"));
  CHECK(contains(torus.out, "CalabiYau"));

  auto bad = krflab("maxtime p1xp1 1,-1");
  CHECK(bad.code == 3);
  CHECK(contains(bad.out, "lambda2>0"));

  auto dir = scratch("maxtime");
  REQUIRE(krflab("--output-dir " + dir.string() + " maxtime riemann-surface:0 5/3").code == 0);
  auto j = nlohmann::json::parse(slurp(dir / "maxtime.json"));
  CHECK(j["T"] == "5/6");
  CHECK(fs::exists(dir / "manifest.json"));
}

TEST_CASE("flow runs write series, field and manifest", "[cli]") {
  auto dir = scratch("stationary");
  auto r = krflab("--output-dir " + dir.string() + " flow " + sample("flow_stationary.json"));
  REQUIRE(r.code == 0);
  CHECK_FALSE(contains(r.out, "FAIL"));
  CHECK(contains(r.out, "PASS  inf_R_floor"));
  for (const char* f : {"series.csv", "phi.bin", "phi.json", "manifest.json"}) CHECK(fs::exists(dir / f));
  CHECK(slurp(dir / "series.csv").rfind("t,sup_phi,sup_phidot,min_eig,inf_R,sup_R,sup_trace,volume,energy\n", 0) == 0);
  CHECK(fs::file_size(dir / "phi.bin") == 32 * 32 * sizeof(double));
  auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(m["command"] == "flow");
  CHECK(m["schema"] == 1);

  auto jdir = scratch("stationary_json");
  REQUIRE(krflab("--format json --output-dir " + jdir.string() + " flow " + sample("flow_stationary.json")).code == 0);
  auto series = nlohmann::json::parse(slurp(jdir / "series.json"));
  CHECK(series["columns"].size() == 9);
}

TEST_CASE("flow output is deterministic", "[cli]") {
  auto a = scratch("det_a"), b = scratch("det_b");
  REQUIRE(krflab("--output-dir " + a.string() + " flow " + sample("flow_corrupted_omega.json")).code == 0);
  REQUIRE(krflab("--output-dir " + b.string() + " flow " + sample("flow_corrupted_omega.json")).code == 0);
  CHECK(slurp(a / "series.csv") == slurp(b / "series.csv"));
  CHECK(slurp(a / "phi.bin") == slurp(b / "phi.bin"));
}

TEST_CASE("corrupted volume form warns", "[cli]") {
  auto r = krflab("--output-dir " + scratch("corrupted").string() + " flow " + sample("flow_corrupted_omega.json"));
  CHECK(r.code == 0);
  CHECK(contains(r.out, "warning: mean(f) = 0.1 != 0"));
  CHECK(contains(r.out, "volumes drift"));
}

TEST_CASE("normalized perturbation prints the convergence line", "[cli]") {
  auto r = krflab("--output-dir " + scratch("cy").string() + " flow " + sample("flow_cy_perturbation.json"));
  REQUIRE(r.code == 0);
  CHECK(contains(r.out, "convergence: converged"));
  CHECK(contains(r.out, "fitted rate mu = 1"));
  CHECK(contains(r.out, "linearized rate = 1"));
}

TEST_CASE("flow domain errors exit with 3", "[cli]") {
  auto dir = scratch("inadmissible");
  fs::create_directories(dir);
  std::ofstream(dir / "cfg.json") << R"({"schema": 1, "n": 1, "N": 16, "g0": 1.0,
    "phi0": [{"k": [1, 0], "cos": 1.0}], "mode": "unnormalized", "t_end": 0.1})";
  auto r = krflab("--output-dir " + dir.string() + " flow " + (dir / "cfg.json").string());
  CHECK(r.code == 3);
}

TEST_CASE("ansatz commands", "[cli]") {
  auto dir = scratch("ansatz");
  auto r = krflab("--output-dir " + dir.string() + " ansatz round-p1 1");
  REQUIRE(r.code == 0);
  CHECK(contains(r.out, "extinction time (exact): 1/2"));
  CHECK(fs::exists(dir / "trajectory.csv"));

  auto ec = krflab("--output-dir " + dir.string() + " ansatz product-ec 1,3 --mode normalized --t-end 4");
  REQUIRE(ec.code == 0);
  CHECK(contains(ec.out, "Einstein residual"));
  CHECK(contains(slurp(dir / "trajectory.csv"), "einstein_residual"));
}

TEST_CASE("gh commands", "[cli]") {
  auto dir = scratch("gh");
  auto r = krflab("--output-dir " + dir.string() + " gh collapse --nb 8 --nf 8");
  REQUIRE(r.code == 0);
  CHECK(contains(r.out, "nonincreasing"));
  CHECK(slurp(dir / "collapse.csv").rfind("t,epsilon,flag\n", 0) == 0);

  auto x = scratch("gh_x"), y = scratch("gh_y");
  REQUIRE(krflab("--output-dir " + x.string() + " gh sample --t 0 --nb 4 --nf 1").code == 0);
  REQUIRE(krflab("--output-dir " + y.string() + " gh sample --t 0 --nb 4 --nf 1").code == 0);
  auto d = krflab("gh distance " + (x / "space.json").string() + " " + (y / "space.json").string());
  CHECK(d.code == 0);
  CHECK(contains(d.out, "epsilon = 0  (exact"));
  auto h = krflab("gh distance --exhaustive-limit 0 " + (x / "space.json").string() + " " + (y / "space.json").string());
  CHECK(contains(h.out, "upper bound only"));
}

TEST_CASE("verify passes at N = 16 and catches a tensor typo", "[cli][verify]") {
  auto ok = krflab("verify --grid 16");
  CHECK(ok.code == 0);
  CHECK(contains(ok.out, "8/8 criteria passed"));

  auto bad = krflab("verify --grid 16 --models " + sample("models_tensor_typo.json"));
  CHECK(bad.code == 4);
  CHECK(contains(bad.out, "FAIL 1  cohomology exactness"));

  auto clean = krflab("verify --grid 16 --models " + sample("models.json"));
  CHECK(clean.code == 0);
}
