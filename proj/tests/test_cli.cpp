#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

std::string binary() {
  const char* env = std::getenv("SCRAMBLESWAP_BIN");
  REQUIRE(env != nullptr);
  return env;
}

struct TempRoot {
  fs::path dir;
  TempRoot() {
    dir = fs::temp_directory_path() / ("scrambleswap_cli_test_" + std::to_string(::getpid()) +
                                       "_" + std::to_string(counter++));
    fs::create_directories(dir);
  }
  ~TempRoot() { fs::remove_all(dir); }
  static int counter;
};
int TempRoot::counter = 0;

int run(const std::string& args, const fs::path& out_root) {
  const std::string cmd = "SCRAMBLE_SWAP_OUT=" + out_root.string() + " " + binary() + " " + args +
                          " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::vector<fs::path> find_files(const fs::path& root, const std::string& name) {
  std::vector<fs::path> out;
  if (!fs::exists(root)) return out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file() && e.path().filename() == name) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

TEST_CASE("haar-bench emits rows and a manifest, deterministically") {
  TempRoot root;
  REQUIRE(run("haar-bench --da 2 --db 8,32,128 --draws 60 --seed 7", root.dir) == 0);
  auto csvs = find_files(root.dir, "data.csv");
  auto manifests = find_files(root.dir, "manifest.json");
  REQUIRE(csvs.size() == 1);
  REQUIRE(manifests.size() == 1);

  const std::string body = slurp(csvs[0]);
  CHECK(body.rfind("d_B,f_mc,f_se,f_theory,p_mc,p_se,p_theory", 0) == 0);
  CHECK(std::count(body.begin(), body.end(), '\n') == 4); // header + 3 rows

  // byte-identical on re-invocation
  TempRoot root2;
  REQUIRE(run("haar-bench --da 2 --db 8,32,128 --draws 60 --seed 7", root2.dir) == 0);
  auto csvs2 = find_files(root2.dir, "data.csv");
  REQUIRE(csvs2.size() == 1);
  CHECK(slurp(csvs[0]) == slurp(csvs2[0]));
}

TEST_CASE("rerun from a manifest reproduces the data byte-identically") {
  TempRoot root;
  REQUIRE(run("haar-bench --da 2 --db 16 --draws 40 --seed 9", root.dir) == 0);
  auto manifests = find_files(root.dir, "manifest.json");
  REQUIRE(manifests.size() == 1);
  TempRoot root2;
  REQUIRE(run("rerun " + manifests[0].string(), root2.dir) == 0);
  auto csvs1 = find_files(root.dir, "data.csv");
  auto csvs2 = find_files(root2.dir, "data.csv");
  REQUIRE(csvs1.size() == 1);
  REQUIRE(csvs2.size() == 1);
  CHECK(slurp(csvs1[0]) == slurp(csvs2[0]));
}

TEST_CASE("usage errors exit with code 2") {
  TempRoot root;
  CHECK(run("haar-bench --draws 0", root.dir) == 2);
  CHECK(run("nonexistent-subcommand", root.dir) == 2);
  CHECK(run("dicke trace --dt -1", root.dir) == 2);
  CHECK(run("", root.dir) == 2);
}

TEST_CASE("resource limits exit with code 3") {
  TempRoot root;
  // paper-scale windows at long times are gated behind --long
  CHECK(run("dicke scan --n 4 --alpha 30 --window-sigmas 18 --delta-grid 0.05:1:8 "
            "--omegaz-grid 0.5:5:8 --tmin 700 --tmax 850 --tsamples 4 --states 2 --jobs 1",
            root.dir) == 3);
  // tail budget violation reports the suggested window
  CHECK(run("dicke trace --n 2 --alpha 3 --fock-min 0 --fock-max 3 --tmax 1 --dt 0.5 "
            "--states 1 --tail-budget 1e-6",
            root.dir) == 3);
}

TEST_CASE("dicke trace emits the documented schema") {
  TempRoot root;
  REQUIRE(run("dicke trace --n 2 --alpha 1.5 --fock-min 0 --fock-max 17 --delta 0.7 "
              "--omegaz 1.3 --tmax 1.5 --dt 0.5 --states 2 --seed 3",
              root.dir) == 0);
  auto csvs = find_files(root.dir, "data.csv");
  REQUIRE(csvs.size() == 1);
  const std::string body = slurp(csvs[0]);
  CHECK(body.rfind("t,f_mean,f_std,p_mean", 0) == 0);
  CHECK(std::count(body.begin(), body.end(), '\n') == 5); // header + 4 samples
}

TEST_CASE("dicke transient emits t_star") {
  TempRoot root;
  REQUIRE(run("dicke transient --n 2 --alpha 1.5 --fock-min 0 --fock-max 17 "
              "--delta-grid 0.7 --omegaz-grid 1.3 --tmax 1.0 --dt 0.5 --threshold 0.0 "
              "--sustain 1 --states 2 --seed 3",
              root.dir) == 0);
  auto csvs = find_files(root.dir, "data.csv");
  REQUIRE(csvs.size() == 1);
  const std::string body = slurp(csvs[0]);
  CHECK(body.rfind("delta,omega_z,t_star", 0) == 0);
}

TEST_CASE("measproj summarizes the derived configuration") {
  TempRoot root;
  REQUIRE(run("measproj --variant sinc --nmax 5", root.dir) == 0);
  auto manifests = find_files(root.dir, "manifest.json");
  REQUIRE(manifests.size() == 1);
  const std::string m = slurp(manifests[0]);
  CHECK(m.find("\"derived-nm\": \"5\"") != std::string::npos);
  REQUIRE(run("measproj --variant cosine --eps 1e-3 --nmax 10", root.dir) == 0);
}

TEST_CASE("bounds emits the documented schema") {
  TempRoot root;
  REQUIRE(run("bounds --d 2 --m 1 --pairs 5 --states 200 --seed 3", root.dir) == 0);
  auto csvs = find_files(root.dir, "data.csv");
  REQUIRE(csvs.size() == 1);
  CHECK(slurp(csvs[0]).rfind("d,m,min_f,bound,max_ratio_mc,ratio_bound,skipped", 0) == 0);
}
