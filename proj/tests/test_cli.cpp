#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kWorkDir = [] {
  fs::path dir = fs::temp_directory_path() / "srf_cli_tests";
  fs::create_directories(dir);
  return dir;
}();

int run(const std::string& args) {
  const std::string cmd = std::string(SRF_CLI_PATH) + " " + args +
                          " >" + (kWorkDir / "stdout.txt").string() + " 2>" +
                          (kWorkDir / "stderr.txt").string();
  return std::system(cmd.c_str());
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string out_path(const std::string& name) {
  return (kWorkDir / name).string();
}

// value of column `col` at the row where q is nearest to `q_want`
double csv_value_at(const fs::path& csv, double q_want, int col) {
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);  // header
  double best = 1e300, value = 0.0;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string field;
    double q = 0.0, candidate = 0.0;
    for (int c = 0; std::getline(row, field, ','); ++c) {
      if (c == 0) q = std::stod(field);
      if (c == col) candidate = std::stod(field);
    }
    if (std::fabs(q - q_want) < best) {
      best = std::fabs(q - q_want);
      value = candidate;
    }
  }
  return value;
}

}  // namespace

TEST_CASE("theory emits the documented log-normal value at q = 2") {
  REQUIRE(run("theory --model lognormal --b 2 --sigma2 1 --q 0.1:3:0.01 -o " +
              out_path("theory.csv")) == 0);
  CHECK(std::fabs(csv_value_at(kWorkDir / "theory.csv", 2.0, 1) -
                  0.2786525) < 1e-6);
  // verbatim chi-square(k) display value T(2) = -0.5
  REQUIRE(run("theory --model chisquarek --b 2 --k 2 --verbatim "
              "--q 1:2:0.25 -o " +
              out_path("csk.csv")) == 0);
  CHECK(std::fabs(csv_value_at(kWorkDir / "csk.csv", 2.0, 1) + 0.5) < 1e-12);
}

TEST_CASE("invalid inputs exit non-zero with a diagnostic") {
  CHECK(run("theory --model nosuchmodel --q 1:2:0.1") != 0);
  CHECK(run("theory --model loggamma --b 2 --lambda 3 --beta 2 "
            "--q 1:4:0.5") != 0);  // q beyond lambda
  CHECK(run("estimate --map " + out_path("missing.srfm")) != 0);
  CHECK(run("simulate --model loggamma --levels 1 --nside 4 -o " +
            out_path("x.srfm")) != 0);  // not simulable
}

TEST_CASE("simulate is byte-identical across reruns and seed-sensitive") {
  const std::string base =
      "simulate --model lognormal --b 3 --variance 2 --levels 3 --nside 4 ";
  REQUIRE(run(base + "--seed 7 -o " + out_path("a.srfm")) == 0);
  REQUIRE(run(base + "--seed 7 -o " + out_path("b.srfm")) == 0);
  REQUIRE(run(base + "--seed 8 -o " + out_path("c.srfm")) == 0);
  CHECK(slurp(kWorkDir / "a.srfm") == slurp(kWorkDir / "b.srfm"));
  CHECK(slurp(kWorkDir / "a.srfm") != slurp(kWorkDir / "c.srfm"));
}

TEST_CASE("estimate on a uniform map yields T = q - 1 through the CLI") {
  // uniform CSV map, nside 8
  {
    std::ofstream csv(kWorkDir / "uniform.csv");
    csv << "pixel_index,value\n";
    for (int i = 0; i < 768; ++i) csv << i << ",1.0\n";
  }
  REQUIRE(run("estimate --map " + out_path("uniform.csv") +
              " --group-order 2 --q 1:2:0.25 -o " + out_path("uniform.json") +
              " --curve-out " + out_path("uniform_curve.csv")) == 0);
  for (double q : {1.0, 1.25, 1.5, 1.75, 2.0})
    CHECK(std::fabs(csv_value_at(kWorkDir / "uniform_curve.csv", q, 1) -
                    (q - 1.0)) < 1e-12);
  // default-mode alpha is 1 on a uniform map
  CHECK(std::fabs(csv_value_at(kWorkDir / "uniform_curve.csv", 1.5, 2) - 1.0) <
        1e-12);
}

TEST_CASE("simulate -> estimate -> fit pipeline round-trips documents") {
  REQUIRE(run("simulate --model lognormal --b 3 --variance 2 --levels 5 "
              "--nside 8 --seed 11 -o " +
              out_path("casc.srfm")) == 0);
  REQUIRE(run("estimate --map " + out_path("casc.srfm") +
              " --group-order 2 --q 1:2:0.05 -o " + out_path("casc.json")) ==
          0);
  REQUIRE(run("fit --curve " + out_path("casc.json") +
              " --family lognormal --family loggamma -o " +
              out_path("fits.json")) == 0);

  const auto doc = nlohmann::json::parse(slurp(kWorkDir / "fits.json"));
  CHECK(doc.at("schema") == "srf-result-v1");
  CHECK(doc.at("fits").size() == 2);
  CHECK(doc.at("fits")[0].at("family") == "lognormal");
  CHECK(doc.at("fits")[0].at("params").contains("a"));
  CHECK(doc.at("provenance").contains("config_hash"));

  // estimates are reproducible byte for byte
  REQUIRE(run("estimate --map " + out_path("casc.srfm") +
              " --group-order 2 --q 1:2:0.05 -o " + out_path("casc2.json")) ==
          0);
  CHECK(slurp(kWorkDir / "casc.json") == slurp(kWorkDir / "casc2.json"));
}

TEST_CASE("fit recovers parameters from a theory CSV") {
  REQUIRE(run("theory --model loggamma --b 2 --lambda 3 --beta 2 "
              "--q 1:2:0.05 -o " +
              out_path("lg.csv")) == 0);
  REQUIRE(run("fit --curve " + out_path("lg.csv") + " --family loggamma -o " +
              out_path("lg_fit.json")) == 0);
  const auto doc = nlohmann::json::parse(slurp(kWorkDir / "lg_fit.json"));
  const auto& fit = doc.at("fits")[0];
  CHECK(std::fabs(fit.at("params").at("B").get<double>() - 1.0 / 3.0) < 1e-6);
  CHECK(std::fabs(fit.at("natural_params").at("lambda").get<double>() - 3.0) <
        1e-4);
  CHECK(fit.at("converged").get<bool>());
}

TEST_CASE("validate reports condition outcomes") {
  REQUIRE(run("validate --model lognormal --b 2 --sigma2 1") == 0);
  const std::string text = slurp(kWorkDir / "stdout.txt");
  CHECK(text.find("satisfied: yes") != std::string::npos);

  REQUIRE(run("validate --model loggamma --b 2 --lambda 2 --beta 1") == 0);
  CHECK(slurp(kWorkDir / "stdout.txt").find("satisfied: no") !=
        std::string::npos);
}

TEST_CASE("selftest runs a fast criterion") {
  CHECK(run("selftest --criterion 8") == 0);
  CHECK(slurp(kWorkDir / "stdout.txt").find("PASS") != std::string::npos);
}

TEST_CASE("nested-ordering simulate/estimate pipeline") {
  REQUIRE(run("simulate --model chisquare --levels 2 --nside 8 "
              "--ordering nested --seed 3 -o " +
              out_path("nest.srfm")) == 0);
  REQUIRE(run("estimate --map " + out_path("nest.srfm") +
              " --group-order 2 --q 1:2:0.25 -o " + out_path("nest.json")) ==
          0);
  const auto doc = nlohmann::json::parse(slurp(kWorkDir / "nest.json"));
  CHECK(doc.at("T")[0].get<double>() == 0.0);  // T(1) = 0
}

TEST_CASE("multi-level regression through the CLI") {
  {
    std::ofstream csv(kWorkDir / "uniform_multi.csv");
    csv << "pixel_index,value\n";
    for (int i = 0; i < 768; ++i) csv << i << ",1.0\n";
  }
  REQUIRE(run("estimate --map " + out_path("uniform_multi.csv") +
              " --group-order 1 --group-order 2 --group-order 3 "
              "--q 1:2:0.5 -o " +
              out_path("multi.json")) == 0);
  const auto doc = nlohmann::json::parse(slurp(kWorkDir / "multi.json"));
  CHECK(std::fabs(doc.at("T")[2].get<double>() - 1.0) < 1e-12);  // q = 2
}

TEST_CASE("cap-window estimation and negative-value maps via the CLI") {
  {
    std::ofstream csv(kWorkDir / "shifted.csv");
    csv << "pixel_index,value\n";
    // uniform 1.0 with one negative pixel; auto mode shifts by the minimum
    for (int i = 0; i < 768; ++i)
      csv << i << ',' << (i == 5 ? -2.0 : 1.0) << '\n';
  }
  REQUIRE(run("estimate --map " + out_path("shifted.csv") +
              " --window cap --cap-theta 0 --cap-phi 0 --cap-area 0.9 "
              "--group-order 1 --q 1:2:0.5 -o " +
              out_path("cap.json")) == 0);
  const auto doc = nlohmann::json::parse(slurp(kWorkDir / "cap.json"));
  CHECK(doc.at("estimator").at("window").at("kind") == "cap");
  CHECK(doc.at("estimator").at("shift").get<double>() == -2.0);
  CHECK(doc.at("T")[0].get<double>() == 0.0);
}

TEST_CASE("fit accepts explicit initial values for a single family") {
  REQUIRE(run("theory --model loggamma --b 2 --lambda 3 --beta 2 "
              "--q 1:2:0.05 -o " +
              out_path("lg2.csv")) == 0);
  REQUIRE(run("fit --curve " + out_path("lg2.csv") +
              " --family loggamma --init 0.7 0.3 -o " +
              out_path("lg2_fit.json")) == 0);
  const auto doc = nlohmann::json::parse(slurp(kWorkDir / "lg2_fit.json"));
  CHECK(std::fabs(doc.at("fits")[0].at("params").at("B").get<double>() -
                  1.0 / 3.0) < 1e-6);
  // --init with several families is an invalid combination
  CHECK(run("fit --curve " + out_path("lg2.csv") +
            " --family loggamma --family chisquare --init 0.7 0.3") != 0);
}
