#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qloc/acceptance.hpp"
#include "qloc/cli.hpp"
#include "qloc/io.hpp"

using namespace qloc;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "qloc");
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

const std::string kPure = R"({"type": "product", "sites": [[[1,0],[0,0]], [[1,0],[0,0]]]})";
const std::string kBell = R"({"type": "vector", "vector": [0.70710678118654752, 0, 0, 0.70710678118654752]})";

}  // namespace

TEST(Cli, PurityOfAProductVectorState) {
  const CliRun r = cli({"--sites", "2", "--state", kPure, "gns", "purity"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_TRUE(j["results"]["pure"].get<bool>());
  EXPECT_EQ(j["results"]["commutant_dim"], 1);
  EXPECT_TRUE(j["pass"].get<bool>());
}

TEST(Cli, MixedStateIsNotPure) {
  const CliRun r = cli({"--sites", "1", "--state", R"({"type": "density", "matrix": [[0.9, 0], [0, 0.1]]})", "gns",
                     "purity"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_FALSE(j["results"]["pure"].get<bool>());
  EXPECT_TRUE(j["results"]["witness_verified"].get<bool>());
  EXPECT_EQ(j["results"]["commutant_dim"], 4);
}

TEST(Cli, AcScanOnAProductState) {
  const CliRun r = cli({"--sites", "3", "--state",
                     R"({"type": "product", "sites": [[[1,0],[0,0]], [[0.5,0],[0,0.5]], [[0,0],[0,1]]]})", "asym",
                     "ac-scan", "--b", "X0", "--eps", "1e-9"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(Json::parse(r.out)["results"]["is_AC"].get<bool>());
}

TEST(Cli, BellStateFailsSmallBuffer) {
  const CliRun r = cli({"--sites", "2", "--state", kBell, "asym", "ac-scan", "--b", "X0", "--eps", "0.5",
                     "--max-buffer", "1"});
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j["series"]["candidates"]["rows"][0][0], "0");
  EXPECT_GT(j["series"]["candidates"]["rows"][0][1].get<double>(), 0.5);
}

TEST(Cli, MalformedRegionIsAnInputError) {
  const CliRun r = cli({"--sites", "3", "--state", R"({"type": "product", "sites": [[[1,0],[0,0]], [[1,0],[0,0]], [[1,0],[0,0]]]})",
                     "states", "restrict", "--region", "0,,2"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("0,,2"), std::string::npos);
}

TEST(Cli, UnknownOptionIsAParseError) {
  EXPECT_EQ(cli({"gns", "purity", "--bogus"}).code, 2);
  EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST(Cli, MissingStateIsReported) {
  const CliRun r = cli({"--sites", "2", "gns", "build"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("no state"), std::string::npos);
}

TEST(Cli, ConfigFileSuppliesInputs) {
  const auto path = std::filesystem::temp_directory_path() / "qloc_cli_config.json";
  {
    std::ofstream f(path);
    f << R"({"net": {"n_sites": 2}, "state": )" << kBell << R"(, "elements": {"element": "X0 X1"}})";
  }
  const CliRun r = cli({"--config", path.string(), "algebra", "norm"});
  std::filesystem::remove(path);
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_NEAR(j["results"]["norm"].get<double>(), 1.0, 1e-12);
  EXPECT_EQ(j["results"]["support"], "0,1");
  EXPECT_TRUE(j["inputs"].contains("config"));
}

TEST(Cli, LpGammaCsv) {
  const CliRun r = cli({"--format", "csv", "forms", "lp-gamma", "--exponent", "-0.6", "--levels", "5,6"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("L,gamma_L,growth_ratio\n5,4.18"), std::string::npos) << r.out;
}

TEST(Cli, ClosureFollowsSquareIntegrability) {
  const CliRun ok = cli({"forms", "closure", "--exponent", "-0.4"});
  ASSERT_EQ(ok.code, 0) << ok.err;
  EXPECT_TRUE(Json::parse(ok.out)["results"]["in_domain"].get<bool>());
  const CliRun no = cli({"forms", "closure", "--exponent", "-0.6"});
  ASSERT_EQ(no.code, 0) << no.err;
  EXPECT_FALSE(Json::parse(no.out)["results"]["in_domain"].get<bool>());
}

TEST(Cli, AcceptanceFilterRunsOneGroup) {
  const CliRun r = cli({"acceptance", "--filter", "commutant_equality"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  ASSERT_EQ(j["verdicts"].size(), 1u);
  EXPECT_EQ(j["verdicts"][0]["name"], "3_commutant_equality");
}

TEST(Cli, CorruptedAcceptanceConfigNamesTheFile) {
  const auto dir = std::filesystem::temp_directory_path() / "qloc_cli_acceptance";
  std::filesystem::remove_all(dir);
  std::filesystem::copy(default_acceptance_dir(), dir);
  {
    std::ofstream f(dir / "05_product_clustering.json");
    f << "{\"id\": 5, \"name\": \"product_clustering\",\n \"group\": \"asymptotics\", \"params\": {\"n\": }}";
  }
  const CliRun r = cli({"acceptance", "--dir", dir.string()});
  std::filesystem::remove_all(dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("05_product_clustering.json"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
}
