#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "affthermo/cli.hpp"
#include "affthermo/cloud_io.hpp"
#include "affthermo/document.hpp"
#include "affthermo/errors.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace affthermo;

namespace {

const std::string kData = AFFTHERMO_TEST_DATA;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

double field(const std::string& text, const std::string& key) {
  const auto at = text.find(key + ": ");
  REQUIRE(at != std::string::npos);
  return std::stod(text.substr(at + key.size() + 2));
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("affthermo_test_" + name)).string();
}

}  // namespace

TEST_CASE("document parsing") {
  const auto doc = IfsDocument::load(kData + "/three_similarities.json");
  CHECK(doc.name == "sierpinski");
  REQUIRE(doc.maps.size() == 3);
  CHECK(doc.maps[0].matrix[0].form == DocumentEntry::Form::Text);
  const auto ifs = doc.to_ifs();
  CHECK(ifs.is_exact());
  CHECK(ifs.matrix(1).a == 0.5);
  CHECK(ifs.map(1).translation == Vec2{0.5, 0});
}

TEST_CASE("documents round trip") {
  for (const char* name : {"three_similarities", "diag_identity", "gap_tuple", "zero_letter", "nilpotent_pair"}) {
    const auto doc = IfsDocument::load(kData + "/" + name + ".json");
    const auto again = IfsDocument::parse(doc.serialize());
    CHECK(again == doc);
    CHECK(again.serialize() == doc.serialize());
  }
  const auto from = IfsDocument::from_ifs(IfsDocument::load(kData + "/gap_tuple.json").to_ifs());
  CHECK(IfsDocument::parse(from.serialize()) == from);
}

TEST_CASE("malformed documents report a position") {
  try {
    IfsDocument::parse("{\n  \"maps\": [\n    {\"matrix\": [[1, 2], [3 4]]}\n  ]\n}");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() > 1);
  }
  CHECK_THROWS_AS(IfsDocument::parse("{\"maps\": []}"), ParseError);
  CHECK_THROWS_AS(IfsDocument::parse("{\"maps\": [{\"matrix\": [[\"1/0\", 0], [0, 1]]}]}"), ParseError);
  CHECK_THROWS_AS(IfsDocument::parse("{\"maps\": [{\"matrix\": [[1, 0], [0]]}]}"), ParseError);
}

TEST_CASE("affdim on three similarities") {
  const auto r = run({"affdim", kData + "/three_similarities.json", "--tol", "1e-3"});
  CHECK(r.code == 0);
  const double target = std::log(3.0) / std::log(2.0);
  CHECK(field(r.out, "lo") <= target);
  CHECK(field(r.out, "hi") >= target);
}

TEST_CASE("pressure curve of the diagonal/identity pair") {
  const auto r = run({"pressure-curve", kData + "/diag_identity.json", "--kind", "full", "--s-from", "1", "--s-to",
                      "2", "--steps", "3", "--depth", "6"});
  CHECK(r.code == 0);
  CHECK(r.out ==
        "s,lower,upper,depth,certificate,kind\n"
        "1,0.69314718056,0.69314718056,6,line:angle=0,full\n"
        "1.5,0,0,6,conformal,full\n"
        "2,0,0,6,conformal,full\n");
}

TEST_CASE("analyze flags a zero letter") {
  const auto r = run({"analyze", kData + "/zero_letter.json"});
  CHECK(r.code == 0);
  CHECK(r.out.find("continuityAtZero: false") != std::string::npos);
}

TEST_CASE("gap subcommand") {
  const auto r = run({"gap", kData + "/gap_tuple.json", "--s", "1.0"});
  CHECK(r.code == 0);
  CHECK(r.out.find("status: CertifiedGap") != std::string::npos);
  CHECK(field(r.out, "lowerFull") > field(r.out, "upperInv"));
}

TEST_CASE("exit codes") {
  CHECK(run({"gap", kData + "/three_similarities.json", "--s", "1.0"}).code == cli::kExitPrecondition);
  CHECK(run({"affdim", kData + "/diag_identity.json"}).code == cli::kExitPrecondition);
  CHECK(run({"bogus"}).code == cli::kExitPrecondition);
  CHECK(run({"analyze", kData + "/missing.json"}).code == cli::kExitIo);
  const auto budget = run({"pressure-curve", kData + "/gap_tuple.json", "--depth", "20", "--budget", "1000"});
  CHECK(budget.code == cli::kExitBudget);
  CHECK(budget.err.find("BudgetExceeded") != std::string::npos);
  // The header is written even though no row finished.
  CHECK(budget.out.rfind("s,lower,upper", 0) == 0);
}

TEST_CASE("the budget environment variable is honoured") {
  ::setenv("AFFTHERMO_BUDGET", "500", 1);
  const auto r = run({"pressure-curve", kData + "/gap_tuple.json", "--depth", "10"});
  ::unsetenv("AFFTHERMO_BUDGET");
  CHECK(r.code == cli::kExitBudget);
  CHECK(r.err.find("500") != std::string::npos);
}

TEST_CASE("render, boxdim and project") {
  const std::string bin = temp_path("cloud.bin");
  const std::string csv = temp_path("cloud.csv");
  CHECK(run({"render", kData + "/three_similarities.json", "--epsilon", "0.0005", "-o", bin}).code == 0);
  CHECK(run({"render", kData + "/three_similarities.json", "--epsilon", "0.0005", "-o", csv}).code == 0);
  CHECK(load_cloud(bin).points == load_cloud(csv).points);

  const std::string table = temp_path("table.csv");
  const auto box = run({"boxdim", bin, "--scales", "3:8", "--seed", "4", "--table", table});
  CHECK(box.code == 0);
  CHECK(std::abs(field(box.out, "slope") - std::log(3.0) / std::log(2.0)) < 0.05);
  std::ifstream t(table);
  std::string header;
  std::getline(t, header);
  CHECK(header == "scale,count,offsetId");

  const auto proj = run({"project", bin, "--angle", "0"});
  CHECK(proj.code == 0);
  CHECK(proj.out.rfind("t\n0\n", 0) == 0);
  std::filesystem::remove(bin);
  std::filesystem::remove(csv);
  std::filesystem::remove(table);
}

TEST_CASE("outputs are deterministic") {
  const std::vector<std::string> args{"pressure-curve", kData + "/gap_tuple.json", "--s-from", "0",
                                      "--s-to",         "2",                        "--steps",  "9",
                                      "--depth",        "6"};
  CHECK(run(args).out == run(args).out);
  const std::vector<std::string> four{"pressure-curve", kData + "/gap_tuple.json", "--depth", "6", "--threads", "4"};
  auto one = four;
  one.back() = "1";
  CHECK(run(four).out == run(one).out);
}
