#include <cstdio>
#include <sstream>
#include <sys/wait.h>

#include <gtest/gtest.h>

#include "ghgeo/io.hpp"
#include "ghgeo/scenarios.hpp"

using namespace ghgeo;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

Run run(const std::string& args, const std::string& env = "SOURCE_DATE_EPOCH=0") {
  const std::string cmd = env + " " + GHGEO_CLI + " " + args;
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int st = pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string sample(const std::string& name) { return std::string(GHGEO_SAMPLES_DIR) + "/" + name; }

}  // namespace

TEST(Cli, EvalSingleCharge) {
  const auto r = run("eval --config " + sample("single_charge.json") + " --at 0.5,0,0");
  ASSERT_EQ(r.status, 0);
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j.at("result").at("value").get<double>(), 1.0);
  EXPECT_EQ(j.at("manifest").at("command"), "eval");
  EXPECT_EQ(j.at("manifest").at("timestamp"), "1970-01-01T00:00:00Z");
}

TEST(Cli, EvalAtSingularityIsAnError) {
  const auto r = run("eval --config " + sample("single_charge.json") + " --at 0,0,0 2>&1");
  EXPECT_EQ(r.status, 2);
  EXPECT_EQ(Json::parse(r.out).at("error").at("code"), "EvaluationAtSingularity");
}

TEST(Cli, CritTriangleCsv) {
  const auto r = run("crit --config " + sample("triangle.json") + " --format csv");
  ASSERT_EQ(r.status, 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("# manifest {", 0), 0u);
  std::getline(in, line);
  EXPECT_EQ(line.rfind("x,y,z,", 0), 0u);
  int rows = 0;
  while (std::getline(in, line)) rows += !line.empty();
  EXPECT_EQ(rows, 4);
}

TEST(Cli, CritThenAudit) {
  const std::string tmp = testing::TempDir() + "ghgeo_census.json";
  const auto c = run("crit --config " + sample("triangle.json") + " > " + tmp);
  ASSERT_EQ(c.status, 0);
  const auto a = run("audit --census " + tmp);
  ASSERT_EQ(a.status, 0);
  const auto j = Json::parse(a.out).at("result");
  EXPECT_EQ(j.at("maxwell_audit").at("bound"), 4);
  EXPECT_EQ(j.at("maxwell_audit").at("satisfied"), true);
}

TEST(Cli, ScenarioRunExitCodes) {
  const auto ok = run("scenario run triangle");
  EXPECT_EQ(ok.status, 0);
  EXPECT_EQ(Json::parse(ok.out).at("result").at("passed"), true);

  const auto bad = run("scenario run nosuch 2>&1");
  EXPECT_EQ(bad.status, 2);
  EXPECT_EQ(Json::parse(bad.out).at("error").at("code"), "InputError");

  const auto part = run("scenario run partition --param parts=9+3+3 2>&1");
  EXPECT_EQ(part.status, 2);
  EXPECT_EQ(Json::parse(part.out).at("error").at("code"), "InvalidPartition");
}

TEST(Cli, ScenarioListMatchesCatalog) {
  const auto r = run("scenario list");
  ASSERT_EQ(r.status, 0);
  const auto j = Json::parse(r.out).at("result");
  EXPECT_EQ(j.at("default_catalog").size(), default_catalog().size());
}

TEST(Cli, ByteIdenticalWithFixedTimestamp) {
  const std::string args = "scenario run nested_triangles --oracle";
  const auto a = run(args, "SOURCE_DATE_EPOCH=1700000000");
  const auto b = run(args, "SOURCE_DATE_EPOCH=1700000000");
  ASSERT_EQ(a.status, 0);
  EXPECT_EQ(a.out, b.out);
  const auto c = run("--threads 1 " + args, "SOURCE_DATE_EPOCH=1700000000");
  EXPECT_EQ(Json::parse(a.out).at("result"), Json::parse(c.out).at("result"));
}

TEST(Cli, OrbitsRequireOneParameter) {
  const auto both = run("orbits --config " + sample("triangle.json") + " --m 1 --epsilon 0.1 2>&1");
  EXPECT_EQ(both.status, 2);
  const auto r = run("orbits --config " + sample("triangle.json") + " --m 2");
  ASSERT_EQ(r.status, 0);
  EXPECT_EQ(Json::parse(r.out).at("result").at("orbits").size(), 4u);
}

TEST(ConfigIo, RoundTrip) {
  for (const auto& s : {triangle(), nested_triangles(), cube_torus(), square_torus_2d()}) {
    const AnyConfig c = s.torus() ? AnyConfig(s.torus_config()) : AnyConfig(s.euclidean());
    const Json j = to_json(c);
    EXPECT_EQ(to_json(parse_config(j)), j) << s.name;
  }
  const auto mixed = load_config(sample("maxwell_mixed.json"));
  EXPECT_TRUE(std::get<ChargeConfiguration>(mixed).exploratory);
}

TEST(ConfigIo, BadInputIsInputError) {
  const std::vector<std::string> bad{
      R"([])",
      R"({"centers": [[0, 0]]})",
      R"({"centers": [[0, 0, 0]], "weights": [1, 2]})",
      R"({"centers": [[0, 0, 0], [0, 0, 0]]})",
      R"({"lattice": [[1, 0, 0], [0, 1, 0]]})",
      R"({"lattice": [[1, 0, 0], [0, 1, 0], [0, 0, 1]], "fixed_weights": [1]})",
      R"({"lattice": [[1, 0, 0], [0, 1, 0], [0, 0, 1]], "coords": "polar"})",
  };
  for (const auto& b : bad) {
    try {
      parse_config(Json::parse(b));
      ADD_FAILURE() << b;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InputError) << b;
    }
  }
  EXPECT_THROW(load_config("/nonexistent.json"), Error);
}

TEST(ConfigIo, CensusRoundTrip) {
  const auto c = find_critical_points(triangle().euclidean());
  const auto back = census_from_json(to_json(c));
  ASSERT_EQ(back.points.size(), c.points.size());
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    EXPECT_EQ(back.points[i].location, c.points[i].location);
    EXPECT_EQ(back.points[i].morse_index, c.points[i].morse_index);
  }
}
