#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <random>

#include "mlslab/errors.hpp"
#include "mlslab/io.hpp"

using namespace mlslab;
using nlohmann::json;

TEST_CASE("doubles print with 17 significant digits and round-trip") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    CHECK(std::strtod(format_double(x).c_str(), nullptr) == x);
  }
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(std::nan("")) == "nan");
}

TEST_CASE("csv layout") {
  Table t{{"a", "b", "c"}, {}};
  t.add({std::string("x,y"), 0.5, std::int64_t(3)});
  t.add({std::string("q\"r"), -1.0, std::int64_t(-2)});
  std::string csv = to_csv(t, "00ff");
  CHECK(csv.rfind("# mlslab " MLSLAB_VERSION " digest=00ff\n", 0) == 0);
  CHECK(csv.find("a,b,c\n\"x,y\",0.5,3\n\"q\"\"r\",-1,-2\n") != std::string::npos);
}

TEST_CASE("digest depends only on content") {
  json a = {{"x", 1}, {"y", {1, 2}}};
  json b = {{"y", {1, 2}}, {"x", 1}};
  CHECK(config_digest(a) == config_digest(b));
  CHECK(config_digest(a) != config_digest(json{{"x", 2}, {"y", {1, 2}}}));
  CHECK(hex64(fnv1a64("")) == "cbf29ce484222325");
}

TEST_CASE("field JSON round-trips exactly") {
  Mat2 G;
  G << 1.3, 0.2, 0.2, 0.8;
  Model m = TorusModel(G);
  Field f = random_field(4, 3, 2);
  Field back = field_from_json(json::parse(field_to_json(f).dump()), m);
  CHECK(std::get<TorusField>(back) == std::get<TorusField>(f));

  Model mb = model_from_json(model_to_json(m));
  CHECK(std::get<TorusModel>(mb).gram == G);

  FuchsianModel fm = FuchsianModel::bolza();
  Model h = fm;
  Field bf = BumpField(fm, 2, {BumpTerm{cplx(0.1, -0.2), 0.9, {0.1, 0.2, 1.0 / 3.0}}});
  Field bb = field_from_json(json::parse(field_to_json(bf).dump()), h);
  const auto& t0 = std::get<BumpField>(bf).terms()[0];
  const auto& t1 = std::get<BumpField>(bb).terms()[0];
  CHECK(t0.center == t1.center);
  CHECK(t0.radius == t1.radius);
  CHECK(t0.coeffs == t1.coeffs);
}

TEST_CASE("malformed inputs are configuration errors") {
  Model m = TorusModel();
  CHECK_THROWS_AS(field_from_json(json{{"kind", "fourier"}}, m), ConfigError);
  CHECK_THROWS_AS(field_from_json(json{{"kind", "fourier"}, {"degree", 2}, {"K", 1}, {"re", {1.0}}, {"im", {0.0}}}, m),
                  ConfigError);
  CHECK_THROWS_AS(field_from_json(json{{"kind", "bump"}, {"degree", 0}, {"terms", json::array()}}, m), ConfigError);
  CHECK_THROWS_AS(model_from_json(json{{"kind", "sphere"}}), ConfigError);
  CHECK_THROWS_AS(read_text_file("/nonexistent/file.json"), ConfigError);
}

TEST_CASE("report JSON") {
  Report r;
  r.experiment = "demo";
  r.check("ok", true, 1.0, 2.0);
  r.check("bad", false, 3.0, 2.0);
  r.tables["t"] = Table{{"a"}, {}};
  json j = report_to_json(r);
  CHECK(j["experiment"] == "demo");
  CHECK(j["passed"] == false);
  CHECK(j["assertions"].size() == 2);
  CHECK(j["assertions"][1]["name"] == "bad");
  CHECK(j["tables"][0] == "t.csv");
}
