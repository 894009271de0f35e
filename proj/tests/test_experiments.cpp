#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "mlslab/errors.hpp"
#include "mlslab/experiments.hpp"

using namespace mlslab;
using nlohmann::json;

namespace {
const Assertion& find(const Report& r, const std::string& name) {
  for (const auto& a : r.assertions)
    if (a.name == name) return a;
  FAIL("missing assertion " << name);
  return r.assertions.front();
}
}  // namespace

TEST_CASE("field sources") {
  Model m = TorusModel();
  CHECK(l2_norm(TorusModel(), std::get<TorusField>(make_field("zero", m))) == 0.0);
  auto c = std::get<TorusField>(make_field("const:0.1,0,0", m));
  CHECK(c.coeff(0, 0, 0).real() == 0.1);
  auto r = std::get<TorusField>(make_field("random:seed=3:K=4:amp=0.05", m));
  CHECK(sup_surrogate(TorusModel(), r, 64) == doctest::Approx(0.05).epsilon(1e-12));
  auto s = std::get<TorusField>(make_field("random:seed=3:K=4:alpha=0.5:amp=1", m));
  CHECK(l2_norm(TorusModel(), divergence(TorusModel(), s)) <= 1e-12);
  auto u = std::get<TorusField>(make_field("conformal:u=0.5", m));
  CHECK(u.coeff(0, 0, 0).real() == 1.0);
  auto p = std::get<TorusField>(make_field("potential:seed=2:K=3:amp=0.05", m));
  CHECK(l2_norm(TorusModel(), solenoidal_project(TorusModel(), p).solenoidal) <= 1e-12);
  CHECK_THROWS_AS(make_field("random:seed=x", m), ConfigError);
  CHECK_THROWS_AS(make_field("random:bogus=1", m), ConfigError);
  CHECK_THROWS_AS(make_field("bump:x=0", m), ConfigError);
  CHECK_THROWS_AS(make_field("no/such/file.json", m), ConfigError);
  Model h = FuchsianModel::bolza();
  auto b = std::get<BumpField>(make_field("bump:x=0.1:y=0:r=1:c=1", h, 0));
  CHECK(b.degree() == 0);
  CHECK_THROWS_AS(make_field("random:seed=1", h), ConfigError);
}

TEST_CASE("conformal draws are nonnegative") {
  TorusModel m;
  TorusField f = random_conformal(m, 4, 4, 0.2);
  auto g = grid_values(f, 64);
  double lo = 1e300, hi = -1e300;
  for (double x : g[0]) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  CHECK(lo >= -1e-14);
  CHECK(hi == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("config JSON") {
  ExperimentConfig c;
  c.bound = 4;
  c.t_values = {0.02, 0.01};
  auto back = experiment_config_from_json(to_json(c));
  CHECK(back.bound == 4);
  CHECK(back.t_values == c.t_values);
  CHECK_THROWS_AS(experiment_config_from_json(json{{"nope", 1}}), ConfigError);
  CHECK_THROWS_AS(experiment_config_from_json(json{{"nu", 2.0}}), ConfigError);
  CHECK_THROWS_AS(experiment_config_from_json(json{{"bound", "x"}}), ConfigError);
  SolverOptions o;
  o.rtol = 1e-9;
  CHECK(solver_options_from_json(to_json(o)).rtol == 1e-9);
  CHECK(std::isnan(solver_options_from_json(to_json(o)).grad_tol));
}

TEST_CASE("rank correlation") {
  CHECK(rank_correlation({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
  CHECK(rank_correlation({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(rank_correlation({1, 2, 3}, {1, 1, 1}) == 0.0);
  CHECK_THROWS_AS(rank_correlation({1}, {1}), ConfigError);
}

TEST_CASE("linearization with the zero field") {
  Model m = TorusModel();
  Report r = linearization_check(m, TorusField(2, 0), {1e-2, 5e-3}, enumerate_classes(m, 2), SolverOptions{});
  CHECK(r.passed());
  CHECK(find(r, "remainder_zero").value <= 1e-13);
  CHECK_THROWS_AS(linearization_check(m, TorusField(2, 0), {1e-2, 2e-2}, enumerate_classes(m, 1), SolverOptions{}),
                  ConfigError);
}

TEST_CASE("positivity with eps dx^2") {
  Model m = TorusModel();
  Report r = positivity_check(m, constant_field({0.05, 0.0, 0.0}), enumerate_classes(m, 3), SolverOptions{});
  CHECK(r.passed());
  CHECK(r.summary["gated_classes"].get<std::int64_t>() == static_cast<std::int64_t>(enumerate_classes(m, 3).size()));
  const auto& t = r.tables.at("positivity");
  for (const auto& row : t.rows) {
    auto id = std::get<std::string>(row[0]);
    auto c = std::get<TorusClass>(parse_class_id(id, true));
    double cos2 = double(c.p * c.p) / double(c.p * c.p + c.q * c.q);
    CHECK(std::get<double>(row[4]) == doctest::Approx(0.05 * cos2).epsilon(1e-10));
  }
}

TEST_CASE("volume identity examples") {
  TorusModel m;
  TorusField u(0, 0);
  u.set(0, 0, 0, 0.25);
  Report r = volume_identity(m, conformal_field(m, u));
  CHECK(r.passed());
  CHECK(r.summary["liouville"].get<double>() == doctest::Approx(0.5));
  TorusField single(2, 2);
  single.set_real_mode(0, 1, 2, cplx(0.3, 0.1));
  Report s = volume_identity(m, single);
  CHECK(s.passed());
  CHECK(std::abs(s.summary["liouville"].get<double>()) <= 1e-15);
}

TEST_CASE("closed-geodesic averages are self-normalized") {
  FuchsianModel fm = FuchsianModel::bolza();
  Report r = parry_average(fm, nullptr, {4.0, 6.0, 8.0});
  CHECK(r.passed());
  BumpField one_form(fm, 1, {BumpTerm{cplx(0, 0), 1.0, {0.3, -0.1}}});
  Report odd = parry_average(fm, &one_form, {6.0, 8.0});
  CHECK(std::abs(odd.summary["liouville"].get<double>()) <= 1e-10);
  CHECK_THROWS_AS(parry_average(fm, nullptr, {2.0}), ConfigError);
}

TEST_CASE("small stability probe") {
  ExperimentConfig c;
  c.ensemble_size = 10;
  c.bound = 3;
  c.K = 4;
  Report r = stability_probe(TorusModel(), c);
  // the rank correlation is only meaningful for full-size ensembles
  for (const auto& a : r.assertions)
    if (a.name != "rank_correlation_positive") CHECK_MESSAGE(a.pass, a.name);
  CHECK(r.tables.at("stability_scatter").rows.size() == 10);
  c.ensemble_size = 5;
  CHECK_THROWS_AS(stability_probe(TorusModel(), c), ConfigError);
}

TEST_CASE("small mls probe") {
  ExperimentConfig c;
  c.ensemble_size = 2;
  c.bound = 2;
  c.K = 3;
  c.isometry_members = 1;
  c.isometry_bound = 2;
  c.gauge_tol = 1e-7;
  Report r = mls_probe(TorusModel(), c, SolverOptions{});
  for (const auto& a : r.assertions) INFO(a.name << " " << a.value);
  CHECK(r.passed());
  CHECK(r.tables.at("mls").rows.size() == 4);
}
