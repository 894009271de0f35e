#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "mlslab/errors.hpp"
#include "mlslab/geodesic_solver.hpp"

using namespace mlslab;

TEST_CASE("flat torus reproduces straight lines") {
  Model m = TorusModel();
  auto r = solve_geodesic(m, TorusField(2, 0), TorusClass{2, 1});
  CHECK(std::abs(r.length - std::sqrt(5.0)) <= 1e-8 * std::sqrt(5.0));
  CHECK(r.cs_energy >= r.length * r.length * (1 - 1e-14));
  Mat2 G;
  G << 2.0, -0.5, -0.5, 1.0;
  Model mg = TorusModel(G);
  for (TorusClass c : {TorusClass{1, 0}, TorusClass{3, -2}, TorusClass{1, 4}}) {
    double L0 = background_length(mg, c);
    CHECK(std::abs(solve_geodesic(mg, TorusField(2, 0), c).length - L0) <= 1e-8 * L0);
  }
}

TEST_CASE("product metric closed forms") {
  Model m = TorusModel();
  TorusField f = constant_field({0.1, 0.0, 0.0});
  auto recs = spectrum_batch(m, f, {TorusClass{1, 0}, TorusClass{0, 1}, TorusClass{1, 1}});
  for (const auto& r : recs) CHECK(r.error.empty());
  CHECK(recs[0].L == doctest::Approx(std::sqrt(1.1)).epsilon(1e-10));
  CHECK(recs[1].L == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(recs[2].ratio > 1.0);
  CHECK(recs[2].ratio < std::sqrt(1.1));
  // constant metric: exact answer sqrt(v^T (G + f) v)
  CHECK(recs[2].L == doctest::Approx(std::sqrt(2.1)).epsilon(1e-10));
}

TEST_CASE("conformal enlargement never shortens") {
  Model m = TorusModel();
  TorusField u = random_field(5, 3, 0);
  u *= 0.02;
  u.set(0, 0, 0, 0.08);  // keeps u > 0
  TorusField f = conformal_field(std::get<TorusModel>(m), u);
  auto recs = spectrum_batch(m, f, enumerate_classes(m, 2));
  for (const auto& r : recs) {
    CHECK(r.error.empty());
    CHECK(r.ratio >= 1.0 - 1e-7);
  }
}

TEST_CASE("random fields: start independence and the CG variant") {
  Model m = TorusModel();
  TorusField f = random_field(7, 4, 2);
  f *= 0.05;
  for (TorusClass c : {TorusClass{1, 0}, TorusClass{3, 2}}) {
    SolverOptions base;
    double L = solve_geodesic(m, f, c, base).length;
    SolverOptions jit = base;
    jit.init_jitter = 0.05;
    jit.jitter_seed = 3;
    CHECK(solve_geodesic(m, f, c, jit).length == doctest::Approx(L).epsilon(1e-9));
    SolverOptions cg = base;
    cg.cg = true;
    cg.grad_tol = 1e-7;  // plain CG plateaus near 1e-6 on long loops
    CHECK(solve_geodesic(m, f, c, cg).length == doctest::Approx(L).epsilon(1e-8));
  }
}

TEST_CASE("Bolza background classes") {
  FuchsianModel fm = FuchsianModel::bolza();
  Model m = fm;
  BumpField zero(fm, 2, {});
  for (const char* w : {"a", "ab", "aBc"}) {
    auto c = canonicalize(w);
    double L0 = background_length(m, c);
    auto r = solve_geodesic(m, zero, c);
    CHECK(std::abs(r.length - L0) <= 1e-8 * L0);
  }
  SolverOptions jit;
  jit.init_jitter = 0.05;
  jit.jitter_seed = 1;
  auto c = canonicalize("a");
  CHECK(solve_geodesic(m, zero, c, jit).length == doctest::Approx(fm.systole()).epsilon(1e-8));
}

TEST_CASE("Bolza bump perturbation lengthens or shortens consistently") {
  FuchsianModel fm = FuchsianModel::bolza();
  Model m = fm;
  BumpField pos(fm, 2, {BumpTerm{cplx(0.0, 0.0), 1.5, {0.05, 0.0, 0.05}}});
  BumpField neg = pos.scaled(-1.0);
  for (const char* w : {"a", "ab"}) {
    auto c = canonicalize(w);
    double L0 = background_length(m, c);
    CHECK(solve_geodesic(m, pos, c).length >= L0 * (1 - 1e-7));
    CHECK(solve_geodesic(m, neg, c).length <= L0 * (1 + 1e-7));
  }
}

TEST_CASE("errors") {
  Model m = TorusModel();
  CHECK_THROWS_AS(solve_geodesic(m, TorusField(2, 0), TorusClass{0, 0}), TrivialClassError);
  TorusField bad = constant_field({-2.0, 0.0, 0.0});
  auto recs = spectrum_batch(m, bad, {TorusClass{1, 0}});
  CHECK_FALSE(recs[0].error.empty());
  CHECK_THROWS_AS(solve_geodesic(m, TorusField(1, 0), TorusClass{1, 0}), ConfigError);
}
