#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "mlslab/xray.hpp"

using namespace mlslab;

namespace {

// Midpoint rule along the straight line, independent of the mode formula.
double brute_torus(const TorusModel& m, const TorusField& f, TorusClass c, Vec2 x0, int n) {
  Vec2 dir(c.p, c.q);
  double L = std::sqrt(dir.dot(m.gram * dir));
  Vec2 v = dir / L;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += pullback(f, x0 + ((i + 0.5) / n) * dir, v);
  return acc / n;
}

double brute_disk(const Model& m, const BumpField& f, const ConjugacyClass& c, int n) {
  auto g = background_geodesic(m, c);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    auto p = g.lift_at(g.length() * (i + 0.5) / n);
    acc += f.pullback(p.x, p.v);
  }
  return acc / n;
}

}  // namespace

TEST_CASE("constant tensors") {
  Model m = TorusModel();
  TorusField f = constant_field({0.1, 0.0, 0.0});
  CHECK(xray_tensor(m, f, TorusClass{1, 0}).value == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(std::abs(xray_tensor(m, f, TorusClass{0, 1}).value) <= 1e-15);
  Mat2 G;
  G << 1.3, 0.2, 0.2, 0.8;
  TorusModel tm(G);
  TorusField u(0, 0);
  u.set(0, 0, 0, 0.3);
  TorusField conf = conformal_field(tm, u);
  for (TorusClass c : {TorusClass{1, 0}, TorusClass{2, -3}})
    CHECK(xray_tensor(Model{tm}, conf, c).value == doctest::Approx(0.6).epsilon(1e-14));
}

TEST_CASE("potentials are invisible") {
  Mat2 G;
  G << 1.3, 0.2, 0.2, 0.8;
  Model m = TorusModel(G);
  for (int deg : {0, 1, 2}) {
    TorusField f = symmetric_derivative(random_field(30 + deg, 6, deg));
    auto b = xray_batch(m, f, enumerate_classes(m, 5));
    CHECK(b.sup_norm <= 1e-10);
  }
  CHECK(xray_batch(m, TorusField(2, 3), enumerate_classes(m, 3)).sup_norm == 0.0);
}

TEST_CASE("torus X-ray against brute-force quadrature") {
  Mat2 G;
  G << 1.3, 0.2, 0.2, 0.8;
  TorusModel tm(G);
  Model m = tm;
  TorusField f = random_solenoidal(tm, 4, 6, 2, 1.0);
  double worst = 0.0;
  for (const auto& c : enumerate_classes(m, 8)) {
    const auto& tc = std::get<TorusClass>(c);
    Vec2 x0(0.17, 0.41);
    double exact = xray_tensor(m, f, c, x0).value;
    worst = std::max(worst, std::abs(exact - brute_torus(tm, f, tc, x0, 10000)));
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("offset profile") {
  TorusModel tm;
  Model m = tm;
  TorusField f = random_field(8, 5, 2);
  for (TorusClass c : {TorusClass{1, 0}, TorusClass{2, 1}, TorusClass{1, -3}}) {
    auto prof = torus_offset_profile(tm, f, c);
    for (double s : {0.0, 0.25, 0.7}) {
      double direct = xray_tensor(m, f, c, s * prof.transversal).value;
      CHECK(prof.value(s) == doctest::Approx(direct).epsilon(1e-12));
    }
    double lo = 1e300, hi = 0.0;
    for (int i = 0; i < 2000; ++i) {
      double v = prof.value(i / 2000.0);
      lo = std::min(lo, v);
      hi = std::max(hi, std::abs(v));
    }
    CHECK(prof.min() <= lo + 1e-12);
    CHECK(prof.min() >= lo - 1e-4);
    CHECK(prof.sup_abs() >= hi - 1e-12);
  }
}

TEST_CASE("hyperbolic X-ray against brute-force quadrature") {
  FuchsianModel fm = FuchsianModel::bolza();
  Model m = fm;
  BumpField f(fm, 2, {BumpTerm{cplx(0.1, -0.2), 1.2, {0.3, 0.1, -0.2}},
                      BumpTerm{cplx(-0.3, 0.1), 0.8, {0.1, 0.0, 0.4}}});
  for (const char* w : {"a", "ab", "aBc"}) {
    auto c = ConjugacyClass{canonicalize(w)};
    auto r = xray_tensor(m, f, c);
    CHECK(r.error.empty());
    CHECK(r.value == doctest::Approx(brute_disk(m, f, c, 20000)).epsilon(1e-6));
  }
  BumpField zero(fm, 2, {});
  CHECK(xray_tensor(m, zero, ConjugacyClass{canonicalize("a")}).value == 0.0);
}
