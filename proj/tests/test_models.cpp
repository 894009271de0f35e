#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>

#include "mlslab/errors.hpp"
#include "mlslab/models.hpp"

using namespace mlslab;

TEST_CASE("torus background lengths") {
  Model sq = TorusModel();
  CHECK(background_length(sq, TorusClass{2, 1}) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-15));
  Mat2 G;
  G << 1.3, 0.2, 0.2, 0.8;
  Model m = TorusModel(G);
  CHECK(background_length(m, TorusClass{1, -1}) == doctest::Approx(std::sqrt(1.3 - 0.4 + 0.8)));
  CHECK_THROWS_AS(background_length(m, TorusClass{0, 0}), TrivialClassError);
  Mat2 bad;
  bad << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(TorusModel{bad}, InvalidModelError);
}

TEST_CASE("Bolza group") {
  FuchsianModel fm = FuchsianModel::bolza();
  Model m = fm;
  CHECK(fm.relator_residual() <= 1e-9);
  const double sys = 2.0 * std::acosh(1.0 + std::sqrt(2.0));
  CHECK(fm.systole() == doctest::Approx(sys).epsilon(1e-12));
  for (const char* g : {"a", "b", "c", "d", "A", "B", "C", "D"}) {
    double tr = std::abs(fm.word_matrix(parse_word(g)).trace());
    CHECK(tr == doctest::Approx(2.0 * (1.0 + std::sqrt(2.0))).epsilon(1e-12));
    CHECK(background_length(m, canonicalize(g)) == doctest::Approx(sys).epsilon(1e-12));
  }
  // generators are orientation-preserving disk isometries
  for (int x = 0; x < 8; ++x) {
    const Mobius& g = fm.generator(static_cast<Letter>(x));
    CHECK(std::norm(g.a) - std::norm(g.b) == doctest::Approx(1.0).epsilon(1e-12));
  }
  // trace 3 gives 2 arccosh(1.5)
  CHECK(2.0 * std::acosh(3.0 / 2.0) == doctest::Approx(1.9248473).epsilon(1e-7));
}

TEST_CASE("background geodesics") {
  Model sq = TorusModel();
  auto g = background_geodesic(sq, TorusClass{1, 1});
  auto p = g.point_at(0.5);
  CHECK(p.x.x() == doctest::Approx(0.5 / std::sqrt(2.0)));
  CHECK(p.v.x() == doctest::Approx(1.0 / std::sqrt(2.0)));
  auto h = background_geodesic(sq, TorusClass{1, 0});
  CHECK(h.point_at(1.25).x.x() == doctest::Approx(0.25));

  FuchsianModel fm = FuchsianModel::bolza();
  Model m = fm;
  for (const char* w : {"a", "ab", "aBc", "abCd"}) {
    auto cls = canonicalize(w);
    auto geo = background_geodesic(m, cls);
    Mobius M = fm.word_matrix(cls.letters());
    cplx z0 = to_cplx(geo.lift_at(0.0).x);
    cplx zL = to_cplx(geo.lift_at(geo.length()).x);
    double res = std::min(disk_distance(M(z0), zL), disk_distance(M.inv()(z0), zL));
    CHECK(res <= 1e-8);
    for (double t : {0.0, 0.3, 1.7}) {
      auto q = geo.lift_at(t);
      CHECK(disk_lambda(to_cplx(q.x)) * q.v.norm() == doctest::Approx(1.0).epsilon(1e-10));
      auto r = geo.point_at(t);
      CHECK(fm.in_domain(to_cplx(r.x), 1e-9));
    }
    CHECK(disk_distance(z0, to_cplx(geo.lift_at(1.0).x)) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("reduction to the fundamental domain") {
  TorusModel tm;
  auto r = reduce_to_fundamental_domain(tm, Vec2(1.25, -0.5));
  CHECK(r.point.x() == doctest::Approx(0.25));
  CHECK(r.point.y() == doctest::Approx(0.5));
  CHECK(r.p == 1);
  CHECK(r.q == -1);
  auto r0 = reduce_to_fundamental_domain(tm, Vec2(0.3, 0.7));
  CHECK(r0.p == 0);
  CHECK(r0.q == 0);

  FuchsianModel fm = FuchsianModel::bolza();
  cplx z = fm.generator(Letter::A)(0.0);
  auto d = reduce_to_fundamental_domain(fm, z);
  CHECK(std::abs(d.point) <= 1e-12);
  CHECK(to_string(d.word) == "A");
  cplx w(0.3, -0.2);
  cplx far = fm.word_matrix(parse_word("abCdA"))(w);
  auto d2 = reduce_to_fundamental_domain(fm, far);
  CHECK(fm.in_domain(d2.point, 1e-9));
  CHECK(std::abs(d2.deck(d2.point) - far) <= 1e-9);
}

TEST_CASE("Liouville averages") {
  TorusModel tm;
  Model m = tm;
  CHECK(liouville_average(m, [](const Vec2&, const Vec2&) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(liouville_average(m, [](const Vec2&, const Vec2& v) { return v.x() * v.x(); }) ==
        doctest::Approx(0.5).epsilon(1e-14));
  CHECK(std::abs(liouville_average(m, [](const Vec2& x, const Vec2& v) {
          return std::cos(2 * M_PI * x.y()) * v.y() + v.x();
        })) <= 1e-14);
  Model hm = FuchsianModel::bolza();
  CHECK(liouville_average(hm, [](const Vec2&, const Vec2&) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(liouville_average(hm, [](const Vec2& z, const Vec2& v) {
          return disk_lambda(to_cplx(z)) * (v.x() + 0.3 * v.y());
        })) <= 1e-10);
}

TEST_CASE("enumeration by length agrees with word enumeration") {
  FuchsianModel fm = FuchsianModel::bolza();
  Model m = fm;
  const double T = 7.0;
  auto geo = enumerate_by_length(fm, T, 12);
  std::set<CyclicWord> gs;
  for (const auto& c : geo) {
    gs.insert(c.word);
    CHECK(c.length <= T);
    CHECK(background_length(m, c.word) == doctest::Approx(c.length).epsilon(1e-12));
  }
  CHECK(gs.size() == geo.size());
  for (const auto& c : enumerate_surface_classes(6))
    if (background_length(m, c) <= T) CHECK(gs.count(c) == 1);
}
