#include "mlslab/models.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "mlslab/errors.hpp"

namespace mlslab {

using std::numbers::pi;

Mobius to_origin(cplx z) {
  double s = std::sqrt(1.0 - std::norm(z));
  return {cplx(1.0 / s, 0.0), -z / s};
}

double disk_distance(cplx z, cplx w) {
  double r = std::abs(z - w) / std::abs(1.0 - std::conj(w) * z);
  return 2.0 * std::atanh(std::min(r, 1.0 - 1e-16));
}

TorusModel::TorusModel(const Mat2& g) : gram(g) {
  if (std::abs(g(0, 1) - g(1, 0)) > 1e-14 * g.norm())
    throw InvalidModelError("gram matrix is not symmetric");
  if (g.determinant() <= 0.0 || g.trace() <= 0.0)
    throw InvalidModelError("gram matrix is not positive-definite");
}

bool is_torus(const Model& m) { return std::holds_alternative<TorusModel>(m); }

// ---------------------------------------------------------------------------
// Bolza group

FuchsianModel FuchsianModel::bolza() {
  FuchsianModel m;
  const double ch = 1.0 + std::sqrt(2.0);  // cosh of half the translation length
  const double sh = std::sqrt(ch * ch - 1.0);
  for (int k = 0; k < 4; ++k) {
    Mobius g{cplx(ch, 0.0), std::polar(sh, k * pi / 4.0)};
    m.sides_[2 * k] = g;
    m.sides_[2 * k + 1] = g.inv();
  }
  const auto& s = m.sides_;
  // a = g0, b = g1^-1, c = g2^-1 g3, d = g0 g1^-1 g2
  std::array<Mobius, 4> base{s[0], s[3], s[5] * s[6], s[0] * s[3] * s[4]};
  for (int i = 0; i < 4; ++i) {
    m.gens_[2 * i] = base[i];
    m.gens_[2 * i + 1] = base[i].inv();
  }
  const std::array<const char*, 4> side_text{"a", "B", "BAd", "ABcd"};
  for (int k = 0; k < 4; ++k) {
    m.side_words_[2 * k] = parse_word(side_text[k]);
    m.side_words_[2 * k + 1] = inverse(std::span<const Letter>(m.side_words_[2 * k]));
  }

  auto dist_to_pm_identity = [](const Mobius& x) {
    double plus = std::abs(x.a - 1.0) + std::abs(x.b);
    double minus = std::abs(x.a + 1.0) + std::abs(x.b);
    return std::min(plus, minus);
  };
  const auto& r = relator();
  m.relator_residual_ = dist_to_pm_identity(m.word_matrix(r));
  if (m.relator_residual_ > 1e-9)
    throw InvalidModelError("relator residual too large");
  for (int k = 0; k < 8; ++k) {
    Mobius w = m.word_matrix(m.side_words_[k]);
    if (dist_to_pm_identity(w * m.sides_[k].inv()) > 1e-9)
      throw InvalidModelError("side pairing does not match its word");
  }
  for (const auto& g : m.gens_)
    if (std::abs(g.trace()) <= 2.0) throw InvalidModelError("non-hyperbolic generator");

  m.inradius_ = std::acosh(ch);
  m.circumradius_ = std::acosh(ch * ch);
  m.systole_ = 2.0 * std::acosh(std::abs(m.gens_[0].trace()) / 2.0);
  const double rv = std::tanh(m.circumradius_ / 2.0);
  for (int j = 0; j < 8; ++j) m.vertices_[j] = std::polar(rv, pi / 8.0 + j * pi / 4.0);
  return m;
}

Mat2 FuchsianModel::sl2r(Letter x) const {
  using C2 = Eigen::Matrix2cd;
  const cplx I(0.0, 1.0);
  const Mobius& g = generator(x);
  C2 M;
  M << g.a, g.b, std::conj(g.b), std::conj(g.a);
  C2 Cy;  // upper half-plane -> disk
  Cy << 1.0, -I, 1.0, I;
  C2 H = Cy.inverse() * M * Cy;
  return H.real();
}

Mobius FuchsianModel::word_matrix(std::span<const Letter> w) const {
  Mobius acc;
  for (Letter x : w) acc = acc * generator(x);
  return acc;
}

bool FuchsianModel::in_domain(cplx z, double tol) const {
  double r = std::abs(z);
  for (const auto& s : sides_)
    if (r > std::abs(s(z)) + tol) return false;
  return true;
}

// ---------------------------------------------------------------------------

double background_length(const Model& m, const ConjugacyClass& c) {
  if (is_trivial(c)) throw TrivialClassError("trivial class has no geodesic");
  if (auto* t = std::get_if<TorusModel>(&m)) {
    const auto* tc = std::get_if<TorusClass>(&c);
    if (!tc) throw ConfigError("surface word used with the torus model");
    Vec2 v(tc->p, tc->q);
    return std::sqrt(v.dot(t->gram * v));
  }
  const auto& f = std::get<FuchsianModel>(m);
  const auto* cw = std::get_if<CyclicWord>(&c);
  if (!cw) throw ConfigError("torus class used with the Fuchsian model");
  double tr = std::abs(f.word_matrix(cw->letters()).trace());
  if (tr <= 2.0) throw InvalidModelError("class is not hyperbolic");
  return 2.0 * std::acosh(tr / 2.0);
}

TangentPoint BackgroundGeodesic::lift_at(double t) const {
  if (!fuchsian_) return {x0_ + t * dir_, dir_};
  double s = std::tanh(t / 2.0);
  cplx z = frame_(s);
  cplx v = frame_.deriv(s) * (0.5 * (1.0 - s * s));
  return {to_vec(z), to_vec(v)};
}

TangentPoint BackgroundGeodesic::point_at(double t) const {
  if (!fuchsian_) {
    Vec2 x = x0_ + t * dir_;
    return {Vec2(x.x() - std::floor(x.x()), x.y() - std::floor(x.y())), dir_};
  }
  // Stay near the foot point: the second half of the period is the image of
  // the segment before it.
  TangentPoint p = lift_at(t > length_ / 2.0 ? t - length_ : t);
  Mobius deck;
  cplx z = to_cplx(p.x);
  cplx zr = reduce_point(*fuchsian_, z, &deck);
  cplx v = deck.inv().deriv(z) * to_cplx(p.v);
  return {to_vec(zr), to_vec(v)};
}

BackgroundGeodesic background_geodesic(const Model& m, const ConjugacyClass& c, Vec2 x0) {
  BackgroundGeodesic g;
  g.cls_ = c;
  g.length_ = background_length(m, c);
  if (const auto* t = std::get_if<TorusModel>(&m)) {
    (void)t;
    const auto& tc = std::get<TorusClass>(c);
    g.x0_ = x0;
    g.dir_ = Vec2(tc.p, tc.q) / g.length_;
    return g;
  }
  const auto& f = std::get<FuchsianModel>(m);
  g.fuchsian_ = &f;
  Mobius M = f.word_matrix(std::get<CyclicWord>(c).letters());
  const cplx al = M.a, be = M.b;
  double re = std::abs(al.real());
  cplx root = std::sqrt(re * re - 1.0);
  cplx z1 = (cplx(0.0, al.imag()) + root) / std::conj(be);
  cplx z2 = (cplx(0.0, al.imag()) - root) / std::conj(be);
  cplx att = std::abs(M.deriv(z1)) < 1.0 ? z1 : z2;
  cplx rep = att == z1 ? z2 : z1;
  att /= std::abs(att);
  rep /= std::abs(rep);
  cplx foot(0.0, 0.0);
  cplx u = att + rep;
  if (std::abs(u) > 1e-14) {
    double cosang = std::clamp((att * std::conj(rep)).real(), -1.0, 1.0);
    double half = std::acos(cosang) / 2.0;
    double rho = (1.0 - std::sin(half)) / std::cos(half);
    foot = rho * u / std::abs(u);
  }
  Mobius P = to_origin(foot).inv();
  cplx w = P.inv()(att);
  double omega = std::arg(w);
  Mobius rot{std::polar(1.0, omega / 2.0), cplx(0.0, 0.0)};
  g.frame_ = P * rot;
  return g;
}

// ---------------------------------------------------------------------------

TorusReduction reduce_to_fundamental_domain(const TorusModel&, Vec2 x) {
  TorusReduction r;
  double fx = std::floor(x.x()), fy = std::floor(x.y());
  r.point = Vec2(x.x() - fx, x.y() - fy);
  // guard against x - floor(x) rounding up to 1
  if (r.point.x() >= 1.0) {
    r.point.x() = 0.0;
    fx += 1.0;
  }
  if (r.point.y() >= 1.0) {
    r.point.y() = 0.0;
    fy += 1.0;
  }
  r.p = static_cast<int>(fx);
  r.q = static_cast<int>(fy);
  return r;
}

namespace {

template <class OnStep>
cplx reduce_impl(const FuchsianModel& m, cplx z, OnStep&& on_step) {
  const auto& sides = m.side_pairings();
  for (int step = 0; step < 10000; ++step) {
    double r = std::abs(z);
    int best = -1;
    double best_r = r * (1.0 - 1e-15);
    cplx best_z;
    for (int k = 0; k < 8; ++k) {
      cplx w = sides[k](z);
      double rw = std::abs(w);
      if (rw < best_r) {
        best = k;
        best_r = rw;
        best_z = w;
      }
    }
    if (best < 0) return z;
    on_step(best);
    z = best_z;
  }
  throw NumericalError("fundamental-domain reduction did not converge");
}

}  // namespace

cplx reduce_point(const FuchsianModel& m, cplx z, Mobius* deck) {
  if (std::abs(z) >= 1.0) throw ConfigError("point outside the unit disk");
  Mobius acc;
  const auto& sides = m.side_pairings();
  cplx out = reduce_impl(m, z, [&](int k) { acc = acc * sides[k].inv(); });
  if (deck) *deck = acc;
  return out;
}

DiskReduction reduce_to_fundamental_domain(const FuchsianModel& m, cplx z) {
  if (std::abs(z) >= 1.0) throw ConfigError("point outside the unit disk");
  DiskReduction r;
  Word w;
  const auto& sides = m.side_pairings();
  r.point = reduce_impl(m, z, [&](int k) {
    r.deck = r.deck * sides[k].inv();
    const Word& sw = m.side_word(k ^ 1);
    w.insert(w.end(), sw.begin(), sw.end());
  });
  r.word = free_reduce(w);
  return r;
}

// ---------------------------------------------------------------------------

TangentPoint geodesic_flow(const Model& m, const TangentPoint& p, double t) {
  if (is_torus(m)) return {p.x + t * p.v, p.v};
  cplx z = to_cplx(p.x);
  Mobius M = to_origin(z);
  cplx u = M.deriv(z) * to_cplx(p.v);
  u /= std::abs(u);
  double s = std::tanh(t / 2.0);
  Mobius Mi = M.inv();
  cplx w = s * u;
  return {to_vec(Mi(w)), to_vec(Mi.deriv(w) * u * (0.5 * (1.0 - s * s)))};
}

namespace {

double torus_liouville(const TorusModel& t, const FiberFunction& F, const LiouvilleOptions& opt) {
  const int N = opt.torus_grid, M = opt.fiber;
  Mat2 Linv = t.gram.llt().matrixL().toDenseMatrix().inverse().transpose();
  std::vector<Vec2> fiber(M);
  for (int j = 0; j < M; ++j) {
    double th = 2.0 * pi * j / M;
    fiber[j] = Linv * Vec2(std::cos(th), std::sin(th));
  }
  double sum = 0.0;
  for (int i = 0; i < N; ++i) {
    double row = 0.0;
    for (int k = 0; k < N; ++k) {
      Vec2 x(double(i) / N, double(k) / N);
      double fs = 0.0;
      for (const auto& v : fiber) fs += F(x, v);
      row += fs;
    }
    sum += row;
  }
  return sum / (double(N) * N * M);
}

struct DiskSums {
  double integral = 0.0;
  double area = 0.0;
};

// Degree-5 seven-point rule on triangles, barycentric (l0, l1, l2, weight).
const std::array<std::array<double, 4>, 7>& radon7() {
  static const std::array<std::array<double, 4>, 7> rule = [] {
    const double r15 = std::sqrt(15.0);
    const double a1 = (6.0 - r15) / 21.0, b1 = (9.0 + 2.0 * r15) / 21.0;
    const double a2 = (6.0 + r15) / 21.0, b2 = (9.0 - 2.0 * r15) / 21.0;
    const double w1 = (155.0 - r15) / 1200.0, w2 = (155.0 + r15) / 1200.0;
    return std::array<std::array<double, 4>, 7>{{{1.0 / 3, 1.0 / 3, 1.0 / 3, 9.0 / 40},
                                                 {b1, a1, a1, w1},
                                                 {a1, b1, a1, w1},
                                                 {a1, a1, b1, w1},
                                                 {b2, a2, a2, w2},
                                                 {a2, b2, a2, w2},
                                                 {a2, a2, b2, w2}}};
  }();
  return rule;
}

DiskSums disk_sums(const FuchsianModel& f, const FiberFunction& F, int level, int M) {
  const int n = 1 << level;
  const double rk = std::tanh(f.circumradius());  // Klein radius of vertices
  std::vector<Vec2> fib(M);
  for (int j = 0; j < M; ++j) {
    double th = 2.0 * pi * j / M;
    fib[j] = Vec2(std::cos(th), std::sin(th));
  }
  DiskSums out;
  const auto& rule = radon7();
  auto tri = [&](const Vec2& p0, const Vec2& p1, const Vec2& p2) {
    double area = 0.5 * std::abs((p1 - p0).x() * (p2 - p0).y() - (p1 - p0).y() * (p2 - p0).x());
    double si = 0.0, sa = 0.0;
    for (const auto& q : rule) {
      Vec2 k = q[0] * p0 + q[1] * p1 + q[2] * p2;
      double k2 = k.squaredNorm();
      double dens = std::pow(1.0 - k2, -1.5);
      Vec2 z = k / (1.0 + std::sqrt(1.0 - k2));
      double lam = disk_lambda(to_cplx(z));
      double fs = 0.0;
      for (const auto& e : fib) fs += F(z, e / lam);
      si += q[3] * dens * fs / M;
      sa += q[3] * dens;
    }
    out.integral += area * si;
    out.area += area * sa;
  };
  for (int j = 0; j < 8; ++j) {
    Vec2 O = Vec2::Zero();
    Vec2 A = rk * Vec2(std::cos(pi / 8 + j * pi / 4), std::sin(pi / 8 + j * pi / 4));
    Vec2 B = rk * Vec2(std::cos(pi / 8 + (j + 1) * pi / 4), std::sin(pi / 8 + (j + 1) * pi / 4));
    auto P = [&](int i, int k) -> Vec2 {
      return O + (double(i) / n) * (A - O) + (double(k) / n) * (B - O);
    };
    for (int i = 0; i < n; ++i)
      for (int k = 0; i + k < n; ++k) {
        tri(P(i, k), P(i + 1, k), P(i, k + 1));
        if (i + k < n - 1) tri(P(i + 1, k), P(i + 1, k + 1), P(i, k + 1));
      }
  }
  return out;
}

}  // namespace

double liouville_average(const Model& m, const FiberFunction& F, const LiouvilleOptions& opt) {
  if (const auto* t = std::get_if<TorusModel>(&m)) return torus_liouville(*t, F, opt);
  const auto& f = std::get<FuchsianModel>(m);
  DiskSums c = disk_sums(f, F, opt.disk_level, opt.fiber);
  DiskSums fine = disk_sums(f, F, opt.disk_level + 1, opt.fiber);
  double I = (64.0 * fine.integral - c.integral) / 63.0;
  double A = (64.0 * fine.area - c.area) / 63.0;
  return I / A;
}

// ---------------------------------------------------------------------------

std::vector<ConjugacyClass> enumerate_classes(const Model& m, int bound) {
  std::vector<std::pair<double, ConjugacyClass>> items;
  if (bound <= 0) return {};
  if (is_torus(m)) {
    for (const auto& c : enumerate_torus_classes(bound)) items.emplace_back(background_length(m, c), c);
  } else {
    for (auto& w : enumerate_surface_classes(bound)) {
      ConjugacyClass c = std::move(w);
      items.emplace_back(background_length(m, c), std::move(c));
    }
  }
  std::stable_sort(items.begin(), items.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first < y.first;
    return x.second < y.second;
  });
  std::vector<ConjugacyClass> out;
  out.reserve(items.size());
  for (auto& it : items) out.push_back(std::move(it.second));
  return out;
}

namespace {

struct LengthSearch {
  const FuchsianModel& f;
  double T;
  int max_word;
  double cosh_prune;  // prefix bound on cosh d(o, w o)
  double cosh_R;
  int follows[8][8] = {};  // +1 / -1 if (x, y) is consecutive in the vertex relator
  std::vector<int> word;
  std::map<CyclicWord, double> found;

  LengthSearch(const FuchsianModel& fm, double T_, int mw)
      : f(fm), T(T_), max_word(mw) {
    cosh_prune = std::cosh(T + 2.0 * f.circumradius());
    cosh_R = std::cosh(f.circumradius());
    // g0 g1^-1 g2 g3^-1 g0^-1 g1 g2^-1 g3 = 1 in side-pairing indices
    const int rel[8] = {0, 3, 4, 7, 1, 2, 5, 6};
    for (int i = 0; i < 8; ++i) {
      follows[rel[i]][rel[(i + 1) % 8]] = 1;
      // inverse relator: reversed, each letter inverted
      follows[rel[(i + 1) % 8] ^ 1][rel[i] ^ 1] = -1;
    }
  }

  void visit(const Mobius& g) {
    double tr = std::abs(g.trace());
    if (tr <= 2.0) return;
    double L = 2.0 * std::acosh(tr / 2.0);
    if (L > T) return;
    // distance r from the origin to the axis: cosh d = cosh^2 r cosh L - sinh^2 r
    double cd = 2.0 * std::norm(g.a) - 1.0;
    double sh2 = (cd - std::cosh(L)) / (std::cosh(L) - 1.0);
    if (sh2 > cosh_R * cosh_R - 1.0 + 1e-9) return;
    Word w;
    for (int k : word) {
      const Word& sw = f.side_word(k);
      w.insert(w.end(), sw.begin(), sw.end());
    }
    CyclicWord cw = canonicalize(w);
    found.emplace(std::move(cw), L);
  }

  void dfs(const Mobius& g, int run, int sign) {
    if (!word.empty()) visit(g);
    if (static_cast<int>(word.size()) >= max_word) return;
    for (int k = 0; k < 8; ++k) {
      int nrun = 0, nsign = 0;
      if (!word.empty()) {
        int last = word.back();
        if (k == (last ^ 1)) continue;
        nsign = follows[last][k];
        nrun = nsign != 0 ? (nsign == sign ? run + 1 : 1) : 0;
        if (nrun >= 4) continue;
      }
      Mobius h = g * f.side_pairings()[k];
      if (2.0 * std::norm(h.a) - 1.0 > cosh_prune) continue;
      word.push_back(k);
      dfs(h, nrun, nsign);
      word.pop_back();
    }
  }
};

}  // namespace

std::vector<LengthClass> enumerate_by_length(const FuchsianModel& m, double T, int max_word) {
  LengthSearch s(m, T, max_word);
  s.dfs(Mobius{}, 0, 0);
  std::vector<LengthClass> out;
  out.reserve(s.found.size());
  for (auto& [w, L] : s.found) out.push_back({w, L});
  std::stable_sort(out.begin(), out.end(), [](const LengthClass& x, const LengthClass& y) {
    if (x.length != y.length) return x.length < y.length;
    return x.word < y.word;
  });
  return out;
}

}  // namespace mlslab
