#include "mlslab/xray.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "mlslab/errors.hpp"
#include "mlslab/parallel.hpp"

namespace mlslab {

using std::numbers::pi;

namespace {

// Bezout vector (r, t) with p t - q r = 1 for primitive (p, q).
Vec2 transversal_of(int p, int q) {
  long r0 = p, r1 = q, s0 = 1, s1 = 0, t0 = 0, t1 = 1;  // s*p + t*q = gcd
  while (r1 != 0) {
    long k = r0 / r1;
    long tmp = r0 - k * r1;
    r0 = r1;
    r1 = tmp;
    tmp = s0 - k * s1;
    s0 = s1;
    s1 = tmp;
    tmp = t0 - k * t1;
    t0 = t1;
    t1 = tmp;
  }
  if (r0 < 0) {
    s0 = -s0;
    t0 = -t0;
  }
  // s0 p + t0 q = 1  ->  r = -t0, t = s0
  return Vec2(double(-t0), double(s0));
}

double simpson_adapt(const std::function<double(double)>& F, double a, double b, double fa,
                     double fm, double fb, double whole, double tol, int depth, double& err) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = F(lm), frm = F(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double diff = left + right - whole;
  if (std::abs(diff) <= 15.0 * tol) {
    err += std::abs(diff) / 15.0;
    return left + right + diff / 15.0;
  }
  if (depth <= 0) throw NumericalError("adaptive quadrature did not converge");
  return simpson_adapt(F, a, m, fa, flm, fm, left, tol / 2.0, depth - 1, err) +
         simpson_adapt(F, m, b, fm, frm, fb, right, tol / 2.0, depth - 1, err);
}

}  // namespace

double OffsetProfile::value(double s) const {
  double v = 0.0;
  for (int j = -J; j <= J; ++j) v += (coeffs[j + J] * std::polar(1.0, 2.0 * pi * j * s)).real();
  return v;
}

double OffsetProfile::extremum(double sign) const {
  if (J == 0) return 0.0;
  auto val = [&](double s) { return sign * value(s); };
  const int N = 64 * (J + 1);
  int best = 0;
  double bv = val(0.0);
  for (int i = 1; i < N; ++i) {
    double v = val(double(i) / N);
    if (v < bv) {
      bv = v;
      best = i;
    }
  }
  // golden-section refinement on the bracketing cell
  double lo = double(best - 1) / N, hi = double(best + 1) / N;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = val(x1), f2 = val(x2);
  for (int it = 0; it < 80; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = val(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = val(x2);
    }
  }
  double s = 0.5 * (lo + hi);
  return s - std::floor(s);
}

double OffsetProfile::sup_abs() const {
  return std::max(std::abs(value(extremum(1.0))), std::abs(value(extremum(-1.0))));
}

OffsetProfile torus_offset_profile(const TorusModel& m, const TorusField& f, const TorusClass& c) {
  if (c.p == 0 && c.q == 0) throw TrivialClassError("trivial class has no geodesic");
  int g = std::gcd(std::abs(c.p), std::abs(c.q));
  int pp = c.p / g, qq = c.q / g;
  OffsetProfile prof;
  prof.transversal = transversal_of(pp, qq);
  Vec2 v(c.p, c.q);
  v /= std::sqrt(v.dot(m.gram * v));
  // resonant modes k = j * (-qq, pp)
  int J = 0;
  while (std::max(std::abs((J + 1) * qq), std::abs((J + 1) * pp)) <= f.K()) ++J;
  prof.J = J;
  prof.coeffs.assign(2 * J + 1, 0.0);
  const int md = f.degree();
  for (int j = -J; j <= J; ++j) {
    int kx = -j * qq, ky = j * pp;
    cplx s = 0.0;
    for (int i = 0; i <= md; ++i)
      s += binomial(md, i) * f.coeff(i, kx, ky) * std::pow(v.x(), md - i) * std::pow(v.y(), i);
    // exp(2 pi i k . (s * transversal)) = exp(2 pi i j s) since k . (r, t) = j
    prof.coeffs[j + J] = s;
  }
  return prof;
}

XrayRecord xray_tensor(const Model& m, const Field& f, const ConjugacyClass& c, Vec2 x0) {
  XrayRecord rec;
  rec.cls = c;
  rec.L0 = background_length(m, c);
  if (const auto* tm = std::get_if<TorusModel>(&m)) {
    const auto* tf = std::get_if<TorusField>(&f);
    if (!tf) throw ConfigError("torus model needs a Fourier field");
    const auto& tc = std::get<TorusClass>(c);
    Vec2 v = Vec2(tc.p, tc.q) / rec.L0;
    const int md = tf->degree();
    double val = 0.0;
    // Over one period the mode integral is 1 if k.(p,q) = 0, else 0.
    for (int kx = -tf->K(); kx <= tf->K(); ++kx)
      for (int ky = -tf->K(); ky <= tf->K(); ++ky) {
        if (kx * tc.p + ky * tc.q != 0) continue;
        cplx s = 0.0;
        for (int i = 0; i <= md; ++i)
          s += binomial(md, i) * tf->coeff(i, kx, ky) * std::pow(v.x(), md - i) * std::pow(v.y(), i);
        val += (s * std::polar(1.0, 2.0 * pi * (kx * x0.x() + ky * x0.y()))).real();
      }
    (void)tm;
    rec.value = val;
    return rec;
  }
  const auto* bf = std::get_if<BumpField>(&f);
  if (!bf) throw ConfigError("Fuchsian model needs a bump field");
  BackgroundGeodesic geo = background_geodesic(m, c);
  auto F = [&](double t) {
    TangentPoint p = geo.point_at(t);
    return bf->pullback(p.x, p.v);
  };
  const double L = rec.L0;
  const int panels = std::max(8, static_cast<int>(std::ceil(L / 0.05)));
  const double h = L / panels;
  double total = 0.0, err = 0.0;
  const double tol = 1e-11 * std::max(1.0, L);
  for (int i = 0; i < panels; ++i) {
    double a = i * h, b = a + h;
    double fa = F(a), fm = F(0.5 * (a + b)), fb = F(b);
    double whole = h / 6.0 * (fa + 4.0 * fm + fb);
    total += simpson_adapt(F, a, b, fa, fm, fb, whole, tol / panels, 40, err);
  }
  rec.value = total / L;
  rec.quad_err = err / L;
  return rec;
}

XrayBatch xray_batch(const Model& m, const Field& f, const std::vector<ConjugacyClass>& classes) {
  XrayBatch out;
  out.records.resize(classes.size());
  parallel_for(classes.size(), [&](std::size_t i) {
    try {
      out.records[i] = xray_tensor(m, f, classes[i]);
    } catch (const Error& e) {
      XrayRecord r;
      r.cls = classes[i];
      r.error = std::string(e.kind()) + ": " + e.what();
      out.records[i] = r;
    }
  });
  for (const auto& r : out.records)
    if (r.error.empty()) out.sup_norm = std::max(out.sup_norm, std::abs(r.value));
  return out;
}

}  // namespace mlslab
