#include "mlslab/tensors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "mlslab/errors.hpp"
#include "mlslab/simd.hpp"

namespace mlslab {

using std::numbers::pi;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

TorusField::TorusField(int degree, int K) : degree_(degree), K_(K) {
  if (degree < 0 || degree > 3) throw ConfigError("tensor degree must be 0..3");
  if (K < 0) throw ConfigError("band limit must be nonnegative");
  std::size_t n = static_cast<std::size_t>(degree + 1) * side() * side();
  re_.assign(n, 0.0);
  im_.assign(n, 0.0);
}

void TorusField::set_real_mode(int comp, int kx, int ky, cplx v) {
  if (kx == 0 && ky == 0) v = cplx(v.real(), 0.0);
  set(comp, kx, ky, v);
  set(comp, -kx, -ky, std::conj(v));
}

TorusField TorusField::with_band(int K2) const {
  TorusField out(degree_, K2);
  int Km = std::min(K_, K2);
  for (int j = 0; j < components(); ++j)
    for (int kx = -Km; kx <= Km; ++kx)
      for (int ky = -Km; ky <= Km; ++ky) out.set(j, kx, ky, coeff(j, kx, ky));
  return out;
}

double TorusField::max_conjugate_asymmetry() const {
  double worst = 0.0;
  for (int j = 0; j < components(); ++j)
    for (int kx = -K_; kx <= K_; ++kx)
      for (int ky = -K_; ky <= K_; ++ky)
        worst = std::max(worst, std::abs(coeff(j, kx, ky) - std::conj(coeff(j, -kx, -ky))));
  return worst;
}

namespace {
void check_same_shape(const TorusField& a, const TorusField& b) {
  if (a.degree() != b.degree() || a.K() != b.K())
    throw ConfigError("field shapes differ (degree or band limit)");
}
}  // namespace

TorusField& TorusField::operator+=(const TorusField& o) {
  check_same_shape(*this, o);
  for (std::size_t i = 0; i < re_.size(); ++i) {
    re_[i] += o.re_[i];
    im_[i] += o.im_[i];
  }
  return *this;
}

TorusField& TorusField::operator-=(const TorusField& o) {
  check_same_shape(*this, o);
  for (std::size_t i = 0; i < re_.size(); ++i) {
    re_[i] -= o.re_[i];
    im_[i] -= o.im_[i];
  }
  return *this;
}

TorusField& TorusField::operator*=(double s) {
  for (std::size_t i = 0; i < re_.size(); ++i) {
    re_[i] *= s;
    im_[i] *= s;
  }
  return *this;
}

TorusField operator+(TorusField a, const TorusField& b) { return a += b; }
TorusField operator-(TorusField a, const TorusField& b) { return a -= b; }
TorusField operator*(double s, TorusField a) { return a *= s; }

TorusField constant_field(const std::vector<double>& comps, int K) {
  TorusField f(static_cast<int>(comps.size()) - 1, K);
  for (int j = 0; j < f.components(); ++j) f.set(j, 0, 0, comps[j]);
  return f;
}

TorusField conformal_field(const TorusModel& m, const TorusField& u) {
  if (u.degree() != 0) throw ConfigError("conformal factor must be a scalar field");
  TorusField f(2, u.K());
  const double g[3] = {m.gram(0, 0), m.gram(0, 1), m.gram(1, 1)};
  for (int kx = -u.K(); kx <= u.K(); ++kx)
    for (int ky = -u.K(); ky <= u.K(); ++ky)
      for (int j = 0; j < 3; ++j) f.set(j, kx, ky, 2.0 * g[j] * u.coeff(0, kx, ky));
  return f;
}

// ---------------------------------------------------------------------------
// Evaluation

FieldEvaluator::FieldEvaluator(const TorusField& f) : f_(&f), n_(f.side()) {
  kyre_.resize(f.re().size());
  kyim_.resize(f.im().size());
  for (int j = 0; j < f.components(); ++j)
    for (int kx = -f.K(); kx <= f.K(); ++kx)
      for (int ky = -f.K(); ky <= f.K(); ++ky) {
        std::size_t i = f.index(j, kx, ky);
        kyre_[i] = ky * f.re()[i];
        kyim_[i] = ky * f.im()[i];
      }
  exr_.resize(n_);
  exi_.resize(n_);
  eyr_.resize(n_);
  eyi_.resize(n_);
  sr_.resize(n_);
  si_.resize(n_);
  tr_.resize(n_);
  ti_.resize(n_);
}

namespace {
void fill_phases(double x, int K, double* re, double* im) {
  const double c = std::cos(2.0 * pi * x), s = std::sin(2.0 * pi * x);
  re[K] = 1.0;
  im[K] = 0.0;
  for (int k = 1; k <= K; ++k) {
    double r = re[K + k - 1] * c - im[K + k - 1] * s;
    double i = re[K + k - 1] * s + im[K + k - 1] * c;
    re[K + k] = r;
    im[K + k] = i;
    re[K - k] = r;
    im[K - k] = -i;
  }
}
}  // namespace

void FieldEvaluator::phases(const Vec2& x) {
  fill_phases(x.x(), f_->K(), exr_.data(), exi_.data());
  fill_phases(x.y(), f_->K(), eyr_.data(), eyi_.data());
}

void FieldEvaluator::values(const Vec2& x, double* vals) {
  phases(x);
  const auto& kr = simd::kernels();
  const double* cre = f_->re().data();
  const double* cim = f_->im().data();
  for (int j = 0; j < f_->components(); ++j) {
    for (int r = 0; r < n_; ++r) {
      std::size_t off = (static_cast<std::size_t>(j) * n_ + r) * n_;
      kr.cdot(cre + off, cim + off, eyr_.data(), eyi_.data(), n_, &sr_[r], &si_[r]);
    }
    vals[j] = kr.dot(exr_.data(), sr_.data(), n_) - kr.dot(exi_.data(), si_.data(), n_);
  }
}

void FieldEvaluator::values_and_gradient(const Vec2& x, double* vals, double* dx, double* dy) {
  phases(x);
  const auto& kr = simd::kernels();
  const double* cre = f_->re().data();
  const double* cim = f_->im().data();
  const int K = f_->K();
  for (int j = 0; j < f_->components(); ++j) {
    for (int r = 0; r < n_; ++r) {
      std::size_t off = (static_cast<std::size_t>(j) * n_ + r) * n_;
      kr.cdot(cre + off, cim + off, eyr_.data(), eyi_.data(), n_, &sr_[r], &si_[r]);
      kr.cdot(kyre_.data() + off, kyim_.data() + off, eyr_.data(), eyi_.data(), n_, &tr_[r],
              &ti_[r]);
    }
    double v = 0.0, gx = 0.0, gy = 0.0;
    for (int r = 0; r < n_; ++r) {
      v += exr_[r] * sr_[r] - exi_[r] * si_[r];
      gx += (r - K) * (exr_[r] * si_[r] + exi_[r] * sr_[r]);
      gy += exr_[r] * ti_[r] + exi_[r] * tr_[r];
    }
    vals[j] = v;
    dx[j] = -2.0 * pi * gx;
    dy[j] = -2.0 * pi * gy;
  }
}

double pullback_from_components(int degree, const double* comps, const Vec2& v) {
  double s = 0.0;
  for (int j = 0; j <= degree; ++j)
    s += binomial(degree, j) * comps[j] * std::pow(v.x(), degree - j) * std::pow(v.y(), j);
  return s;
}

double pullback(const TorusField& f, const Vec2& x, const Vec2& v) {
  FieldEvaluator ev(f);
  double vals[4];
  ev.values(x, vals);
  return pullback_from_components(f.degree(), vals, v);
}

std::vector<std::vector<double>> grid_values(const TorusField& f, int N, int a, int b) {
  const int n = f.side(), K = f.K();
  const auto& kr = simd::kernels();
  // phase tables [i][k]
  std::vector<double> er(static_cast<std::size_t>(N) * n), ei(er.size());
  for (int i = 0; i < N; ++i) fill_phases(double(i) / N, K, &er[i * n], &ei[i * n]);
  auto ipow = [](cplx z, int p) {
    cplx r(1.0, 0.0);
    for (int i = 0; i < p; ++i) r *= z;
    return r;
  };
  std::vector<std::vector<double>> out(f.components(), std::vector<double>(std::size_t(N) * N));
  std::vector<double> cr(n), ci(n), Rr(std::size_t(n) * N), Ri(Rr.size()), accr(N), acci(N);
  for (int j = 0; j < f.components(); ++j) {
    for (int kx = -K; kx <= K; ++kx) {
      for (int ky = -K; ky <= K; ++ky) {
        cplx c = f.coeff(j, kx, ky) * ipow(cplx(0.0, 2.0 * pi * ky), b);
        cr[ky + K] = c.real();
        ci[ky + K] = c.imag();
      }
      for (int iy = 0; iy < N; ++iy)
        kr.cdot(cr.data(), ci.data(), &er[iy * n], &ei[iy * n], n,
                &Rr[std::size_t(kx + K) * N + iy], &Ri[std::size_t(kx + K) * N + iy]);
    }
    for (int ix = 0; ix < N; ++ix) {
      std::fill(accr.begin(), accr.end(), 0.0);
      std::fill(acci.begin(), acci.end(), 0.0);
      for (int kx = -K; kx <= K; ++kx) {
        cplx s = cplx(er[ix * n + kx + K], ei[ix * n + kx + K]) * ipow(cplx(0.0, 2.0 * pi * kx), a);
        kr.caxpy(N, s.real(), s.imag(), &Rr[std::size_t(kx + K) * N], &Ri[std::size_t(kx + K) * N],
                 accr.data(), acci.data());
      }
      std::copy(accr.begin(), accr.end(), out[j].begin() + std::size_t(ix) * N);
    }
  }
  return out;
}

TorusField fit_from_grid(const std::vector<std::vector<double>>& samples, int N, int degree, int K) {
  if (N <= 2 * K) throw ConfigError("grid too coarse for the band limit");
  TorusField f(degree, K);
  const int n = 2 * K + 1;
  const auto& kr = simd::kernels();
  std::vector<double> cs(std::size_t(n) * N), sn(cs.size());  // [k][i]
  for (int k = -K; k <= K; ++k)
    for (int i = 0; i < N; ++i) {
      double ang = 2.0 * pi * double((static_cast<long>(k) * i) % N) / N;
      cs[std::size_t(k + K) * N + i] = std::cos(ang);
      sn[std::size_t(k + K) * N + i] = -std::sin(ang);
    }
  std::vector<double> Sr(std::size_t(n) * N), Si(Sr.size());  // [ky][ix]
  std::vector<double> zero(N, 0.0);
  for (int j = 0; j <= degree; ++j) {
    const auto& g = samples[j];
    for (int ix = 0; ix < N; ++ix)
      for (int ky = 0; ky < n; ++ky) {
        Sr[std::size_t(ky) * N + ix] = kr.dot(&g[std::size_t(ix) * N], &cs[std::size_t(ky) * N], N);
        Si[std::size_t(ky) * N + ix] = kr.dot(&g[std::size_t(ix) * N], &sn[std::size_t(ky) * N], N);
      }
    for (int kx = 0; kx < n; ++kx)
      for (int ky = 0; ky < n; ++ky) {
        double re, im;
        kr.cdot(&cs[std::size_t(kx) * N], &sn[std::size_t(kx) * N], &Sr[std::size_t(ky) * N],
                &Si[std::size_t(ky) * N], N, &re, &im);
        f.set(j, kx - K, ky - K, cplx(re, im) / (double(N) * N));
      }
    // exact conjugate symmetry
    for (int kx = -K; kx <= K; ++kx)
      for (int ky = -K; ky <= K; ++ky) {
        if (kx < 0 || (kx == 0 && ky < 0)) continue;
        cplx v = 0.5 * (f.coeff(j, kx, ky) + std::conj(f.coeff(j, -kx, -ky)));
        f.set_real_mode(j, kx, ky, v);
      }
  }
  return f;
}

// ---------------------------------------------------------------------------
// Calculus

namespace {

// Frame change: f'_j = f(E1,..,E1,E2,..,E2) for frame columns of E.
Eigen::MatrixXd frame_transform(int m, const Mat2& E) {
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m + 1, m + 1);
  for (int i = 0; i <= m; ++i) {
    // coefficients in w2-power of (E00 w1 + E01 w2)^(m-i) (E10 w1 + E11 w2)^i
    std::vector<double> poly{1.0};
    auto mul = [&](double c1, double c2) {
      std::vector<double> r(poly.size() + 1, 0.0);
      for (std::size_t t = 0; t < poly.size(); ++t) {
        r[t] += poly[t] * c1;
        r[t + 1] += poly[t] * c2;
      }
      poly = r;
    };
    for (int t = 0; t < m - i; ++t) mul(E(0, 0), E(0, 1));
    for (int t = 0; t < i; ++t) mul(E(1, 0), E(1, 1));
    for (int j = 0; j <= m; ++j) T(j, i) = binomial(m, i) * poly[j] / binomial(m, j);
  }
  return T;
}

Mat2 orthonormal_frame(const TorusModel& m) {
  Mat2 L = m.gram.llt().matrixL();
  return L.inverse().transpose();
}

// Pointwise Gram matrix of the component inner product.
Eigen::MatrixXd component_weights(const TorusModel& m, int degree) {
  Eigen::MatrixXd T = frame_transform(degree, orthonormal_frame(m));
  Eigen::VectorXd c(degree + 1);
  for (int j = 0; j <= degree; ++j) c[j] = binomial(degree, j);
  return T.transpose() * c.asDiagonal() * T;
}

// D at frequency k: degree m-1 -> degree m.
CMat D_matrix(int m, int kx, int ky) {
  const int mp = m - 1;
  CMat D = CMat::Zero(m + 1, m);
  const cplx ix(0.0, 2.0 * pi * kx), iy(0.0, 2.0 * pi * ky);
  for (int jp = 0; jp <= m; ++jp) {
    if (jp <= mp) D(jp, jp) += ix * double(mp + 1 - jp) / double(mp + 1);
    if (jp >= 1) D(jp, jp - 1) += iy * double(jp) / double(mp + 1);
  }
  return D;
}

// D* at frequency k: degree m -> degree m-1.
CMat Dstar_matrix(const TorusModel& mod, int m, int kx, int ky) {
  Vec2 w = mod.gram.inverse() * Vec2(kx, ky);
  CMat S = CMat::Zero(m, m + 1);
  const cplx f(0.0, -2.0 * pi);
  for (int j = 0; j < m; ++j) {
    S(j, j) += f * w.x();
    S(j, j + 1) += f * w.y();
  }
  return S;
}

CVec coeff_vec(const TorusField& f, int kx, int ky) {
  CVec v(f.components());
  for (int j = 0; j < f.components(); ++j) v[j] = f.coeff(j, kx, ky);
  return v;
}

void put_vec(TorusField& f, int kx, int ky, const CVec& v) {
  for (int j = 0; j < f.components(); ++j) f.set(j, kx, ky, v[j]);
}

}  // namespace

TorusField symmetric_derivative(const TorusField& p) {
  if (p.degree() >= 3) throw ConfigError("symmetric derivative limited to degree <= 2 inputs");
  const int m = p.degree() + 1;
  TorusField out(m, p.K());
  for (int kx = -p.K(); kx <= p.K(); ++kx)
    for (int ky = -p.K(); ky <= p.K(); ++ky)
      put_vec(out, kx, ky, D_matrix(m, kx, ky) * coeff_vec(p, kx, ky));
  return out;
}

TorusField divergence(const TorusModel& mod, const TorusField& f) {
  if (f.degree() < 1) throw ConfigError("divergence needs degree >= 1");
  const int m = f.degree();
  TorusField out(m - 1, f.K());
  for (int kx = -f.K(); kx <= f.K(); ++kx)
    for (int ky = -f.K(); ky <= f.K(); ++ky)
      put_vec(out, kx, ky, Dstar_matrix(mod, m, kx, ky) * coeff_vec(f, kx, ky));
  return out;
}

TorusField trace(const TorusModel& mod, const TorusField& f) {
  if (f.degree() != 2) throw ConfigError("trace needs a degree-2 field");
  Mat2 gi = mod.gram.inverse();
  TorusField out(0, f.K());
  for (int kx = -f.K(); kx <= f.K(); ++kx)
    for (int ky = -f.K(); ky <= f.K(); ++ky)
      out.set(0, kx, ky,
              gi(0, 0) * f.coeff(0, kx, ky) + 2.0 * gi(0, 1) * f.coeff(1, kx, ky) +
                  gi(1, 1) * f.coeff(2, kx, ky));
  return out;
}

double pointwise_norm(const TorusModel& m, int degree, const double* comps) {
  Eigen::MatrixXd W = component_weights(m, degree);
  Eigen::Map<const Eigen::VectorXd> c(comps, degree + 1);
  return std::sqrt(std::max(0.0, c.dot(W * c)));
}

namespace {
double weighted_sum(const TorusModel& mod, const TorusField& f, const TorusField& h, double s) {
  check_same_shape(f, h);
  Eigen::MatrixXd W = component_weights(mod, f.degree());
  Mat2 gi = mod.gram.inverse();
  double total = 0.0;
  for (int kx = -f.K(); kx <= f.K(); ++kx)
    for (int ky = -f.K(); ky <= f.K(); ++ky) {
      CVec a = coeff_vec(f, kx, ky), b = coeff_vec(h, kx, ky);
      double v = (a.adjoint() * W.cast<cplx>() * b)(0, 0).real();
      if (s != 0.0) {
        Vec2 k(kx, ky);
        v *= std::pow(1.0 + 4.0 * pi * pi * k.dot(gi * k), s);
      }
      total += v;
    }
  return total;
}
}  // namespace

double inner(const TorusModel& m, const TorusField& f, const TorusField& h) {
  return weighted_sum(m, f, h, 0.0);
}

double l2_norm(const TorusModel& m, const TorusField& f) { return std::sqrt(std::max(0.0, inner(m, f, f))); }

double sobolev_norm(const TorusModel& m, const TorusField& f, double s) {
  return std::sqrt(std::max(0.0, weighted_sum(m, f, f, s)));
}

Decomposition solenoidal_project(const TorusModel& mod, const TorusField& f) {
  if (f.degree() < 1) throw ConfigError("solenoidal projection needs degree >= 1");
  const int m = f.degree();
  Decomposition out{f, TorusField(m - 1, f.K())};
  for (int kx = -f.K(); kx <= f.K(); ++kx)
    for (int ky = -f.K(); ky <= f.K(); ++ky) {
      if (kx == 0 && ky == 0) continue;
      CMat D = D_matrix(m, kx, ky);
      CMat S = Dstar_matrix(mod, m, kx, ky);
      CVec fk = coeff_vec(f, kx, ky);
      CVec p = (S * D).partialPivLu().solve(S * fk);
      put_vec(out.potential, kx, ky, p);
      put_vec(out.solenoidal, kx, ky, fk - D * p);
    }
  return out;
}

Decomposition solenoidal_project_cg(const TorusModel& mod, const TorusField& f, double tol,
                                    int max_iter) {
  if (f.degree() < 1) throw ConfigError("solenoidal projection needs degree >= 1");
  auto A = [&](const TorusField& p) { return divergence(mod, symmetric_derivative(p)); };
  TorusField b = divergence(mod, f);
  TorusField x(f.degree() - 1, f.K());
  TorusField r = b;
  TorusField p = r;
  double rr = inner(mod, r, r);
  const double stop = tol * tol * std::max(rr, 1e-300);
  for (int it = 0; it < max_iter && rr > stop; ++it) {
    TorusField Ap = A(p);
    double alpha = rr / inner(mod, p, Ap);
    x += alpha * p;
    r -= alpha * Ap;
    double rr2 = inner(mod, r, r);
    p = r + (rr2 / rr) * p;
    rr = rr2;
  }
  // zero mean gauge
  for (int j = 0; j < x.components(); ++j) x.set(j, 0, 0, 0.0);
  return {f - symmetric_derivative(x), x};
}

// ---------------------------------------------------------------------------
// Sampled norms

namespace {
std::vector<double> pointwise_grid(const TorusModel& m, const std::vector<std::vector<double>>& g,
                                   int degree) {
  Eigen::MatrixXd W = component_weights(m, degree);
  std::size_t n = g[0].size();
  std::vector<double> out(n);
  Eigen::VectorXd c(degree + 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (int j = 0; j <= degree; ++j) c[j] = g[j][i];
    out[i] = std::sqrt(std::max(0.0, c.dot(W * c)));
  }
  return out;
}
}  // namespace

double sup_surrogate(const TorusModel& m, const TorusField& f, int N) {
  auto g = grid_values(f, N);
  auto p = pointwise_grid(m, g, f.degree());
  return *std::max_element(p.begin(), p.end());
}

double holder_surrogate(const TorusModel& m, const TorusField& f, double alpha, int N) {
  auto g = grid_values(f, N);
  auto p = pointwise_grid(m, g, f.degree());
  double sup = *std::max_element(p.begin(), p.end());
  Eigen::MatrixXd W = component_weights(m, f.degree());
  const int dirs[3][2] = {{1, 0}, {0, 1}, {1, 1}};
  double quot = 0.0;
  Eigen::VectorXd c(f.degree() + 1);
  for (const auto& d : dirs)
    for (int step = N / 2; step >= 1; step /= 2) {
      Vec2 delta(double(d[0] * step) / N, double(d[1] * step) / N);
      double dn = std::pow(std::sqrt(delta.dot(m.gram * delta)), alpha);
      double best = 0.0;
      for (int i = 0; i < N; ++i)
        for (int k = 0; k < N; ++k) {
          std::size_t a = std::size_t(i) * N + k;
          std::size_t b = std::size_t((i + d[0] * step) % N) * N + (k + d[1] * step) % N;
          for (int j = 0; j <= f.degree(); ++j) c[j] = g[j][a] - g[j][b];
          best = std::max(best, c.dot(W * c));
        }
      quot = std::max(quot, std::sqrt(best) / dn);
    }
  return sup + quot;
}

double c3_surrogate(const TorusModel& m, const TorusField& f, int N) {
  double total = 0.0;
  for (int order = 0; order <= 3; ++order)
    for (int a = order; a >= 0; --a) {
      auto g = grid_values(f, N, a, order - a);
      auto p = pointwise_grid(m, g, f.degree());
      total += *std::max_element(p.begin(), p.end());
    }
  return total;
}

NormReport norms(const TorusModel& m, const TorusField& f, const std::vector<double>& s_list,
                 const std::vector<double>& alpha_list, bool with_c3) {
  NormReport r;
  for (double s : s_list) r.sobolev[s] = sobolev_norm(m, f, s);
  for (double a : alpha_list) r.holder_surrogate[a] = holder_surrogate(m, f, a);
  r.l2 = l2_norm(m, f);
  if (with_c3) r.c3_surrogate = c3_surrogate(m, f);
  return r;
}

// ---------------------------------------------------------------------------

TorusField random_field(std::uint64_t seed, int K, int degree) {
  TorusField f(degree, K);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int j = 0; j <= degree; ++j)
    for (int kx = 0; kx <= K; ++kx)
      for (int ky = -K; ky <= K; ++ky) {
        if (kx == 0 && ky < 0) continue;
        double kn = std::max(1.0, std::hypot(double(kx), double(ky)));
        double sd = std::pow(kn, -3.0);
        double re = sd * nd(rng);
        double im = sd * nd(rng);
        f.set_real_mode(j, kx, ky, cplx(re, im));
      }
  return f;
}

TorusField random_solenoidal(const TorusModel& m, std::uint64_t seed, int K, int degree,
                             double target, double alpha) {
  if (K < 1) throw ConfigError("random_solenoidal needs K >= 1");
  if (degree < 1) throw ConfigError("random_solenoidal needs degree >= 1");
  for (int attempt = 0; attempt < 100; ++attempt) {
    TorusField fs = solenoidal_project(m, random_field(seed + attempt, K, degree)).solenoidal;
    double h = holder_surrogate(m, fs, alpha);
    if (h > 0.0) return (target / h) * fs;
  }
  throw NumericalError("random_solenoidal produced only degenerate draws");
}

}  // namespace mlslab
