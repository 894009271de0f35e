#include "mlslab/geodesic_solver.hpp"

#include <cmath>
#include <random>

#include "mlslab/errors.hpp"
#include "mlslab/parallel.hpp"
#include "mlslab/xray.hpp"

namespace mlslab {

namespace {

// Three-point Gauss-Legendre on [0, 1].
constexpr double kGlS[3] = {0.5 - 0.3872983346207417, 0.5, 0.5 + 0.3872983346207417};
constexpr double kGlW[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

using Nodes = std::vector<Vec2>;

double dot(const Nodes& a, const Nodes& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i].dot(b[i]);
  return s;
}

// Solves a cyclic tridiagonal system: diagonal b, sub a[i] = A(i, i-1),
// super c[i] = A(i, i+1), corners A(0, n-1) = top, A(n-1, 0) = bottom.
template <class T>
std::vector<T> solve_cyclic(std::vector<T> a, std::vector<T> b, std::vector<T> c, T top, T bottom,
                            const std::vector<T>& r) {
  const std::size_t n = b.size();
  auto thomas = [&](const std::vector<T>& bb, const std::vector<T>& rhs) {
    std::vector<T> cp(n), dp(n), x(n);
    cp[0] = c[0] / bb[0];
    dp[0] = rhs[0] / bb[0];
    for (std::size_t i = 1; i < n; ++i) {
      T m = bb[i] - a[i] * cp[i - 1];
      cp[i] = i + 1 < n ? c[i] / m : T(0);
      dp[i] = (rhs[i] - a[i] * dp[i - 1]) / m;
    }
    x[n - 1] = dp[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = dp[i] - cp[i] * x[i + 1];
    return x;
  };
  T gamma = -b[0];
  std::vector<T> bb = b;
  bb[0] = b[0] - gamma;
  bb[n - 1] = b[n - 1] - bottom * top / gamma;
  std::vector<T> x = thomas(bb, r);
  std::vector<T> u(n, T(0));
  u[0] = gamma;
  u[n - 1] = bottom;
  std::vector<T> z = thomas(bb, u);
  T fact = (x[0] + top * x[n - 1] / gamma) / (T(1) + z[0] + top * z[n - 1] / gamma);
  for (std::size_t i = 0; i < n; ++i) x[i] -= fact * z[i];
  return x;
}

// ---------------------------------------------------------------------------

class TorusProblem {
 public:
  TorusProblem(const TorusModel& m, const TorusField& f, const TorusClass& c)
      : G0_(m.gram), field_(f), ev_(field_), shift_(c.p, c.q) {
    Gb_ = G0_;
    Gb_(0, 0) += f.coeff(0, 0, 0).real();
    Gb_(0, 1) += f.coeff(1, 0, 0).real();
    Gb_(1, 0) += f.coeff(1, 0, 0).real();
    Gb_(1, 1) += f.coeff(2, 0, 0).real();
    if (Gb_.determinant() <= 0.0 || Gb_(0, 0) <= 0.0) Gb_ = G0_;
    Gb_inv_ = Gb_.inverse();
  }

  Vec2 next(const Nodes& X, std::size_t i) const {
    return i + 1 < X.size() ? X[i + 1] : X[0] + shift_;
  }

  double eval(const Nodes& X, Nodes* grad) {
    const std::size_t n = X.size();
    if (grad) grad->assign(n, Vec2::Zero());
    double v[3], dx[3], dy[3];
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      Vec2 a = X[i], b = next(X, i), D = b - a;
      double e = 0.0;
      Vec2 ga = Vec2::Zero(), gb = Vec2::Zero();
      for (int q = 0; q < 3; ++q) {
        Vec2 x = a + kGlS[q] * D;
        Mat2 G = metric(x, v, dx, dy, grad != nullptr);
        Vec2 GD = G * D;
        e += kGlW[q] * D.dot(GD);
        if (grad) {
          Vec2 de(D.x() * D.x() * dx[0] + 2.0 * D.x() * D.y() * dx[1] + D.y() * D.y() * dx[2],
                  D.x() * D.x() * dy[0] + 2.0 * D.x() * D.y() * dy[1] + D.y() * D.y() * dy[2]);
          ga += kGlW[q] * (-2.0 * GD + (1.0 - kGlS[q]) * de);
          gb += kGlW[q] * (2.0 * GD + kGlS[q] * de);
        }
      }
      sum += e;
      if (grad) {
        (*grad)[i] += double(n) * ga;
        (*grad)[(i + 1) % n] += double(n) * gb;
      }
    }
    return double(n) * sum;
  }

  // Sum of GL-measured segment lengths, and n * sum of their squares.
  std::pair<double, double> lengths(const Nodes& X) {
    double v[3], dx[3], dy[3];
    double L = 0.0, S = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
      Vec2 a = X[i], D = next(X, i) - a;
      double l = 0.0;
      for (int q = 0; q < 3; ++q) {
        Mat2 G = metric(a + kGlS[q] * D, v, dx, dy, false);
        l += kGlW[q] * std::sqrt(D.dot(G * D));
      }
      L += l;
      S += l * l;
    }
    return {L, double(X.size()) * S};
  }

  void precondition(const Nodes& X, const Nodes& g, Nodes& d, int iter) {
    const std::size_t n = X.size();
    if (iter % 5 == 0) update_translation_block(X, g);
    Vec2 gsum = Vec2::Zero();
    for (const auto& gi : g) gsum += gi;
    Vec2 gmean = gsum / double(n);
    d.assign(n, Vec2::Zero());
    // cyclic Laplacian pseudo-inverse on mean-free data: pin node 0
    std::vector<double> ux(n, 0.0), uy(n, 0.0);
    if (n > 1) {
      std::vector<double> cp(n), dpx(n), dpy(n);
      // rows 1..n-1 of tridiag(-1, 2, -1), Dirichlet at both ends
      for (std::size_t i = 1; i < n; ++i) {
        double rx = g[i].x() - gmean.x(), ry = g[i].y() - gmean.y();
        double m = i > 1 ? 2.0 + cp[i - 1] : 2.0;
        cp[i] = -1.0 / m;
        dpx[i] = (rx + (i > 1 ? dpx[i - 1] : 0.0)) / m;
        dpy[i] = (ry + (i > 1 ? dpy[i - 1] : 0.0)) / m;
      }
      ux[n - 1] = dpx[n - 1];
      uy[n - 1] = dpy[n - 1];
      for (std::size_t i = n - 1; i-- > 1;) {
        ux[i] = dpx[i] - cp[i] * ux[i + 1];
        uy[i] = dpy[i] - cp[i] * uy[i + 1];
      }
      double mx = 0.0, my = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        mx += ux[i];
        my += uy[i];
      }
      mx /= double(n);
      my /= double(n);
      for (std::size_t i = 0; i < n; ++i)
        d[i] = Gb_inv_ * Vec2(ux[i] - mx, uy[i] - my) / (2.0 * double(n));
    }
    Vec2 delta = HT_inv_ * gsum;
    for (auto& di : d) di += delta;
  }

  // uniform transversal translation
  std::vector<Nodes> extra_directions(const Nodes& X) const {
    Vec2 Gu = G0_ * shift_;
    return {Nodes(X.size(), Vec2(-Gu.y(), Gu.x()).normalized())};
  }
  double fd_step(const Nodes&) const { return 1e-7; }

  Nodes refine(const Nodes& X) const {
    Nodes Y;
    Y.reserve(2 * X.size());
    for (std::size_t i = 0; i < X.size(); ++i) {
      Y.push_back(X[i]);
      Y.push_back(0.5 * (X[i] + next(X, i)));
    }
    return Y;
  }

 private:
  Mat2 metric(const Vec2& x, double* v, double* dx, double* dy, bool with_grad) {
    if (with_grad)
      ev_.values_and_gradient(x, v, dx, dy);
    else
      ev_.values(x, v);
    Mat2 G = G0_;
    G(0, 0) += v[0];
    G(0, 1) += v[1];
    G(1, 0) += v[1];
    G(1, 1) += v[2];
    if (!(G(0, 0) > 0.0) || !(G.determinant() > 0.0))
      throw NumericalError("metric g0 + f is not positive-definite at a quadrature node");
    return G;
  }

  // Uniform translations: sliding along the loop is a symmetry up to
  // discretization and is left out; the transversal curvature is measured.
  void update_translation_block(const Nodes& X, const Nodes& g) {
    const std::size_t n = X.size();
    Vec2 Gu = G0_ * shift_;
    Vec2 nu = Vec2(-Gu.y(), Gu.x()).normalized();
    const double h = 1e-5;
    Nodes Xs = X, gs;
    for (auto& x : Xs) x += h * nu;
    double E = eval(Xs, &gs);
    double Hnn = 0.0;
    for (std::size_t i = 0; i < n; ++i) Hnn += (gs[i] - g[i]).dot(nu) / h;
    HT_inv_ = nu * nu.transpose() / std::max(std::abs(Hnn), 1e-7 * E);
  }

  Mat2 G0_, Gb_, Gb_inv_;
  Mat2 HT_inv_ = Mat2::Zero();
  const TorusField& field_;
  FieldEvaluator ev_;
  Vec2 shift_;
};

// ---------------------------------------------------------------------------

class DiskProblem {
 public:
  DiskProblem(const FuchsianModel& m, const BumpField& f, const CyclicWord& w)
      : field_(f), gamma_(m.word_matrix(w.letters())) {}

  Vec2 next(const Nodes& X, std::size_t i) const {
    return i + 1 < X.size() ? X[i + 1] : to_vec(gamma_(to_cplx(X[0])));
  }

  // Energy of the g0-geodesic segment from za to zb; optional g-length.
  double segment(const Vec2& za, const Vec2& zb, double* len) const {
    cplx a = to_cplx(za), b = to_cplx(zb);
    Mobius M = to_origin(a);
    // direct form: avoids cancellation for nearby nodes
    cplx w = (b - a) / (1.0 - std::conj(a) * b);
    double r = std::abs(w);
    if (!(r < 1.0)) throw NumericalError("polyline node left the disk");
    double l0 = 2.0 * std::atanh(r);
    if (field_.terms().empty() || r == 0.0) {
      if (len) *len = l0;
      return l0 * l0;
    }
    cplx u = w / r;
    Mobius Mi = M.inv();
    double e = 0.0, l = 0.0;
    for (int q = 0; q < 3; ++q) {
      double s = std::tanh(kGlS[q] * l0 / 2.0);
      cplx y = Mi(s * u);
      cplx t = Mi.deriv(s * u) * u * (0.5 * (1.0 - s * s));
      double val = 1.0 + field_.pullback(to_vec(y), to_vec(t));
      if (!(val > 0.0)) throw NumericalError("metric g0 + f is not positive-definite at a quadrature node");
      e += kGlW[q] * val;
      l += kGlW[q] * std::sqrt(val);
    }
    if (len) *len = l0 * l;
    return l0 * l0 * e;
  }

  double eval(const Nodes& X, Nodes* grad) const {
    const std::size_t n = X.size();
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += segment(X[i], next(X, i), nullptr);
    if (grad) {
      // per node: fourth-order central difference of its two adjacent
      // segments, over the perturbations actually represented
      grad->assign(n, Vec2::Zero());
      Nodes Y = X;
      for (std::size_t j = 0; j < n; ++j) {
        std::size_t i = (j + n - 1) % n;
        double l0 = 0.0;
        segment(X[j], next(X, j), &l0);
        double h = 1e-3 * std::max(l0, 1e-4) / disk_lambda(to_cplx(X[j]));
        auto S = [&](int c, double x) {
          Y[j][c] = x;
          double v = segment(Y[i], next(Y, i), nullptr) + segment(Y[j], next(Y, j), nullptr);
          Y[j][c] = X[j][c];
          return v;
        };
        for (int c = 0; c < 2; ++c) {
          double x1p = X[j][c] + h, x1m = X[j][c] - h;
          double x2p = X[j][c] + 2.0 * h, x2m = X[j][c] - 2.0 * h;
          double d1 = (S(c, x1p) - S(c, x1m)) / (x1p - x1m);
          double d2 = (S(c, x2p) - S(c, x2m)) / (x2p - x2m);
          (*grad)[j][c] = double(n) * (4.0 * d1 - d2) / 3.0;
        }
      }
    }
    return double(n) * sum;
  }

  std::pair<double, double> lengths(const Nodes& X) const {
    double L = 0.0, S = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
      double l = 0.0;
      segment(X[i], next(X, i), &l);
      L += l;
      S += l * l;
    }
    return {L, double(X.size()) * S};
  }

  void precondition(const Nodes& X, const Nodes& g, Nodes& d, int) const {
    const std::size_t n = X.size();
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
      cplx mid = 0.5 * (to_cplx(X[i]) + to_cplx(next(X, i)));
      double lam = disk_lambda(mid);
      w[i] = 2.0 * double(n) * lam * lam;  // Hessian = 2 P
    }
    cplx c = gamma_.deriv(to_cplx(X[0]));
    std::vector<cplx> a(n), b(n), up(n), r(n);
    for (std::size_t i = 0; i < n; ++i) {
      b[i] = w[i] + (i > 0 ? w[i - 1] : 0.0);
      if (i + 1 < n) up[i] = -w[i];
      if (i > 0) a[i] = -w[i - 1];
      r[i] = cplx(g[i].x(), g[i].y());
    }
    b[0] = w[0] + w[n - 1] * std::norm(c);
    cplx top = -w[n - 1] * std::conj(c);
    cplx bottom = -w[n - 1] * c;
    // solve the Hermitian system via its action on complex vectors
    auto x = solve_cyclic<cplx>(a, b, up, top, bottom, r);
    d.resize(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = Vec2(x[i].real(), x[i].imag());
  }

  std::vector<Nodes> extra_directions(const Nodes&) const { return {}; }
  double fd_step(const Nodes& X) const {
    double r = 0.0;
    for (const auto& x : X) r = std::max(r, x.norm());
    return 1e-6 * (1.0 - r * r);
  }

  Nodes refine(const Nodes& X) const {
    Nodes Y;
    Y.reserve(2 * X.size());
    for (std::size_t i = 0; i < X.size(); ++i) {
      Y.push_back(X[i]);
      cplx a = to_cplx(X[i]), b = to_cplx(next(X, i));
      Mobius M = to_origin(a);
      cplx w = M(b);
      double r = std::abs(w);
      cplx m = r > 0.0 ? M.inv()(std::tanh(0.5 * std::atanh(r)) * w / r) : a;
      Y.push_back(to_vec(m));
    }
    return Y;
  }

 private:
  const BumpField& field_;
  Mobius gamma_;
};

// ---------------------------------------------------------------------------

double max_abs(const Nodes& v) {
  double m = 0.0;
  for (const auto& x : v) m = std::max(m, x.cwiseAbs().maxCoeff());
  return m;
}

// Newton step restricted to span{S}, Hessian products by gradient differences.
template <class Problem>
bool subspace_step(Problem& prob, const Nodes& X, const Nodes& g, std::vector<Nodes> S,
                   Nodes& dir) {
  for (auto& s : S) {
    double nrm = std::sqrt(dot(s, s));
    if (!(nrm > 0.0)) return false;
    for (auto& x : s) x /= nrm;
  }
  const std::size_t k = S.size();
  std::vector<Nodes> HS(k);
  Nodes Xh(X.size());
  for (std::size_t j = 0; j < k; ++j) {
    double m = max_abs(S[j]);
    if (!(m > 0.0)) return false;
    double h = prob.fd_step(X) / m;
    for (std::size_t i = 0; i < X.size(); ++i) Xh[i] = X[i] + h * S[j][i];
    try {
      prob.eval(Xh, &HS[j]);
    } catch (const NumericalError&) {
      return false;
    }
    for (std::size_t i = 0; i < X.size(); ++i) HS[j][i] = (HS[j][i] - g[i]) / h;
  }
  Eigen::MatrixXd H(k, k);
  Eigen::VectorXd b(k);
  for (std::size_t i = 0; i < k; ++i) {
    b[i] = dot(g, S[i]);
    for (std::size_t j = 0; j < k; ++j) H(i, j) = dot(S[i], HS[j]);
  }
  H = (0.5 * (H + H.transpose())).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  Eigen::VectorXd lam = es.eigenvalues();
  if (!(lam[k - 1] > 0.0) || lam[0] < -1e-8 * lam[k - 1]) return false;
  Eigen::VectorXd y = es.eigenvectors().transpose() * b;
  for (std::size_t i = 0; i < k; ++i) y[i] = lam[i] > 1e-10 * lam[k - 1] ? y[i] / lam[i] : 0.0;
  Eigen::VectorXd c = es.eigenvectors() * y;
  dir.assign(X.size(), Vec2::Zero());
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < X.size(); ++i) dir[i] += c[j] * S[j][i];
  return dot(g, dir) > 0.0;
}

template <class Problem>
void descend(Problem& prob, Nodes& X, const SolverOptions& opt, double tol, SolveReport& rep) {
  Nodes g, d, dir, gprev, dprev, pdir, step;
  double E = prob.eval(X, &g);
  double best = INFINITY;
  int since_best = 0;
  for (int it = 0; it <= opt.max_iters; ++it) {
    prob.precondition(X, g, d, it);
    double gd = dot(g, d);
    double gn = std::sqrt(std::max(gd, 0.0) / E);
    rep.grad_norm = gn;
    rep.energy = E;
    if (gn <= tol) return;
    // stalled at the rounding floor of the gradient: accept if within 100x of tol
    if (gn < 0.5 * best) {
      best = gn;
      since_best = 0;
    } else if (++since_best >= 25 && best <= 100.0 * tol) {
      rep.floor_stop = true;
      return;
    }
    if (it == opt.max_iters) break;
    dir = d;
    if (opt.cg) {
      if (it > 0) {
        double beta = std::max(0.0, (gd - dot(gprev, d)) / dot(gprev, dprev));
        for (std::size_t i = 0; i < dir.size(); ++i) dir[i] += beta * pdir[i];
        if (dot(g, dir) <= 0.0) dir = d;
      }
    } else {
      std::vector<Nodes> S{d};
      for (auto& e : prob.extra_directions(X)) S.push_back(std::move(e));
      if (!step.empty()) S.push_back(step);
      Nodes sub;
      if (subspace_step(prob, X, g, S, sub)) dir.swap(sub);
    }
    double slope = dot(g, dir);
    // below this predicted decrease the energy cannot resolve the step
    const bool resolved = slope > 1e-11 * std::abs(E);
    double alpha = 1.0;
    bool accepted = false;
    Nodes Xn(X.size());
    for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
      for (std::size_t i = 0; i < X.size(); ++i) Xn[i] = X[i] - alpha * dir[i];
      double En;
      try {
        En = prob.eval(Xn, nullptr);
      } catch (const NumericalError&) {
        continue;
      }
      if (!resolved || En <= E - 1e-4 * alpha * slope + 4e-16 * std::abs(E)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) throw NumericalError("line search failed");
    gprev = g;
    dprev = d;
    pdir = dir;
    step = dir;
    for (auto& s : step) s *= alpha;
    X.swap(Xn);
    E = prob.eval(X, &g);
    ++rep.iterations;
  }
  throw NumericalError("iteration cap exceeded");
}

template <class Problem>
SolveReport run(Problem& prob, Nodes X, const ConjugacyClass& c, const SolverOptions& opt,
                double tol) {
  SolveReport rep;
  descend(prob, X, opt, tol, rep);
  double Lprev = prob.lengths(X).first;
  for (int level = 1;; ++level) {
    if (level > opt.max_levels) throw NumericalError("refinement did not converge");
    X = prob.refine(X);
    descend(prob, X, opt, tol, rep);
    auto [L, S] = prob.lengths(X);
    rep.refinement_levels = level;
    if (std::abs(L - Lprev) < opt.rtol * L) {
      rep.length = L;
      rep.cs_energy = S;
      rep.nodes = static_cast<int>(X.size());
      rep.loop = {c, X};
      return rep;
    }
    Lprev = L;
  }
}

double torus_injectivity_scale(const TorusModel& m) {
  double best = 1e300;
  for (int p = -3; p <= 3; ++p)
    for (int q = -3; q <= 3; ++q)
      if (p || q) best = std::min(best, std::sqrt(Vec2(p, q).dot(m.gram * Vec2(p, q))));
  return 0.5 * best;
}

}  // namespace

double default_grad_tol(const Model& m) { return is_torus(m) ? 1e-10 : 1e-8; }

SolveReport solve_geodesic(const Model& m, const Field& f, const ConjugacyClass& c,
                           const SolverOptions& opt) {
  if (degree(f) != 2) throw ConfigError("solve_geodesic needs a degree-2 perturbation");
  const double tol = std::isnan(opt.grad_tol) ? default_grad_tol(m) : opt.grad_tol;
  const double L0 = background_length(m, c);
  const int n = std::max(opt.min_nodes, static_cast<int>(std::ceil(
                                            opt.init_nodes_per_unit_length * std::ceil(L0))));
  std::mt19937_64 rng(opt.jitter_seed);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);

  if (const auto* tm = std::get_if<TorusModel>(&m)) {
    const auto* tf = std::get_if<TorusField>(&f);
    if (!tf) throw ConfigError("torus model needs a Fourier field");
    const auto& tc = std::get<TorusClass>(c);
    OffsetProfile prof = torus_offset_profile(*tm, *tf, tc);
    Vec2 x0 = prof.argmin() * prof.transversal;
    Nodes X(n);
    for (int i = 0; i < n; ++i) X[i] = x0 + (double(i) / n) * Vec2(tc.p, tc.q);
    if (opt.init_jitter > 0.0) {
      Mat2 E = tm->gram.llt().matrixL().toDenseMatrix().inverse().transpose();
      double mag = opt.init_jitter * torus_injectivity_scale(*tm);
      for (auto& x : X) {
        double th = ang(rng);
        x += mag * (E * Vec2(std::cos(th), std::sin(th)));
      }
    }
    TorusProblem prob(*tm, *tf, tc);
    return run(prob, std::move(X), c, opt, tol);
  }
  const auto& fm = std::get<FuchsianModel>(m);
  const auto* bf = std::get_if<BumpField>(&f);
  if (!bf) throw ConfigError("Fuchsian model needs a bump field");
  BackgroundGeodesic geo = background_geodesic(m, c);
  Nodes X(n);
  for (int i = 0; i < n; ++i) X[i] = geo.lift_at(geo.length() * i / n).x;
  if (opt.init_jitter > 0.0) {
    double mag = opt.init_jitter * fm.systole() / 2.0;
    for (auto& x : X) {
      double th = ang(rng);
      x += (mag / disk_lambda(to_cplx(x))) * Vec2(std::cos(th), std::sin(th));
    }
  }
  DiskProblem prob(fm, *bf, std::get<CyclicWord>(c));
  return run(prob, std::move(X), c, opt, tol);
}

std::vector<SpectrumRecord> spectrum_batch(const Model& m, const Field& f,
                                           const std::vector<ConjugacyClass>& classes,
                                           const SolverOptions& opt) {
  std::vector<SpectrumRecord> out(classes.size());
  parallel_for(classes.size(), [&](std::size_t i) {
    SpectrumRecord r;
    r.cls = classes[i];
    try {
      r.L0 = background_length(m, classes[i]);
      SolveReport s = solve_geodesic(m, f, classes[i], opt);
      r.L = s.length;
      r.ratio = s.length / r.L0;
      r.iterations = s.iterations;
      r.grad_norm = s.grad_norm;
      r.refinement_levels = s.refinement_levels;
    } catch (const Error& e) {
      r.error = std::string(e.kind()) + ": " + e.what();
    }
    out[i] = std::move(r);
  });
  return out;
}

}  // namespace mlslab
