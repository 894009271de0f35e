#include "mlslab/gauge.hpp"

#include <cmath>
#include <random>

#include "mlslab/errors.hpp"
#include "mlslab/parallel.hpp"

namespace mlslab {

namespace {

struct VecEval {
  explicit VecEval(const TorusField& X) : ev(X) {}
  Vec2 operator()(const Vec2& x, Mat2& grad) {
    double v[2], dx[2], dy[2];
    ev.values_and_gradient(x, v, dx, dy);
    grad << dx[0], dy[0], dx[1], dy[1];
    return {v[0], v[1]};
  }
  FieldEvaluator ev;
};

Vec2 flow_with(VecEval& X, Vec2 x, Mat2* jac, int steps) {
  const double h = 1.0 / steps;
  Mat2 J = Mat2::Identity();
  Mat2 A1, A2, A3, A4;
  for (int s = 0; s < steps; ++s) {
    Vec2 k1 = X(x, A1);
    Mat2 J1 = A1 * J;
    Vec2 k2 = X(x + 0.5 * h * k1, A2);
    Mat2 J2 = A2 * (J + 0.5 * h * J1);
    Vec2 k3 = X(x + 0.5 * h * k2, A3);
    Mat2 J3 = A3 * (J + 0.5 * h * J2);
    Vec2 k4 = X(x + h * k3, A4);
    Mat2 J4 = A4 * (J + h * J3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    J += (h / 6.0) * (J1 + 2.0 * J2 + 2.0 * J3 + J4);
  }
  if (jac) *jac = J;
  return x;
}

void check_vector_field(const TorusField& X) {
  if (X.degree() != 1) throw ConfigError("vector fields are degree-1 fields");
}

}  // namespace

Vec2 flow(const TorusField& X, const Vec2& x, Mat2* jacobian, int steps) {
  check_vector_field(X);
  VecEval ev(X);
  return flow_with(ev, x, jacobian, steps);
}

double max_vector_gradient(const TorusField& X, int N) {
  check_vector_field(X);
  auto gx = grid_values(X, N, 1, 0);
  auto gy = grid_values(X, N, 0, 1);
  double best = 0.0;
  for (std::size_t i = 0; i < gx[0].size(); ++i) {
    double s = gx[0][i] * gx[0][i] + gy[0][i] * gy[0][i] + gx[1][i] * gx[1][i] + gy[1][i] * gy[1][i];
    best = std::max(best, std::sqrt(s));
  }
  return best;
}

Vec2 GaugeMap::apply(const Vec2& x, Mat2* jacobian) const {
  Vec2 y = x;
  Mat2 J = Mat2::Identity();
  for (auto it = generators.rbegin(); it != generators.rend(); ++it) {
    Mat2 Jk;
    y = flow(*it, y, &Jk);
    J = Jk * J;
  }
  if (jacobian) *jacobian = J;
  return y;
}

TorusField pullback_metric(const TorusModel& m, const TorusField& h, const GaugeMap& phi, int K) {
  if (h.degree() != 2) throw ConfigError("pullback_metric needs a degree-2 field");
  const int N = 4 * std::max(K, 1);
  std::vector<std::vector<double>> samples(3, std::vector<double>(std::size_t(N) * N));
  parallel_for(static_cast<std::size_t>(N), [&](std::size_t i) {
    std::vector<VecEval> gens;
    gens.reserve(phi.generators.size());
    for (const auto& g : phi.generators) gens.emplace_back(g);
    FieldEvaluator hev(h);
    for (int k = 0; k < N; ++k) {
      Vec2 y(double(i) / N, double(k) / N);
      Mat2 J = Mat2::Identity();
      for (auto it = gens.rbegin(); it != gens.rend(); ++it) {
        Mat2 Jk;
        y = flow_with(*it, y, &Jk, 16);
        J = Jk * J;
      }
      double v[3];
      hev.values(y, v);
      Mat2 G = m.gram;
      G(0, 0) += v[0];
      G(0, 1) += v[1];
      G(1, 0) += v[1];
      G(1, 1) += v[2];
      Mat2 P = J.transpose() * G * J - m.gram;
      std::size_t idx = i * N + k;
      samples[0][idx] = P(0, 0);
      samples[1][idx] = 0.5 * (P(0, 1) + P(1, 0));
      samples[2][idx] = P(1, 1);
    }
  });
  return fit_from_grid(samples, N, 2, K);
}

TorusField random_vector_field(std::uint64_t seed, int K, double grad_sup) {
  TorusField X = random_field(seed, K, 1);
  // no mean: a constant drift is an isometry and only shifts the picture
  X.set(0, 0, 0, 0.0);
  X.set(1, 0, 0, 0.0);
  double s = max_vector_gradient(X, 4 * std::max(K, 4));
  if (!(s > 0.0)) throw NumericalError("degenerate random vector field");
  return (grad_sup / s) * X;
}

GaugeResult gauge_normalize(const TorusModel& m, const TorusField& f, double tol, int max_iter) {
  if (f.degree() != 2) throw ConfigError("gauge_normalize needs a degree-2 field");
  const int K2 = 2 * std::max(f.K(), 1);
  GaugeResult out;
  TorusField h = f.with_band(K2);
  const Mat2 Ginv = m.gram.inverse();
  int rises = 0;
  for (int it = 0;; ++it) {
    double r = l2_norm(m, divergence(m, h));
    out.residuals.push_back(r);
    if (r <= tol) break;
    if (it > 0 && r > out.residuals[it - 1]) {
      if (++rises >= 3) throw NumericalError("gauge iteration is not contracting");
    } else {
      rises = 0;
    }
    if (it >= max_iter) throw NumericalError("gauge iteration cap exceeded");
    TorusField v = solenoidal_project(m, h).potential;
    TorusField X(1, v.K());
    for (int kx = -v.K(); kx <= v.K(); ++kx)
      for (int ky = -v.K(); ky <= v.K(); ++ky) {
        Eigen::Vector2cd c(v.coeff(0, kx, ky), v.coeff(1, kx, ky));
        Eigen::Vector2cd w = -0.5 * (Ginv.cast<cplx>() * c);
        X.set(0, kx, ky, w[0]);
        X.set(1, kx, ky, w[1]);
      }
    if (max_vector_gradient(X, 4 * K2) >= 0.5)
      throw NumericalError("gauge flow regularity bound violated (sup|grad X| >= 0.5)");
    GaugeMap step{{X}};
    h = pullback_metric(m, h, step, K2);
    out.map.generators.push_back(std::move(X));
    ++out.iterations;
  }
  out.normalized = std::move(h);
  return out;
}

}  // namespace mlslab
