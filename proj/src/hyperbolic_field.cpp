#include "mlslab/hyperbolic_field.hpp"

#include <cmath>
#include <deque>

#include "mlslab/errors.hpp"
#include "mlslab/tensors.hpp"

namespace mlslab {

double bump_profile(double d, double r) {
  if (d >= r) return 0.0;
  double x = d / r;
  return std::exp(1.0 - 1.0 / (1.0 - x * x));
}

BumpField::BumpField(const FuchsianModel& model, int degree, std::vector<BumpTerm> terms)
    : model_(&model), degree_(degree), terms_(std::move(terms)) {
  if (degree < 0 || degree > 3) throw ConfigError("tensor degree must be 0..3");
  const double R = model.circumradius();
  for (const auto& t : terms_) {
    if (static_cast<int>(t.coeffs.size()) != degree + 1)
      throw ConfigError("bump coefficient count does not match the degree");
    if (!(t.radius > 0.0) || t.radius > R) throw ConfigError("bump radius out of range");
    if (!model.in_domain(t.center, 1e-9)) throw ConfigError("bump center outside the octagon");
    // Breadth-first over tiles; keep images of the center that can reach
    // the octagon, i.e. lie within R + radius of the origin.
    std::vector<Mobius> keep;
    std::vector<cplx> seen;
    std::deque<Mobius> queue{Mobius{}};
    seen.push_back(0.0);
    const double reach = R + t.radius;
    while (!queue.empty()) {
      Mobius h = queue.front();
      queue.pop_front();
      if (disk_distance(0.0, h(t.center)) < reach) keep.push_back(h);
      for (const auto& s : model.side_pairings()) {
        Mobius g = h * s;
        cplx o = g(0.0);
        if (disk_distance(0.0, o) > reach + R) continue;
        bool dup = false;
        for (cplx q : seen)
          if (std::abs(q - o) < 1e-9) {
            dup = true;
            break;
          }
        if (dup) continue;
        seen.push_back(o);
        queue.push_back(g);
      }
    }
    images_.push_back(std::move(keep));
  }
}

double BumpField::pullback(const Vec2& zin, const Vec2& vin) const {
  Mobius deck;
  cplx z0 = to_cplx(zin);
  cplx z = reduce_point(*model_, z0, &deck);
  cplx v = deck.inv().deriv(z0) * to_cplx(vin);
  double total = 0.0;
  for (std::size_t ti = 0; ti < terms_.size(); ++ti) {
    const auto& t = terms_[ti];
    for (const auto& h : images_[ti]) {
      double d = disk_distance(z, h(t.center));
      if (d >= t.radius) continue;
      Mobius hi = h.inv();
      cplx y = hi(z);
      cplx w = hi.deriv(z) * v;
      double speed = disk_lambda(y) * std::abs(w);
      double val = t.coeffs[0];
      if (degree_ > 0) {
        if (speed == 0.0) continue;
        Mobius Mc = to_origin(t.center);
        cplx u = Mc.deriv(y) * w;
        u /= std::abs(u);
        Vec2 uv = to_vec(u);
        val = pullback_from_components(degree_, t.coeffs.data(), uv) * std::pow(speed, degree_);
      }
      total += bump_profile(d, t.radius) * val;
    }
  }
  return total;
}

std::vector<double> BumpField::frame_components(const Vec2& z) const {
  double lam = disk_lambda(to_cplx(z));
  std::vector<double> out(degree_ + 1, 0.0);
  if (degree_ == 0) {
    out[0] = pullback(z, Vec2(1.0, 0.0));
    return out;
  }
  // Recover the components from samples of the homogeneous polynomial.
  const int m = degree_;
  Eigen::MatrixXd A(m + 1, m + 1);
  Eigen::VectorXd b(m + 1);
  for (int i = 0; i <= m; ++i) {
    double th = M_PI * i / (m + 1);
    Vec2 u(std::cos(th), std::sin(th));
    for (int j = 0; j <= m; ++j)
      A(i, j) = binomial(m, j) * std::pow(u.x(), m - j) * std::pow(u.y(), j);
    b[i] = pullback(z, u / lam);
  }
  Eigen::VectorXd c = A.partialPivLu().solve(b);
  for (int j = 0; j <= m; ++j) out[j] = c[j];
  return out;
}

BumpField BumpField::scaled(double s) const {
  BumpField out = *this;
  for (auto& t : out.terms_)
    for (auto& c : t.coeffs) c *= s;
  return out;
}

}  // namespace mlslab
