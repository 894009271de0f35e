#pragma once
// Symmetric tensor fields on the Bolza surface given as sums of smooth
// geodesic bumps, made group-invariant by summing over images.

#include <vector>

#include "mlslab/models.hpp"

namespace mlslab {

struct BumpTerm {
  cplx center;                  // point of the octagon
  double radius = 0.5;          // hyperbolic support radius
  std::vector<double> coeffs;   // components in the orthonormal frame at center
};

class BumpField {
 public:
  BumpField() = default;
  // The model must outlive the field.
  BumpField(const FuchsianModel& model, int degree, std::vector<BumpTerm> terms);

  int degree() const { return degree_; }
  const std::vector<BumpTerm>& terms() const { return terms_; }
  const FuchsianModel& model() const { return *model_; }

  // f(z)(v,...,v) for any disk point z and Euclidean-coordinate vector v.
  double pullback(const Vec2& z, const Vec2& v) const;
  // Components in the orthonormal frame (e1, e2)/lambda(z) at z.
  std::vector<double> frame_components(const Vec2& z) const;

  BumpField scaled(double s) const;

 private:
  const FuchsianModel* model_ = nullptr;
  int degree_ = 0;
  std::vector<BumpTerm> terms_;
  std::vector<std::vector<Mobius>> images_;  // per term: h with h(center) near the octagon
};

// Smooth profile exp(1 - 1/(1 - (d/r)^2)) on d < r, 1 at the center.
double bump_profile(double d, double r);

}  // namespace mlslab
