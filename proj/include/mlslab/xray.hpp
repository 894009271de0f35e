#pragma once
// X-ray transforms of symmetric tensors along background closed geodesics,
// normalized by the background length.

#include <string>
#include <vector>

#include "mlslab/field.hpp"

namespace mlslab {

struct XrayRecord {
  ConjugacyClass cls;
  double L0 = 0.0;
  double value = 0.0;
  double quad_err = 0.0;
  std::string error;  // empty on success
};

// Torus: exact mode integrals along the line through x0. Hyperbolic:
// adaptive Simpson along the axis (x0 ignored).
XrayRecord xray_tensor(const Model& m, const Field& f, const ConjugacyClass& c,
                       Vec2 x0 = Vec2::Zero());

struct XrayBatch {
  std::vector<XrayRecord> records;
  double sup_norm = 0.0;
};
XrayBatch xray_batch(const Model& m, const Field& f, const std::vector<ConjugacyClass>& classes);

// On the flat torus the closed geodesics of a class form a family of
// parallel translates x0 = s * transversal, s in [0, 1). The X-ray along
// the translate is a trigonometric polynomial in s.
struct OffsetProfile {
  Vec2 transversal = Vec2::Zero();
  int J = 0;
  std::vector<cplx> coeffs;  // index j + J, j in [-J, J]
  double value(double s) const;
  double argmin() const { return extremum(1.0); }
  double min() const { return value(argmin()); }
  double sup_abs() const;

 private:
  double extremum(double sign) const;  // argmin of sign * value
};
OffsetProfile torus_offset_profile(const TorusModel& m, const TorusField& f, const TorusClass& c);

}  // namespace mlslab
