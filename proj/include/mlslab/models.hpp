#pragma once
// Background geometries: the flat torus R^2/Z^2 with a constant Gram matrix
// and the Bolza genus-2 surface as a Fuchsian group acting on the disk.

#include <array>
#include <complex>
#include <functional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "mlslab/homotopy.hpp"

namespace mlslab {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using cplx = std::complex<double>;

inline cplx to_cplx(const Vec2& v) { return {v.x(), v.y()}; }
inline Vec2 to_vec(cplx z) { return {z.real(), z.imag()}; }

// Disk isometry z -> (a z + b) / (conj(b) z + conj(a)), |a|^2 - |b|^2 = 1.
struct Mobius {
  cplx a{1.0, 0.0};
  cplx b{0.0, 0.0};

  cplx operator()(cplx z) const { return (a * z + b) / (std::conj(b) * z + std::conj(a)); }
  cplx deriv(cplx z) const {
    cplx den = std::conj(b) * z + std::conj(a);
    return 1.0 / (den * den);
  }
  Mobius inv() const { return {std::conj(a), -b}; }
  double trace() const { return 2.0 * a.real(); }
  Mobius operator*(const Mobius& o) const {
    return {a * o.a + b * std::conj(o.b), a * o.b + b * std::conj(o.a)};
  }
};

// Isometry sending z to the origin with positive real derivative there.
Mobius to_origin(cplx z);
double disk_distance(cplx z, cplx w);
// Conformal factor of the Poincare metric 4|dz|^2/(1-|z|^2)^2.
inline double disk_lambda(cplx z) { return 2.0 / (1.0 - std::norm(z)); }

struct TorusModel {
  Mat2 gram = Mat2::Identity();
  TorusModel() = default;
  explicit TorusModel(const Mat2& g);  // validates positive-definiteness
};

class FuchsianModel {
 public:
  // The Bolza surface: regular octagon with angles pi/4.
  static FuchsianModel bolza();

  const Mobius& generator(Letter x) const { return gens_[static_cast<int>(x)]; }
  // Real SL(2,R) matrix of a generator (upper half-plane model).
  Mat2 sl2r(Letter x) const;
  Mobius word_matrix(std::span<const Letter> w) const;

  // Side pairings s_0..s_7 = g0, g0^-1, g1, g1^-1, ..., g3^-1; g_k translates
  // the origin towards angle k*pi/4.
  const std::array<Mobius, 8>& side_pairings() const { return sides_; }
  const Word& side_word(int k) const { return side_words_[k]; }
  const std::array<cplx, 8>& octagon_vertices() const { return vertices_; }

  double relator_residual() const { return relator_residual_; }
  double inradius() const { return inradius_; }
  double circumradius() const { return circumradius_; }
  double systole() const { return systole_; }

  // Closed octagon membership with tolerance on the defining inequalities.
  bool in_domain(cplx z, double tol = 1e-12) const;

 private:
  FuchsianModel() = default;
  std::array<Mobius, 8> gens_{};
  std::array<Mobius, 8> sides_{};
  std::array<Word, 8> side_words_{};
  std::array<cplx, 8> vertices_{};
  double relator_residual_ = 0.0;
  double inradius_ = 0.0;
  double circumradius_ = 0.0;
  double systole_ = 0.0;
};

using Model = std::variant<TorusModel, FuchsianModel>;

bool is_torus(const Model& m);

double background_length(const Model& m, const ConjugacyClass& c);

// Unit-speed point on SM: position in the fundamental domain and tangent
// vector in coordinates (lattice coordinates / disk coordinates).
struct TangentPoint {
  Vec2 x;
  Vec2 v;
};

class BackgroundGeodesic {
 public:
  const ConjugacyClass& cls() const { return cls_; }
  double length() const { return length_; }
  TangentPoint point_at(double t) const;
  // Unreduced point in the universal cover (torus: R^2, hyperbolic: disk).
  TangentPoint lift_at(double t) const;

 private:
  friend BackgroundGeodesic background_geodesic(const Model&, const ConjugacyClass&, Vec2);
  ConjugacyClass cls_;
  double length_ = 0.0;
  const FuchsianModel* fuchsian_ = nullptr;
  Vec2 x0_ = Vec2::Zero();
  Vec2 dir_ = Vec2::Zero();  // torus: unit velocity
  Mobius frame_;             // hyperbolic: maps (-1,1) onto the axis
};

// x0 is the torus start point (ignored on the hyperbolic model, where the
// start is the point of the axis closest to the origin). The model must
// outlive the returned geodesic.
BackgroundGeodesic background_geodesic(const Model& m, const ConjugacyClass& c,
                                       Vec2 x0 = Vec2::Zero());

struct TorusReduction {
  Vec2 point;
  int p = 0, q = 0;  // input = point + (p, q)
};
TorusReduction reduce_to_fundamental_domain(const TorusModel& m, Vec2 x);

struct DiskReduction {
  cplx point;
  Mobius deck;  // input = deck(point)
  Word word;    // deck as a reduced word in a, b, c, d
};
DiskReduction reduce_to_fundamental_domain(const FuchsianModel& m, cplx z);
// Hot-path variant without word bookkeeping.
cplx reduce_point(const FuchsianModel& m, cplx z, Mobius* deck);

// F(x, v) with v unit for g0, both in model coordinates.
using FiberFunction = std::function<double(const Vec2&, const Vec2&)>;

struct LiouvilleOptions {
  int torus_grid = 64;
  int fiber = 16;
  int disk_level = 5;  // octagon refinement; Richardson uses level and level+1
};

double liouville_average(const Model& m, const FiberFunction& F,
                         const LiouvilleOptions& opt = {});

// Geodesic flow of g0 for time t starting at (x, v) in the universal cover.
TangentPoint geodesic_flow(const Model& m, const TangentPoint& p, double t);

// All classes of the enumeration bound, sorted by (background length, id).
std::vector<ConjugacyClass> enumerate_classes(const Model& m, int bound);

// Hyperbolic classes with background length <= T, found geometrically from
// side-pairing words of length <= max_word whose axis meets the octagon.
struct LengthClass {
  CyclicWord word;
  double length;
};
std::vector<LengthClass> enumerate_by_length(const FuchsianModel& m, double T,
                                             int max_word = 12);

}  // namespace mlslab
