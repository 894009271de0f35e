#pragma once
// Symmetric m-tensor fields on the torus as truncated Fourier series, with
// the flat tensor calculus (D, D*, solenoidal projection) and norms.
//
// Component j of a degree-m field is the coefficient of the basis element
// with j y-indices, e.g. m = 2: f0 dx^2 + 2 f1 dx dy + f2 dy^2, so that
// f(v,...,v) = sum_j C(m,j) f_j v1^(m-j) v2^j.

#include <complex>
#include <cstdint>
#include <map>
#include <vector>

#include "mlslab/models.hpp"

namespace mlslab {

class TorusField {
 public:
  TorusField() = default;
  TorusField(int degree, int K);

  int degree() const { return degree_; }
  int K() const { return K_; }
  int side() const { return 2 * K_ + 1; }
  int components() const { return degree_ + 1; }
  std::size_t index(int comp, int kx, int ky) const {
    return (static_cast<std::size_t>(comp) * side() + (kx + K_)) * side() + (ky + K_);
  }
  cplx coeff(int comp, int kx, int ky) const {
    std::size_t i = index(comp, kx, ky);
    return {re_[i], im_[i]};
  }
  void set(int comp, int kx, int ky, cplx v) {
    std::size_t i = index(comp, kx, ky);
    re_[i] = v.real();
    im_[i] = v.imag();
  }
  // Sets the coefficient at k and its conjugate at -k.
  void set_real_mode(int comp, int kx, int ky, cplx v);

  const std::vector<double>& re() const { return re_; }
  const std::vector<double>& im() const { return im_; }
  std::vector<double>& re() { return re_; }
  std::vector<double>& im() { return im_; }

  // Zero-padded or truncated copy with band limit K2.
  TorusField with_band(int K2) const;
  double max_conjugate_asymmetry() const;
  bool operator==(const TorusField&) const = default;

  TorusField& operator+=(const TorusField& o);
  TorusField& operator-=(const TorusField& o);
  TorusField& operator*=(double s);

 private:
  int degree_ = 0;
  int K_ = 0;
  std::vector<double> re_, im_;
};

TorusField operator+(TorusField a, const TorusField& b);
TorusField operator-(TorusField a, const TorusField& b);
TorusField operator*(double s, TorusField a);

// Constant tensor with the given components.
TorusField constant_field(const std::vector<double>& comps, int K = 0);
// 2 u g0 for a scalar field u.
TorusField conformal_field(const TorusModel& m, const TorusField& u);

double binomial(int n, int k);

// Point evaluation with gradients. Not thread-safe: use one per thread.
class FieldEvaluator {
 public:
  explicit FieldEvaluator(const TorusField& f);
  const TorusField& field() const { return *f_; }
  // vals[j] = f_j(x)
  void values(const Vec2& x, double* vals);
  // also d/dx and d/dy of each component
  void values_and_gradient(const Vec2& x, double* vals, double* dx, double* dy);

 private:
  void phases(const Vec2& x);
  const TorusField* f_;
  int n_;
  std::vector<double> kyre_, kyim_;  // ky * coefficient
  std::vector<double> exr_, exi_, eyr_, eyi_;
  std::vector<double> sr_, si_, tr_, ti_;
};

double pullback(const TorusField& f, const Vec2& x, const Vec2& v);
double pullback_from_components(int degree, const double* comps, const Vec2& v);

// Samples d^a/dx^a d^b/dy^b f_j on the N x N grid x = (i/N, k/N).
// Result is indexed [j][i*N + k].
std::vector<std::vector<double>> grid_values(const TorusField& f, int N, int a = 0, int b = 0);
// Forward transform of grid samples of a degree-m field back to band K.
TorusField fit_from_grid(const std::vector<std::vector<double>>& samples, int N, int degree, int K);

TorusField symmetric_derivative(const TorusField& p);
TorusField divergence(const TorusModel& m, const TorusField& f);
// g0-trace of a degree-2 field (degree-0 result).
TorusField trace(const TorusModel& m, const TorusField& f);

// L2 inner product with full g0 contraction, mass-1 normalization.
double inner(const TorusModel& m, const TorusField& f, const TorusField& h);
double l2_norm(const TorusModel& m, const TorusField& f);
// Pointwise |T|_{g0} of a symmetric tensor given by components.
double pointwise_norm(const TorusModel& m, int degree, const double* comps);

struct Decomposition {
  TorusField solenoidal;
  TorusField potential;  // degree m-1, zero mean
};
// Direct per-frequency solve of D*D p = D*f.
Decomposition solenoidal_project(const TorusModel& m, const TorusField& f);
// Independent route: conjugate gradients on the full coefficient vector.
Decomposition solenoidal_project_cg(const TorusModel& m, const TorusField& f,
                                    double tol = 1e-14, int max_iter = 10000);

struct NormReport {
  std::map<double, double> sobolev;
  std::map<double, double> holder_surrogate;
  double l2 = 0.0;
  double c3_surrogate = 0.0;
};

double sobolev_norm(const TorusModel& m, const TorusField& f, double s);
double holder_surrogate(const TorusModel& m, const TorusField& f, double alpha, int N = 256);
double sup_surrogate(const TorusModel& m, const TorusField& f, int N = 256);
double c3_surrogate(const TorusModel& m, const TorusField& f, int N = 128);
NormReport norms(const TorusModel& m, const TorusField& f, const std::vector<double>& s_list,
                 const std::vector<double>& alpha_list, bool with_c3 = false);

// Real Gaussian field with coefficient scale max(1,|k|)^-3.
TorusField random_field(std::uint64_t seed, int K, int degree);
// Solenoidal draw rescaled so holder_surrogate(alpha) equals target.
TorusField random_solenoidal(const TorusModel& m, std::uint64_t seed, int K, int degree,
                             double target, double alpha = 0.5);

}  // namespace mlslab
