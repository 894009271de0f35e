#pragma once
// Diffeomorphisms of the torus isotopic to the identity, given as
// compositions of time-1 flows of band-limited vector fields, and the gauge
// normalization that makes the metric difference divergence-free.

#include <vector>

#include "mlslab/tensors.hpp"

namespace mlslab {

// Time-1 flow of the vector field X (degree-1 field, component j is the j-th
// coordinate of the vector), classical RK4 with the variational equation.
Vec2 flow(const TorusField& X, const Vec2& x, Mat2* jacobian = nullptr, int steps = 16);

// sup |grad X| (Frobenius) sampled on an N x N grid.
double max_vector_gradient(const TorusField& X, int N = 64);

struct GaugeMap {
  // phi = flow(generators[0]) o flow(generators[1]) o ...
  std::vector<TorusField> generators;
  Vec2 apply(const Vec2& x, Mat2* jacobian = nullptr) const;
  bool identity() const { return generators.empty(); }
};

// phi^*(g0 + h) - g0, sampled on a 4K x 4K grid and re-expanded to band K.
TorusField pullback_metric(const TorusModel& m, const TorusField& h, const GaugeMap& phi, int K);

// Random vector field with coefficient scale max(1,|k|)^-3, rescaled so that
// max_vector_gradient equals grad_sup.
TorusField random_vector_field(std::uint64_t seed, int K, double grad_sup);

struct GaugeResult {
  GaugeMap map;
  TorusField normalized;          // phi^*g - g0, band 2K
  int iterations = 0;
  std::vector<double> residuals;  // ||D* h||_L2 before each step
};

// Fixed-point iteration: solve D*D v = D*h, flow by X = -G0^-1 v / 2, pull
// back, re-expand; stops when ||D* h||_L2 <= tol.
GaugeResult gauge_normalize(const TorusModel& m, const TorusField& f, double tol,
                            int max_iter = 50);

}  // namespace mlslab
