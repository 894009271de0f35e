#pragma once
// Closed geodesics of g = g0 + f in a free-homotopy class, as minimizers of
// the discrete energy of a polyline in the universal cover whose last node
// is the deck image of the first.

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "mlslab/field.hpp"

namespace mlslab {

struct SolverOptions {
  double grad_tol = std::numeric_limits<double>::quiet_NaN();  // NaN: model default
  double rtol = 1e-7;
  int max_iters = 10000;  // per refinement level
  double init_nodes_per_unit_length = 64.0;
  bool cg = false;
  // Random displacement of the initial nodes, as a fraction of the
  // injectivity scale (0 = start on the background geodesic).
  double init_jitter = 0.0;
  std::uint64_t jitter_seed = 0;
  int max_levels = 8;
  int min_nodes = 16;
};

double default_grad_tol(const Model& m);

struct DiscreteLoop {
  ConjugacyClass cls;
  std::vector<Vec2> nodes;  // universal-cover coordinates; node n is implicit
};

struct SolveReport {
  double length = 0.0;
  double energy = 0.0;
  int iterations = 0;
  double grad_norm = 0.0;
  int refinement_levels = 0;
  int nodes = 0;
  // some descent stage stopped on a stalled gradient norm below 100 * grad_tol
  bool floor_stop = false;
  // sum of squared segment lengths times n; >= length^2
  double cs_energy = 0.0;
  DiscreteLoop loop;
};

SolveReport solve_geodesic(const Model& m, const Field& f, const ConjugacyClass& c,
                           const SolverOptions& opt = {});

struct SpectrumRecord {
  ConjugacyClass cls;
  double L0 = 0.0;
  double L = 0.0;
  double ratio = 0.0;
  int iterations = 0;
  double grad_norm = 0.0;
  int refinement_levels = 0;
  std::string error;  // empty on success
};

std::vector<SpectrumRecord> spectrum_batch(const Model& m, const Field& f,
                                           const std::vector<ConjugacyClass>& classes,
                                           const SolverOptions& opt = {});

}  // namespace mlslab
