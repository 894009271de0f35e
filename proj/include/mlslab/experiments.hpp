#pragma once
// Numerical checks of the length-spectrum identities and inequalities, each
// returning a Report with named assertions and CSV tables.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "mlslab/gauge.hpp"
#include "mlslab/geodesic_solver.hpp"
#include "mlslab/report.hpp"
#include "mlslab/xray.hpp"

namespace mlslab {

struct ExperimentConfig {
  double s = 0.1;      // Sobolev offset
  double alpha = 0.5;  // Holder exponent of the surrogate
  double nu = 0.5;     // interpolation exponent
  int bound = 8;       // class enumeration bound
  int ensemble_size = 50;
  std::uint64_t seed = 1;
  int K = 8;           // band limit of random fields
  int degree = 2;
  // mls probe
  int isometry_members = 5;
  int isometry_bound = 5;
  double isometry_grad = 0.02;  // sup|grad Y| of the random diffeo generator
  std::vector<double> t_values{1e-2, 5e-3};
  double gauge_tol = 1e-8;

  void validate() const;  // throws ConfigError
};

nlohmann::json to_json(const ExperimentConfig& c);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SolverOptions& o);
SolverOptions solver_options_from_json(const nlohmann::json& j);

// Field constructors from a short source string (see README):
//   zero | const:a,b,c | random:seed=S:K=K[:amp=A][:alpha=A][:degree=m]
//   conformal:u=U | conformal:seed=S:K=K:amp=A | potential:seed=S:K=K:amp=A
//   bump:x=X:y=Y:r=R:c=c0,c1,... (Bolza) | path to a field JSON file
Field make_field(const std::string& source, const Model& m, int degree = 2);

// Scalar u >= 0 with max u = amp, as the conformal field 2 u g0.
TorusField random_conformal(const TorusModel& m, std::uint64_t seed, int K, double amp);
// D p for a random (m-1)-tensor p, rescaled so that sup |Dp| = amp.
TorusField random_potential(const TorusModel& m, std::uint64_t seed, int K, int degree, double amp);

// sup over classes of |L(g0 + t f)(c) - 1 - (t/2) I2 f(c)| / t^2. On the torus
// I2 f(c) is taken at the minimizing transversal offset.
Report linearization_check(const Model& m, const Field& f, const std::vector<double>& t_values,
                           const std::vector<ConjugacyClass>& classes, const SolverOptions& opt);

// Classes with L_g(c) >= L_g0(c) (1 - rtol) must have L_g0(c) I2 f(c) >= -tol.
Report positivity_check(const Model& m, const Field& f, const std::vector<ConjugacyClass>& classes,
                        const SolverOptions& opt, double tol = 1e-6);

// int_SM pi2^* f dmu = (1/2) avg_M Tr f, and d/dt Vol(g0 + t f) = (1/2) int Tr f.
Report volume_identity(const TorusModel& m, const TorusField& f, double t = 1e-2);

// Weighted closed-geodesic averages of F versus the Liouville average.
// F is pi_0^* u or pi_1^* w for a bump field; nullptr means F = 1.
Report parry_average(const FuchsianModel& m, const BumpField* F, const std::vector<double>& T_values,
                     const LiouvilleOptions& lopt = {}, int max_word = 12);

// gauge_normalize on f; if iso_seed != 0 also recovers a random isometric
// metric phi0^* g0.
Report gauge_check(const TorusModel& m, const TorusField& f, double tol, int max_iter = 50,
                   std::uint64_t iso_seed = 0, double iso_grad = 0.05);

// Lengths of phi0^* g0 for random small diffeos phi0.
Report isometry_invariance(const TorusModel& m, const ExperimentConfig& c, const SolverOptions& opt);

Report stability_probe(const TorusModel& m, const ExperimentConfig& c);
Report mls_probe(const TorusModel& m, const ExperimentConfig& c, const SolverOptions& opt);

// Spearman rank correlation (average ranks for ties).
double rank_correlation(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace mlslab
