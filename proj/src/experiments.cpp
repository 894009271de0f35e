#include "mlslab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "mlslab/errors.hpp"
#include "mlslab/io.hpp"
#include "mlslab/parallel.hpp"

namespace mlslab {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Config

void ExperimentConfig::validate() const {
  if (!(0.0 < s && s < alpha && alpha < 1.0)) throw ConfigError("config needs 0 < s < alpha < 1");
  if (!(0.0 < nu && nu < 1.0)) throw ConfigError("config needs 0 < nu < 1");
  if (bound < 1) throw ConfigError("config bound must be >= 1");
  if (ensemble_size < 1) throw ConfigError("config ensemble_size must be >= 1");
  if (K < 1) throw ConfigError("config K must be >= 1");
  if (degree < 1 || degree > 3) throw ConfigError("config degree must be 1..3");
  if (isometry_members < 0 || isometry_bound < 1) throw ConfigError("bad isometry settings");
  if (!(isometry_grad > 0.0 && isometry_grad < 0.5)) throw ConfigError("isometry_grad must be in (0, 0.5)");
  if (t_values.empty()) throw ConfigError("t_values must be nonempty");
  for (double t : t_values)
    if (!(t > 0.0)) throw ConfigError("t_values must be positive");
  if (!(gauge_tol > 0.0)) throw ConfigError("gauge_tol must be positive");
}

json to_json(const ExperimentConfig& c) {
  return {{"s", c.s},
          {"alpha", c.alpha},
          {"nu", c.nu},
          {"bound", c.bound},
          {"ensemble_size", c.ensemble_size},
          {"seed", c.seed},
          {"K", c.K},
          {"degree", c.degree},
          {"isometry_members", c.isometry_members},
          {"isometry_bound", c.isometry_bound},
          {"isometry_grad", c.isometry_grad},
          {"t_values", c.t_values},
          {"gauge_tol", c.gauge_tol}};
}

namespace {
template <class T>
void read_key(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}
}  // namespace

ExperimentConfig experiment_config_from_json(const json& j) {
  ExperimentConfig c;
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      static const char* known[] = {"s", "alpha", "nu", "bound", "ensemble_size", "seed", "K",
                                    "degree", "isometry_members", "isometry_bound",
                                    "isometry_grad", "t_values", "gauge_tol", "T_or_bound"};
      if (std::find_if(std::begin(known), std::end(known),
                       [&](const char* k) { return it.key() == k; }) == std::end(known))
        throw ConfigError("unknown experiment key '" + it.key() + "'");
    }
    read_key(j, "s", c.s);
    read_key(j, "alpha", c.alpha);
    read_key(j, "nu", c.nu);
    read_key(j, "bound", c.bound);
    read_key(j, "T_or_bound", c.bound);
    read_key(j, "ensemble_size", c.ensemble_size);
    read_key(j, "seed", c.seed);
    read_key(j, "K", c.K);
    read_key(j, "degree", c.degree);
    read_key(j, "isometry_members", c.isometry_members);
    read_key(j, "isometry_bound", c.isometry_bound);
    read_key(j, "isometry_grad", c.isometry_grad);
    read_key(j, "t_values", c.t_values);
    read_key(j, "gauge_tol", c.gauge_tol);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

json to_json(const SolverOptions& o) {
  json j = {{"rtol", o.rtol},
            {"max_iters", o.max_iters},
            {"init_nodes_per_unit_length", o.init_nodes_per_unit_length},
            {"cg", o.cg},
            {"init_jitter", o.init_jitter},
            {"jitter_seed", o.jitter_seed},
            {"max_levels", o.max_levels},
            {"min_nodes", o.min_nodes}};
  j["grad_tol"] = std::isnan(o.grad_tol) ? json("default") : json(o.grad_tol);
  return j;
}

SolverOptions solver_options_from_json(const json& j) {
  SolverOptions o;
  try {
    if (j.contains("grad_tol") && j.at("grad_tol").is_number()) o.grad_tol = j.at("grad_tol").get<double>();
    read_key(j, "rtol", o.rtol);
    read_key(j, "max_iters", o.max_iters);
    read_key(j, "init_nodes_per_unit_length", o.init_nodes_per_unit_length);
    read_key(j, "cg", o.cg);
    read_key(j, "init_jitter", o.init_jitter);
    read_key(j, "jitter_seed", o.jitter_seed);
    read_key(j, "max_levels", o.max_levels);
    read_key(j, "min_nodes", o.min_nodes);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed solver options: ") + e.what());
  }
  if (!(o.rtol > 0.0) || o.max_iters < 1 || !(o.init_nodes_per_unit_length > 0.0) ||
      o.max_levels < 1 || o.min_nodes < 16)
    throw ConfigError("solver options out of range");
  return o;
}

// ---------------------------------------------------------------------------
// Field constructors

namespace {

std::map<std::string, std::string> parse_kv(const std::string& source, std::size_t from) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(source.substr(from));
  std::string item;
  while (std::getline(ss, item, ':')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("field source item '" + item + "' is not key=value");
    kv[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return kv;
}

double to_double(const std::string& s) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw ConfigError("bad number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError("bad number '" + s + "'");
  }
}

long long to_int(const std::string& s) {
  try {
    std::size_t pos = 0;
    long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw ConfigError("bad integer '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError("bad integer '" + s + "'");
  }
}

std::vector<double> to_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(item));
  return out;
}

void only_keys(const std::map<std::string, std::string>& kv, std::initializer_list<const char*> keys) {
  for (const auto& [k, v] : kv)
    if (std::find_if(keys.begin(), keys.end(), [&](const char* x) { return k == x; }) == keys.end())
      throw ConfigError("unknown field source key '" + k + "'");
}

const TorusModel& need_torus(const Model& m, const char* what) {
  const auto* t = std::get_if<TorusModel>(&m);
  if (!t) throw ConfigError(std::string(what) + " fields need the torus model");
  return *t;
}

Field scaled(const Field& f, double t) {
  if (const auto* tf = std::get_if<TorusField>(&f)) return t * (*tf);
  return std::get<BumpField>(f).scaled(t);
}

}  // namespace

TorusField random_conformal(const TorusModel& m, std::uint64_t seed, int K, double amp) {
  TorusField u = random_field(seed, K, 0);
  const int N = std::max(64, 4 * K);
  auto g = grid_values(u, N)[0];
  auto [lo, hi] = std::minmax_element(g.begin(), g.end());
  if (!(*hi > *lo)) throw NumericalError("degenerate conformal draw");
  // u' = amp (u - min) / (max - min) >= 0 on the grid
  TorusField v = (amp / (*hi - *lo)) * u;
  v.set(0, 0, 0, v.coeff(0, 0, 0) - amp * *lo / (*hi - *lo));
  return conformal_field(m, v);
}

TorusField random_potential(const TorusModel& m, std::uint64_t seed, int K, int degree, double amp) {
  if (degree < 1) throw ConfigError("potential fields need degree >= 1");
  TorusField p = random_field(seed, K, degree - 1);
  TorusField f = symmetric_derivative(p);
  double s = sup_surrogate(m, f, std::max(64, 4 * K));
  if (!(s > 0.0)) throw NumericalError("degenerate potential draw");
  return (amp / s) * f;
}

Field make_field(const std::string& source, const Model& m, int degree) {
  auto head = source.substr(0, source.find(':'));
  auto rest = source.find(':') == std::string::npos ? source.size() : source.find(':') + 1;
  if (source == "zero") {
    if (const auto* fm = std::get_if<FuchsianModel>(&m)) return BumpField(*fm, degree, {});
    return TorusField(degree, 0);
  }
  if (head == "const") {
    const auto& tm = need_torus(m, "const");
    (void)tm;
    auto c = to_list(source.substr(rest));
    return constant_field(c);
  }
  if (head == "random") {
    const auto& tm = need_torus(m, "random");
    auto kv = parse_kv(source, rest);
    only_keys(kv, {"seed", "K", "amp", "alpha", "degree"});
    std::uint64_t seed = kv.count("seed") ? to_int(kv["seed"]) : 1;
    int K = kv.count("K") ? static_cast<int>(to_int(kv["K"])) : 8;
    int deg = kv.count("degree") ? static_cast<int>(to_int(kv["degree"])) : degree;
    double amp = kv.count("amp") ? to_double(kv["amp"]) : 0.05;
    if (kv.count("alpha"))
      return random_solenoidal(tm, seed, K, deg, amp, to_double(kv["alpha"]));
    TorusField f = random_field(seed, K, deg);
    double s = sup_surrogate(tm, f, std::max(64, 4 * K));
    return (amp / s) * f;
  }
  if (head == "conformal") {
    const auto& tm = need_torus(m, "conformal");
    auto kv = parse_kv(source, rest);
    only_keys(kv, {"u", "seed", "K", "amp"});
    if (kv.count("u")) {
      TorusField u(0, 0);
      u.set(0, 0, 0, to_double(kv["u"]));
      return conformal_field(tm, u);
    }
    std::uint64_t seed = kv.count("seed") ? to_int(kv["seed"]) : 1;
    int K = kv.count("K") ? static_cast<int>(to_int(kv["K"])) : 4;
    double amp = kv.count("amp") ? to_double(kv["amp"]) : 0.05;
    return random_conformal(tm, seed, K, amp);
  }
  if (head == "potential") {
    const auto& tm = need_torus(m, "potential");
    auto kv = parse_kv(source, rest);
    only_keys(kv, {"seed", "K", "amp", "p", "degree"});
    std::uint64_t seed = kv.count("seed") ? to_int(kv["seed"]) : (kv.count("p") ? to_int(kv["p"]) : 1);
    int K = kv.count("K") ? static_cast<int>(to_int(kv["K"])) : 4;
    int deg = kv.count("degree") ? static_cast<int>(to_int(kv["degree"])) : degree;
    double amp = kv.count("amp") ? to_double(kv["amp"]) : 0.05;
    return random_potential(tm, seed, K, deg, amp);
  }
  if (head == "bump") {
    const auto* fm = std::get_if<FuchsianModel>(&m);
    if (!fm) throw ConfigError("bump fields need the bolza model");
    auto kv = parse_kv(source, rest);
    only_keys(kv, {"x", "y", "r", "c"});
    BumpTerm t;
    t.center = cplx(kv.count("x") ? to_double(kv["x"]) : 0.0, kv.count("y") ? to_double(kv["y"]) : 0.0);
    t.radius = kv.count("r") ? to_double(kv["r"]) : 1.0;
    t.coeffs = kv.count("c") ? to_list(kv["c"]) : std::vector<double>(degree + 1, 0.0);
    if (!kv.count("c")) t.coeffs[0] = 0.05;
    int deg = static_cast<int>(t.coeffs.size()) - 1;
    return BumpField(*fm, deg, {t});
  }
  if (std::filesystem::exists(source)) {
    json j;
    try {
      j = json::parse(read_text_file(source));
    } catch (const json::exception& e) {
      throw ConfigError("field file '" + source + "' is not valid JSON");
    }
    return field_from_json(j, m);
  }
  throw ConfigError("unknown field source '" + source + "'");
}

// ---------------------------------------------------------------------------

namespace {

// I2 f(c) as used by the first-order and positivity statements.
std::vector<double> first_order_values(const Model& m, const Field& f,
                                       const std::vector<ConjugacyClass>& classes) {
  std::vector<double> out(classes.size());
  parallel_for(classes.size(), [&](std::size_t i) {
    if (const auto* tm = std::get_if<TorusModel>(&m)) {
      out[i] = torus_offset_profile(*tm, std::get<TorusField>(f), std::get<TorusClass>(classes[i])).min();
    } else {
      XrayRecord r = xray_tensor(m, f, classes[i]);
      out[i] = r.value;
    }
  });
  return out;
}

void require_solved(const std::vector<SpectrumRecord>& recs) {
  for (const auto& r : recs)
    if (!r.error.empty()) throw NumericalError("class " + class_id(r.cls) + ": " + r.error);
}

double dmax(double a, double b) { return std::isnan(a) || a < b ? b : a; }

json model_summary(const Model& m) { return model_to_json(m); }

}  // namespace

Report linearization_check(const Model& m, const Field& f, const std::vector<double>& t_values,
                           const std::vector<ConjugacyClass>& classes, const SolverOptions& opt) {
  if (degree(f) != 2) throw ConfigError("linearization needs a degree-2 field");
  if (t_values.empty() || classes.empty()) throw ConfigError("linearization needs t values and classes");
  for (std::size_t i = 0; i < t_values.size(); ++i)
    if (!(t_values[i] > 0.0) || (i > 0 && !(t_values[i] < t_values[i - 1])))
      throw ConfigError("t values must be positive and decreasing");
  Report r;
  r.experiment = "linearization";
  r.config = {{"model", model_summary(m)}, {"t_values", t_values}, {"classes", classes.size()},
              {"solver", to_json(opt)}};
  std::vector<double> I = first_order_values(m, f, classes);
  Table detail{{"t", "class_id", "L_g0", "L_g", "ratio", "first_order", "residual"}, {}};
  Table conv{{"t", "R", "R_over_t2", "worst_class"}, {}};
  std::vector<double> q;
  double Rabs = 0.0;
  for (double t : t_values) {
    auto recs = spectrum_batch(m, scaled(f, t), classes, opt);
    require_solved(recs);
    double R = 0.0;
    std::string worst;
    for (std::size_t i = 0; i < recs.size(); ++i) {
      double lin = 1.0 + 0.5 * t * I[i];
      double res = std::abs(recs[i].ratio - lin);
      detail.add({t, class_id(recs[i].cls), recs[i].L0, recs[i].L, recs[i].ratio, I[i], res});
      if (res > R || worst.empty()) {
        R = std::max(R, res);
        worst = class_id(recs[i].cls);
      }
    }
    conv.add({t, R, R / (t * t), worst});
    q.push_back(R / (t * t));
    Rabs = std::max(Rabs, R);
  }
  double qmax = *std::max_element(q.begin(), q.end());
  // rounding level of the computed ratios: nothing left to scale
  if (Rabs <= 1e-12) {
    r.check("remainder_zero", true, Rabs, 1e-12);
  } else {
    double worst = 1.0;
    for (std::size_t i = 1; i < q.size(); ++i) {
      double ratio = q[i] > 0.0 ? q[i - 1] / q[i] : std::numeric_limits<double>::infinity();
      worst = std::max(worst, std::max(ratio, 1.0 / ratio));
    }
    r.check("remainder_bounded", std::isfinite(qmax), qmax, std::numeric_limits<double>::infinity());
    r.check("remainder_ratio_stable", worst <= 1.3, worst, 1.3);
  }
  r.summary = {{"R_over_t2", q}};
  r.tables["linearization"] = std::move(detail);
  r.tables["convergence"] = std::move(conv);
  return r;
}

Report positivity_check(const Model& m, const Field& f, const std::vector<ConjugacyClass>& classes,
                        const SolverOptions& opt, double tol) {
  if (degree(f) != 2) throw ConfigError("positivity needs a degree-2 field");
  Report r;
  r.experiment = "positivity";
  r.config = {{"model", model_summary(m)}, {"classes", classes.size()}, {"tol", tol},
              {"solver", to_json(opt)}};
  auto recs = spectrum_batch(m, f, classes, opt);
  require_solved(recs);
  std::vector<double> I = first_order_values(m, f, classes);
  Table t{{"class_id", "L_g0", "L_g", "ratio", "I2", "L_g0_times_I2", "hypothesis", "conclusion"}, {}};
  std::int64_t gated = 0, violations = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    bool hyp = recs[i].ratio >= 1.0 - opt.rtol;
    double lhs = recs[i].L0 * I[i];
    bool concl = lhs >= -tol;
    if (hyp) {
      ++gated;
      if (!concl) ++violations;
      worst = std::min(worst, lhs);
    }
    t.add({class_id(recs[i].cls), recs[i].L0, recs[i].L, recs[i].ratio, I[i], lhs,
           std::int64_t(hyp), hyp ? std::int64_t(concl) : std::int64_t(-1)});
  }
  r.check("no_violations", violations == 0, double(violations), 0.0);
  r.summary = {{"gated_classes", gated}, {"violations", violations}, {"most_negative", worst}};
  r.tables["positivity"] = std::move(t);
  return r;
}

Report volume_identity(const TorusModel& m, const TorusField& f, double t) {
  if (f.degree() != 2) throw ConfigError("volume identity needs a degree-2 field");
  Report r;
  r.experiment = "volume";
  r.config = {{"model", model_to_json(m)}, {"K", f.K()}, {"t", t}};
  const double avg_tr = trace(m, f).coeff(0, 0, 0).real();
  LiouvilleOptions lo;
  lo.torus_grid = std::max(64, 4 * f.K() + 4);
  lo.fiber = 16;
  FiberFunction F = [&f](const Vec2& x, const Vec2& v) { return pullback(f, x, v); };
  const double liou = liouville_average(Model{m}, F, lo);
  const double lhs = 0.5 * avg_tr;
  const double eq_err = std::abs(liou - lhs);
  const double eq_tol = 1e-10 * std::max(1.0, std::abs(lhs));
  r.check("liouville_equals_half_trace", eq_err <= eq_tol, eq_err, eq_tol);

  // volume expansion, mass-1 normalized by Vol_g0
  const int N = std::max(64, 8 * f.K());
  auto g = grid_values(f, N);
  const double d0 = std::sqrt(m.gram.determinant());
  auto vol = [&](double s) {
    double acc = 0.0;
    for (std::size_t i = 0; i < g[0].size(); ++i) {
      Mat2 G = m.gram;
      G(0, 0) += s * g[0][i];
      G(0, 1) += s * g[1][i];
      G(1, 0) += s * g[1][i];
      G(1, 1) += s * g[2][i];
      double det = G.determinant();
      if (!(det > 0.0)) throw NumericalError("g0 + t f is not positive-definite in the volume check");
      acc += std::sqrt(det) / d0;
    }
    return acc / double(g[0].size());
  };
  auto D = [&](double s) { return (vol(s) - vol(-s)) / (2.0 * s); };
  const double slope = (4.0 * D(t / 2.0) - D(t)) / 3.0;
  const double target = 0.5 * avg_tr;
  const double scale = std::max(std::abs(target), l2_norm(m, f));
  const double slope_err = std::abs(slope - target);
  r.check("volume_first_order", slope_err <= 1e-4 * scale, slope_err, 1e-4 * scale);

  Table tab{{"quantity", "value"}, {}};
  tab.add({std::string("avg_trace"), avg_tr});
  tab.add({std::string("half_avg_trace"), lhs});
  tab.add({std::string("liouville_average"), liou});
  tab.add({std::string("volume_slope_richardson"), slope});
  tab.add({std::string("volume_slope_target"), target});
  r.tables["volume"] = std::move(tab);
  r.summary = {{"liouville", liou}, {"half_avg_trace", lhs}, {"slope", slope}};
  return r;
}

Report parry_average(const FuchsianModel& m, const BumpField* F, const std::vector<double>& T_values,
                     const LiouvilleOptions& lopt, int max_word) {
  if (T_values.empty()) throw ConfigError("parry needs T values");
  std::vector<double> Ts = T_values;
  std::sort(Ts.begin(), Ts.end());
  if (F && F->degree() > 2) throw ConfigError("parry integrand must have degree <= 2");
  Report r;
  r.experiment = "parry";
  r.config = {{"model", "bolza"}, {"T_values", Ts}, {"max_word", max_word},
              {"integrand", F ? "pi" + std::to_string(F->degree()) + "_bump" : std::string("one")},
              {"disk_level", lopt.disk_level}};
  auto classes = enumerate_by_length(m, Ts.back(), max_word);
  std::size_t first = 0;
  for (const auto& c : classes)
    if (c.length <= Ts.front()) ++first;
  if (first == 0) throw ConfigError("no closed geodesics with length <= smallest T");
  std::vector<double> mean(classes.size(), 1.0);
  Model model = m;
  if (F) {
    Field field = *F;
    parallel_for(classes.size(), [&](std::size_t i) {
      mean[i] = xray_tensor(model, field, ConjugacyClass{classes[i].word}).value;
    });
  }
  double liou = 1.0;
  if (F) {
    FiberFunction FF = [F](const Vec2& x, const Vec2& v) { return F->pullback(x, v); };
    liou = liouville_average(model, FF, lopt);
  }
  Table tab{{"T", "classes", "average", "liouville", "abs_error"}, {}};
  std::vector<double> errs, avgs;
  for (double T : Ts) {
    double num = 0.0, den = 0.0;
    std::int64_t count = 0;
    for (std::size_t i = 0; i < classes.size() && classes[i].length <= T; ++i) {
      double w = std::exp(-classes[i].length);
      num += w * mean[i];
      den += w;
      ++count;
    }
    double avg = num / den;
    avgs.push_back(avg);
    errs.push_back(std::abs(avg - liou));
    tab.add({T, count, avg, liou, errs.back()});
  }
  if (!F) {
    double worst = 0.0;
    for (double a : avgs) worst = std::max(worst, std::abs(a - 1.0));
    r.check("constant_exactly_one", worst == 0.0, worst, 0.0);
  } else {
    r.check("error_decreases", errs.back() < errs.front(), errs.back(), errs.front());
  }
  r.summary = {{"liouville", liou}, {"classes", classes.size()}, {"errors", errs}};
  r.tables["parry"] = std::move(tab);
  return r;
}

Report gauge_check(const TorusModel& m, const TorusField& f, double tol, int max_iter,
                   std::uint64_t iso_seed, double iso_grad) {
  Report r;
  r.experiment = "gauge";
  r.config = {{"model", model_to_json(m)}, {"K", f.K()}, {"tol", tol}, {"max_iter", max_iter},
              {"iso_seed", iso_seed}, {"iso_grad", iso_grad}};
  GaugeResult g = gauge_normalize(m, f, tol, max_iter);
  double res = g.residuals.back();
  r.check("divergence_below_tol", res <= tol, res, tol);
  r.check("iterations_within_cap", g.iterations <= max_iter, g.iterations, max_iter);
  Table tab{{"case", "iteration", "residual"}, {}};
  for (std::size_t i = 0; i < g.residuals.size(); ++i)
    tab.add({std::string("input"), std::int64_t(i), g.residuals[i]});
  json summary = {{"iterations", g.iterations}, {"residual", res},
                  {"normalized_l2", l2_norm(m, g.normalized)}, {"input_l2", l2_norm(m, f)}};
  if (iso_seed != 0) {
    TorusField Y = random_vector_field(iso_seed, 2, iso_grad);
    TorusField h0 = pullback_metric(m, TorusField(2, 0), GaugeMap{{Y}}, std::max(8, f.K()));
    GaugeResult gi = gauge_normalize(m, h0, tol, max_iter);
    double nrm = l2_norm(m, gi.normalized);
    r.check("isometry_recovered", nrm <= 10.0 * tol, nrm, 10.0 * tol);
    for (std::size_t i = 0; i < gi.residuals.size(); ++i)
      tab.add({std::string("isometry"), std::int64_t(i), gi.residuals[i]});
    summary["isometry_input_l2"] = l2_norm(m, h0);
    summary["isometry_normalized_l2"] = nrm;
  }
  r.summary = summary;
  r.tables["gauge"] = std::move(tab);
  return r;
}

Report isometry_invariance(const TorusModel& m, const ExperimentConfig& c, const SolverOptions& opt) {
  Report r;
  r.experiment = "isometry";
  r.config = {{"model", model_to_json(m)}, {"experiment", to_json(c)}, {"solver", to_json(opt)}};
  Model model = m;
  auto classes = enumerate_classes(model, c.isometry_bound);
  Table tab{{"member", "seed", "c0_sup", "max_abs_ratio_minus_1", "worst_class"}, {}};
  double worst_dev = 0.0, min_c0 = std::numeric_limits<double>::infinity();
  const int Kiso = 12;
  for (int i = 0; i < c.isometry_members; ++i) {
    std::uint64_t seed = c.seed + 1000 + i;
    TorusField Y = random_vector_field(seed, 2, c.isometry_grad);
    TorusField h = pullback_metric(m, TorusField(2, 0), GaugeMap{{Y}}, Kiso);
    double c0 = sup_surrogate(m, h, 64);
    auto recs = spectrum_batch(model, h, classes, opt);
    require_solved(recs);
    double dev = 0.0;
    std::string wc = class_id(recs.front().cls);
    for (const auto& rec : recs)
      if (std::abs(rec.ratio - 1.0) > dev) {
        dev = std::abs(rec.ratio - 1.0);
        wc = class_id(rec.cls);
      }
    tab.add({std::int64_t(i), std::int64_t(seed), c0, dev, wc});
    worst_dev = std::max(worst_dev, dev);
    min_c0 = std::min(min_c0, c0);
  }
  r.check("lengths_invariant", worst_dev <= 10.0 * opt.rtol, worst_dev, 10.0 * opt.rtol);
  r.check("perturbation_visible", min_c0 >= 1e-3, min_c0, 1e-3);
  r.tables["isometry"] = std::move(tab);
  r.summary = {{"max_deviation", worst_dev}, {"min_c0", min_c0}};
  return r;
}

double rank_correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  if (n != b.size() || n < 2) throw ConfigError("rank correlation needs two equal samples of size >= 2");
  auto ranks = [n](const std::vector<double>& x) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return x[i] < x[j]; });
    std::vector<double> rk(n);
    for (std::size_t i = 0; i < n;) {
      std::size_t j = i;
      while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
      double avg = 0.5 * double(i + j);
      for (std::size_t k = i; k <= j; ++k) rk[idx[k]] = avg;
      i = j + 1;
    }
    return rk;
  };
  auto ra = ranks(a), rb = ranks(b);
  double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

namespace {

struct StabilityRow {
  double lhs = 0.0, isup = 0.0, holder = 0.0, rhs = 0.0, ratio = 0.0;
};

StabilityRow stability_terms(const TorusModel& m, const TorusField& f,
                             const std::vector<ConjugacyClass>& classes, const ExperimentConfig& c) {
  StabilityRow row;
  row.lhs = sobolev_norm(m, f, -1.0 - c.s);
  for (const auto& cl : classes)
    row.isup = std::max(row.isup, torus_offset_profile(m, f, std::get<TorusClass>(cl)).sup_abs());
  row.holder = holder_surrogate(m, f, c.alpha);
  row.rhs = std::pow(row.isup, 0.5 * (1.0 - c.nu)) * std::pow(row.holder + row.isup, 0.5 * (1.0 + c.nu));
  row.ratio = row.rhs > 0.0 ? row.lhs / row.rhs : (row.lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  return row;
}

}  // namespace

Report stability_probe(const TorusModel& m, const ExperimentConfig& c) {
  c.validate();
  if (c.ensemble_size < 10) throw ConfigError("stability probe needs ensemble_size >= 10");
  Report r;
  r.experiment = "stability";
  r.config = {{"model", model_to_json(m)}, {"experiment", to_json(c)}};
  Model model = m;
  auto classes = enumerate_classes(model, c.bound);
  std::vector<StabilityRow> rows(c.ensemble_size);
  std::vector<TorusField> fields(c.ensemble_size);
  parallel_for(rows.size(), [&](std::size_t i) {
    fields[i] = random_solenoidal(m, c.seed + i, c.K, c.degree, 1.0, c.alpha);
    rows[i] = stability_terms(m, fields[i], classes, c);
  });
  Table scatter{{"member", "seed", "lhs_sobolev", "xray_sup", "holder", "rhs_without_C", "ratio"}, {}};
  double C = 0.0;
  std::vector<double> lhs, fac;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& w = rows[i];
    scatter.add({std::int64_t(i), std::int64_t(c.seed + i), w.lhs, w.isup, w.holder, w.rhs, w.ratio});
    C = dmax(C, w.ratio);
    lhs.push_back(w.lhs);
    fac.push_back(std::pow(w.isup, 0.5 * (1.0 - c.nu)));
  }
  r.check("constant_finite", std::isfinite(C) && C > 0.0, C, std::numeric_limits<double>::infinity());

  // homogeneity: f -> lambda f leaves the ratio unchanged
  const double lambda = 2.5;
  StabilityRow scaled_row = stability_terms(m, lambda * fields[0], classes, c);
  double hom = std::abs(scaled_row.ratio / rows[0].ratio - 1.0);
  double lhs_hom = std::abs(scaled_row.lhs / (lambda * rows[0].lhs) - 1.0);
  double rhs_hom = std::abs(scaled_row.rhs / (lambda * rows[0].rhs) - 1.0);
  double hom_worst = std::max({hom, lhs_hom, rhs_hom});
  r.check("homogeneity", hom_worst <= 1e-9, hom_worst, 1e-9);

  double rho = rank_correlation(lhs, fac);
  r.check("rank_correlation_positive", rho > 0.0, rho, 0.0);

  // an injected potential is invisible to both sides after projection
  TorusField pot = random_potential(m, c.seed + 7777, c.K, c.degree, 1.0);
  double pot_isup = 0.0;
  for (const auto& cl : classes)
    pot_isup = std::max(pot_isup, torus_offset_profile(m, pot, std::get<TorusClass>(cl)).sup_abs());
  double pot_lhs = sobolev_norm(m, solenoidal_project(m, pot).solenoidal, -1.0 - c.s);
  double pot_ref = sobolev_norm(m, pot, -1.0 - c.s);
  r.check("potential_xray_vanishes", pot_isup <= 1e-8, pot_isup, 1e-8);
  r.check("potential_lhs_vanishes", pot_lhs <= 1e-10 * pot_ref, pot_lhs, 1e-10 * pot_ref);

  r.summary = {{"C_hat", C}, {"rank_correlation", rho}, {"classes", classes.size()},
               {"homogeneity_error", hom_worst}};
  r.tables["stability_scatter"] = std::move(scatter);
  return r;
}

Report mls_probe(const TorusModel& m, const ExperimentConfig& c, const SolverOptions& opt) {
  c.validate();
  Report r;
  r.experiment = "mls";
  r.config = {{"model", model_to_json(m)}, {"experiment", to_json(c)}, {"solver", to_json(opt)}};
  Model model = m;
  auto classes = enumerate_classes(model, c.bound);

  // g = g0
  {
    auto recs = spectrum_batch(model, TorusField(2, 0), classes, opt);
    require_solved(recs);
    double dev = 0.0;
    for (const auto& rec : recs) dev = std::max(dev, std::abs(rec.ratio - 1.0));
    r.check("background_zero", dev <= 10.0 * opt.rtol, dev, 10.0 * opt.rtol);
  }

  Report iso = isometry_invariance(m, c, opt);
  for (auto& a : iso.assertions) r.assertions.push_back(a);
  r.tables["mls_isometry"] = iso.tables["isometry"];

  Table tab{{"member", "seed", "t", "gauge_iterations", "lhs_sobolev", "mls_deviation", "C_fit"}, {}};
  double worst_spread = 1.0;
  for (int i = 0; i < c.ensemble_size; ++i) {
    std::uint64_t seed = c.seed + i;
    TorusField f = random_solenoidal(m, seed, c.K, 2, 1.0, c.alpha);
    double cmin = std::numeric_limits<double>::infinity(), cmax = 0.0;
    for (double t : c.t_values) {
      TorusField ft = t * f;
      GaugeResult g = gauge_normalize(m, ft, c.gauge_tol);
      double lhs = sobolev_norm(m, g.normalized, -1.0 - c.s);
      auto recs = spectrum_batch(model, ft, classes, opt);
      require_solved(recs);
      double dev = 0.0;
      for (const auto& rec : recs) dev = std::max(dev, std::abs(rec.ratio - 1.0));
      double denom = std::pow(dev, 0.5 * (1.0 - c.nu)) + dev;
      double cf = denom > 0.0 ? lhs / denom : std::numeric_limits<double>::infinity();
      tab.add({std::int64_t(i), std::int64_t(seed), t, std::int64_t(g.iterations), lhs, dev, cf});
      cmin = std::min(cmin, cf);
      cmax = std::max(cmax, cf);
    }
    worst_spread = std::max(worst_spread, cmax / cmin);
  }
  if (c.t_values.size() > 1) r.check("fit_stable_across_t", worst_spread <= 2.0, worst_spread, 2.0);
  r.summary = {{"classes", classes.size()}, {"worst_spread", worst_spread}};
  r.tables["mls"] = std::move(tab);
  return r;
}

}  // namespace mlslab
