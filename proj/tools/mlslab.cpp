// mlslab command-line front end.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mlslab/errors.hpp"
#include "mlslab/experiments.hpp"
#include "mlslab/io.hpp"
#include "mlslab/parallel.hpp"
#include "mlslab/simd.hpp"

using namespace mlslab;
using nlohmann::json;

namespace {

constexpr int kOk = 0, kAssert = 1, kUsage = 2, kNumerical = 3;

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out;
}

int fail(const std::string& kind, int code, const std::string& msg) {
  std::cerr << "mlslab: error kind=" << kind << " code=" << code << " msg=\"" << escape(msg) << "\"\n";
  return code;
}

Model parse_model(const std::string& source) {
  if (source == "bolza") return FuchsianModel::bolza();
  if (source == "torus") return TorusModel();
  if (source.rfind("torus:", 0) == 0) {
    std::vector<double> g;
    std::stringstream ss(source.substr(6));
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t pos = 0;
        g.push_back(std::stod(item, &pos));
        if (pos != item.size()) throw std::invalid_argument(item);
      } catch (const std::logic_error&) {
        throw ConfigError("bad gram entry '" + item + "'");
      }
    }
    if (g.size() != 3) throw ConfigError("torus gram needs g11,g12,g22");
    Mat2 G;
    G << g[0], g[1], g[1], g[2];
    return TorusModel(G);
  }
  if (std::filesystem::exists(source)) {
    try {
      return model_from_json(json::parse(read_text_file(source)));
    } catch (const json::exception& e) {
      throw ConfigError("model file '" + source + "' is malformed");
    }
  }
  throw ConfigError("unknown model '" + source + "'");
}

const TorusModel& torus_only(const Model& m, const std::string& what) {
  const auto* t = std::get_if<TorusModel>(&m);
  if (!t) throw ConfigError(what + " runs on the torus model only");
  return *t;
}

std::vector<ConjugacyClass> classes_for(const Model& m, int bound) {
  if (bound < 1) throw ConfigError("bound must be >= 1");
  return enumerate_classes(m, bound);
}

struct SolverFlags {
  double rtol = 1e-7;
  double grad_tol = std::numeric_limits<double>::quiet_NaN();
  int max_iters = 10000;
  bool cg = false;
  double jitter = 0.0;
  std::uint64_t jitter_seed = 0;

  void add(CLI::App* app) {
    app->add_option("--rtol", rtol, "refinement tolerance on L")->check(CLI::PositiveNumber);
    app->add_option("--grad-tol", grad_tol, "descent stopping tolerance (default: per model)");
    app->add_option("--max-iters", max_iters, "descent iterations per level")->check(CLI::PositiveNumber);
    app->add_flag("--cg", cg, "nonlinear CG instead of subspace Newton steps");
    app->add_option("--jitter", jitter, "initial node jitter (fraction of injectivity scale)");
    app->add_option("--jitter-seed", jitter_seed, "seed of the initial jitter");
  }
  SolverOptions options() const {
    SolverOptions o;
    o.rtol = rtol;
    o.grad_tol = grad_tol;
    o.max_iters = max_iters;
    o.cg = cg;
    o.init_jitter = jitter;
    o.jitter_seed = jitter_seed;
    return o;
  }
};

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw ConfigError(std::string("bad ") + what + " entry '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError(std::string("empty ") + what + " list");
  return out;
}

// Config for probes: {"model": "torus" | {...}, "solver": {...}, <ExperimentConfig keys>}
struct ProbeConfig {
  Model model = TorusModel();
  ExperimentConfig exp;
  SolverOptions solver;
};

ProbeConfig load_probe_config(const std::string& path) {
  ProbeConfig pc;
  if (path.empty()) return pc;
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "' is not valid JSON");
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  if (j.contains("model")) {
    const auto& mj = j.at("model");
    pc.model = mj.is_string() ? parse_model(mj.get<std::string>()) : model_from_json(mj);
    j.erase("model");
  }
  if (j.contains("solver")) {
    pc.solver = solver_options_from_json(j.at("solver"));
    j.erase("solver");
  }
  pc.exp = experiment_config_from_json(j);
  return pc;
}

std::string joined_argv(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

int emit(const Report& r, const std::string& out_dir, const json& resolved, std::uint64_t seed,
         const std::string& cmdline, double wall) {
  std::filesystem::create_directories(out_dir);
  const std::string digest = config_digest(resolved);
  RunManifest man;
  man.command_line = cmdline;
  man.config_digest = digest;
  man.seed = seed;
  man.version = MLSLAB_VERSION;
  man.wall_time_s = wall;
  for (const auto& [name, table] : r.tables) {
    write_text_file(out_dir + "/" + name + ".csv", to_csv(table, digest));
    man.outputs.push_back(name + ".csv");
  }
  json rep = report_to_json(r);
  rep["config_digest"] = digest;
  write_text_file(out_dir + "/" + r.experiment + ".json", rep.dump(2) + "\n");
  man.outputs.push_back(r.experiment + ".json");
  json mj = manifest_to_json(man);
  mj["resolved_config"] = resolved;
  mj["threads"] = threads();
  mj["simd"] = std::string(simd::isa_name(simd::active_isa()));
  write_text_file(out_dir + "/manifest.json", mj.dump(2) + "\n");

  std::string failed;
  for (const auto& a : r.assertions) {
    std::cout << (a.pass ? "PASS " : "FAIL ") << a.name << " value=" << format_double(a.value)
              << " tolerance=" << format_double(a.tolerance) << "\n";
    if (!a.pass) failed += (failed.empty() ? "" : ",") + a.name;
  }
  if (!failed.empty()) return fail("assertion", kAssert, "failed: " + failed);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mlslab: marked length spectrum numerical lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", MLSLAB_VERSION);
  std::optional<int> threads_opt;
  std::string out_dir = "mlslab_out";
  app.add_option("--threads", threads_opt, "worker threads (default: MLSLAB_THREADS, then all cores)")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "output directory for CSV/JSON and manifest.json");

  std::string model_spec = "torus", field_src = "zero";
  int bound = 3, degree = 2;
  double max_length = 0.0;
  SolverFlags sf;

  auto* en = app.add_subcommand("enumerate", "list free-homotopy classes; enumerate.csv: class_id,word_length,L_g0");
  en->add_option("--model", model_spec, "torus | torus:g11,g12,g22 | bolza | model JSON");
  en->add_option("--bound", bound, "torus: max(|p|,|q|); bolza: word length")->check(CLI::PositiveNumber);
  en->add_option("--max-length", max_length, "bolza: enumerate by background length instead");

  auto* sp = app.add_subcommand("spectrum", "solve closed geodesics; spectrum.csv: class_id,L_g0,L_g,ratio,iterations,grad_norm,levels,error");
  sp->add_option("--model", model_spec);
  sp->add_option("--field", field_src, "field source (zero, const:, random:, conformal:, potential:, bump:, JSON path)");
  sp->add_option("--bound", bound)->check(CLI::PositiveNumber);
  sf.add(sp);

  auto* xr = app.add_subcommand("xray", "X-ray transform; xray.csv: class_id,L_g0,value,quad_err[,offset_min,offset_sup_abs]");
  xr->add_option("--model", model_spec);
  xr->add_option("--field", field_src);
  xr->add_option("--degree", degree, "tensor degree used by generated fields")->check(CLI::Range(0, 3));
  xr->add_option("--bound", bound)->check(CLI::PositiveNumber);

  auto* ck = app.add_subcommand("check", "numerical checks of the identities");
  ck->require_subcommand(1);
  std::string t_list;
  std::optional<double> tol;
  int max_iter = 50;
  std::uint64_t iso_seed = 0;
  double iso_grad = 0.05;
  std::string integrand = "bump:x=0:y=0:r=1.2:c=1";
  std::string T_list = "6,12";
  int max_word = 12, disk_level = 5;

  auto* lin = ck->add_subcommand("linearization", "linearization.csv: t,class_id,L_g0,L_g,ratio,first_order,residual; convergence.csv: t,R,R_over_t2,worst_class");
  lin->add_option("--model", model_spec);
  lin->add_option("--field", field_src);
  lin->add_option("--bound", bound)->check(CLI::PositiveNumber);
  lin->add_option("--t", t_list, "comma-separated decreasing t values (default 1e-2,5e-3,2.5e-3)");
  sf.add(lin);

  auto* pos = ck->add_subcommand("positivity", "positivity.csv: class_id,L_g0,L_g,ratio,I2,L_g0_times_I2,hypothesis,conclusion");
  pos->add_option("--model", model_spec);
  pos->add_option("--field", field_src);
  pos->add_option("--bound", bound)->check(CLI::PositiveNumber);
  pos->add_option("--tol", tol, "conclusion tolerance (default 1e-6)");
  sf.add(pos);

  auto* vol = ck->add_subcommand("volume", "volume.csv: quantity,value");
  vol->add_option("--model", model_spec);
  vol->add_option("--field", field_src);
  vol->add_option("--t", t_list, "finite-difference step (default 1e-2)");

  auto* par = ck->add_subcommand("parry", "parry.csv: T,classes,average,liouville,abs_error");
  par->add_option("--integrand", integrand, "'one' or a bump field source");
  par->add_option("--T", T_list, "comma-separated length cutoffs");
  par->add_option("--max-word", max_word)->check(CLI::Range(1, 16));
  par->add_option("--disk-level", disk_level)->check(CLI::Range(1, 8));

  auto* gau = ck->add_subcommand("gauge", "gauge.csv: case,iteration,residual");
  gau->add_option("--model", model_spec);
  gau->add_option("--field", field_src);
  gau->add_option("--tol", tol, "divergence tolerance (default 1e-6)");
  gau->add_option("--max-iter", max_iter)->check(CLI::PositiveNumber);
  gau->add_option("--iso-seed", iso_seed, "nonzero: also recover a random isometric metric");
  gau->add_option("--iso-grad", iso_grad, "sup |grad Y| of the isometry generator");

  std::string config_path;
  auto* iso = ck->add_subcommand("isometry", "isometry.csv: member,seed,c0_sup,max_abs_ratio_minus_1,worst_class");
  iso->add_option("--config", config_path, "probe config JSON");
  sf.add(iso);

  auto* pr = app.add_subcommand("probe", "ensemble probes");
  pr->require_subcommand(1);
  auto* stab = pr->add_subcommand("stability", "stability_scatter.csv: member,seed,lhs_sobolev,xray_sup,holder,rhs_without_C,ratio");
  stab->add_option("--config", config_path, "probe config JSON");
  auto* mls = pr->add_subcommand("mls", "mls.csv: member,seed,t,gauge_iterations,lhs_sobolev,mls_deviation,C_fit");
  mls->add_option("--config", config_path, "probe config JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", kUsage, e.what());
  }

  const auto start = std::chrono::steady_clock::now();
  const std::string cmdline = joined_argv(argc, argv);
  try {
    if (threads_opt) {
      set_threads(static_cast<unsigned>(*threads_opt));
    } else if (const char* env = std::getenv("MLSLAB_THREADS")) {
      char* end = nullptr;
      long v = std::strtol(env, &end, 10);
      if (end == env || *end != '\0' || v < 1) throw ConfigError("MLSLAB_THREADS must be a positive integer");
      set_threads(static_cast<unsigned>(v));
    }

    Report r;
    json resolved;
    std::uint64_t seed = 0;
    auto wall = [&] {
      return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };

    if (*en) {
      Model m = parse_model(model_spec);
      r.experiment = "enumerate";
      Table t{{"class_id", "word_length", "L_g0"}, {}};
      if (max_length > 0.0) {
        const auto* fm = std::get_if<FuchsianModel>(&m);
        if (!fm) throw ConfigError("--max-length needs the bolza model");
        for (const auto& c : enumerate_by_length(*fm, max_length))
          t.add({class_id(ConjugacyClass{c.word}), std::int64_t(c.word.size()), c.length});
      } else {
        for (const auto& c : classes_for(m, bound)) {
          std::int64_t wl = 0;
          if (const auto* cw = std::get_if<CyclicWord>(&c)) wl = std::int64_t(cw->size());
          t.add({class_id(c), wl, background_length(m, c)});
        }
      }
      r.config = {{"model", model_to_json(m)}, {"bound", bound}, {"max_length", max_length}};
      r.summary = {{"classes", t.rows.size()}};
      r.tables["enumerate"] = std::move(t);
      resolved = {{"command", "enumerate"}, {"config", r.config}};
      std::cout << r.tables["enumerate"].rows.size() << " classes\n";
    } else if (*sp) {
      Model m = parse_model(model_spec);
      Field f = make_field(field_src, m, 2);
      if (mlslab::degree(f) != 2) throw ConfigError("spectrum needs a degree-2 field");
      auto classes = classes_for(m, bound);
      auto opt = sf.options();
      auto recs = spectrum_batch(m, f, classes, opt);
      r.experiment = "spectrum";
      Table t{{"class_id", "L_g0", "L_g", "ratio", "iterations", "grad_norm", "levels", "error"}, {}};
      std::string first_err;
      for (const auto& rec : recs) {
        t.add({class_id(rec.cls), rec.L0, rec.L, rec.ratio, std::int64_t(rec.iterations), rec.grad_norm,
               std::int64_t(rec.refinement_levels), rec.error});
        if (!rec.error.empty() && first_err.empty()) first_err = class_id(rec.cls) + ": " + rec.error;
      }
      r.tables["spectrum"] = std::move(t);
      r.config = {{"model", model_to_json(m)}, {"field", field_src}, {"bound", bound},
                  {"solver", to_json(opt)}};
      resolved = {{"command", "spectrum"}, {"config", r.config}};
      int rc = emit(r, out_dir, resolved, seed, cmdline, wall());
      if (!first_err.empty()) return fail("numerical", kNumerical, first_err);
      return rc;
    } else if (*xr) {
      Model m = parse_model(model_spec);
      Field f = make_field(field_src, m, degree);
      auto classes = classes_for(m, bound);
      auto batch = xray_batch(m, f, classes);
      r.experiment = "xray";
      const bool torus = is_torus(m);
      Table t{{"class_id", "L_g0", "value", "quad_err"}, {}};
      if (torus) t.columns.insert(t.columns.end(), {"offset_min", "offset_sup_abs"});
      std::string first_err;
      for (std::size_t i = 0; i < batch.records.size(); ++i) {
        const auto& rec = batch.records[i];
        std::vector<Cell> row{class_id(rec.cls), rec.L0, rec.value, rec.quad_err};
        if (torus) {
          auto prof = torus_offset_profile(std::get<TorusModel>(m), std::get<TorusField>(f),
                                           std::get<TorusClass>(rec.cls));
          row.push_back(prof.min());
          row.push_back(prof.sup_abs());
        }
        t.add(std::move(row));
        if (!rec.error.empty() && first_err.empty()) first_err = class_id(rec.cls) + ": " + rec.error;
      }
      r.tables["xray"] = std::move(t);
      r.summary = {{"sup_norm", batch.sup_norm}};
      r.config = {{"model", model_to_json(m)}, {"field", field_src}, {"degree", degree}, {"bound", bound}};
      resolved = {{"command", "xray"}, {"config", r.config}};
      int rc = emit(r, out_dir, resolved, seed, cmdline, wall());
      if (!first_err.empty()) return fail("numerical", kNumerical, first_err);
      return rc;
    } else if (*lin) {
      Model m = parse_model(model_spec);
      Field f = make_field(field_src, m, 2);
      auto ts = t_list.empty() ? std::vector<double>{1e-2, 5e-3, 2.5e-3} : parse_list(t_list, "t");
      r = linearization_check(m, f, ts, classes_for(m, bound), sf.options());
      resolved = {{"command", "check linearization"}, {"field", field_src}, {"config", r.config}};
    } else if (*pos) {
      Model m = parse_model(model_spec);
      Field f = make_field(field_src, m, 2);
      r = positivity_check(m, f, classes_for(m, bound), sf.options(), tol.value_or(1e-6));
      resolved = {{"command", "check positivity"}, {"field", field_src}, {"config", r.config}};
    } else if (*vol) {
      Model m = parse_model(model_spec);
      const auto& tm = torus_only(m, "check volume");
      Field f = make_field(field_src, m, 2);
      double t = t_list.empty() ? 1e-2 : parse_list(t_list, "t").front();
      if (!(t > 0.0)) throw ConfigError("--t must be positive");
      r = volume_identity(tm, std::get<TorusField>(f), t);
      resolved = {{"command", "check volume"}, {"field", field_src}, {"config", r.config}};
    } else if (*par) {
      Model m = FuchsianModel::bolza();
      LiouvilleOptions lo;
      lo.disk_level = disk_level;
      auto Ts = parse_list(T_list, "T");
      std::optional<Field> F;
      if (integrand != "one") F = make_field(integrand, m, 0);
      const BumpField* bf = F ? &std::get<BumpField>(*F) : nullptr;
      r = parry_average(std::get<FuchsianModel>(m), bf, Ts, lo, max_word);
      resolved = {{"command", "check parry"}, {"integrand", integrand}, {"config", r.config}};
    } else if (*gau) {
      Model m = parse_model(model_spec);
      const auto& tm = torus_only(m, "check gauge");
      Field f = make_field(field_src, m, 2);
      r = gauge_check(tm, std::get<TorusField>(f), tol.value_or(1e-6), max_iter, iso_seed, iso_grad);
      seed = iso_seed;
      resolved = {{"command", "check gauge"}, {"field", field_src}, {"config", r.config}};
    } else if (*iso) {
      ProbeConfig pc = load_probe_config(config_path);
      pc.exp.validate();
      r = isometry_invariance(torus_only(pc.model, "check isometry"), pc.exp, sf.options());
      seed = pc.exp.seed;
      resolved = {{"command", "check isometry"}, {"config", r.config}};
    } else if (*stab || *mls) {
      ProbeConfig pc = load_probe_config(config_path);
      const auto& tm = torus_only(pc.model, "probe");
      seed = pc.exp.seed;
      if (*stab) {
        r = stability_probe(tm, pc.exp);
        resolved = {{"command", "probe stability"}, {"config", r.config}};
      } else {
        r = mls_probe(tm, pc.exp, pc.solver);
        resolved = {{"command", "probe mls"}, {"config", r.config}};
      }
    }
    return emit(r, out_dir, resolved, seed, cmdline, wall());
  } catch (const NumericalError& e) {
    return fail(e.kind(), kNumerical, e.what());
  } catch (const Error& e) {
    return fail(e.kind(), kUsage, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail("io", kUsage, e.what());
  } catch (const std::exception& e) {
    return fail("internal", kNumerical, e.what());
  }
}
