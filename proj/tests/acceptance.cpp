// Acceptance run: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (capped at 1 for ctest).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "mlslab/errors.hpp"
#include "mlslab/experiments.hpp"
#include "mlslab/io.hpp"
#include "mlslab/parallel.hpp"

using namespace mlslab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string out_dir = "acceptance_out";

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string failed_names(const Report& r) {
  std::string s;
  for (const auto& a : r.assertions)
    if (!a.pass) s += (s.empty() ? "" : ",") + a.name + "=" + format_double(a.value);
  return s;
}

TorusField sup_normalized(std::uint64_t seed, int K, int degree, double amp, const TorusModel& m) {
  TorusField f = random_field(seed, K, degree);
  return (amp / sup_surrogate(m, f, std::max(64, 4 * K))) * f;
}

// 1
Outcome flat_oracle() {
  auto t0 = std::chrono::steady_clock::now();
  Mat2 G1, G2;
  G1 << 1.3, 0.2, 0.2, 0.8;
  G2 << 2.0, -0.5, -0.5, 1.0;
  double worst = 0.0;
  std::size_t n = 0;
  for (const Mat2& G : {G1, G2}) {
    Model m = TorusModel(G);
    auto classes = enumerate_classes(m, 10);
    auto recs = spectrum_batch(m, TorusField(2, 0), classes);
    for (const auto& r : recs) {
      if (!r.error.empty()) return {false, "solver error " + r.error};
      const auto& c = std::get<TorusClass>(r.cls);
      Vec2 v(c.p, c.q);
      double exact = std::sqrt(v.dot(G * v));
      worst = std::max(worst, std::abs(r.L - exact) / exact);
      ++n;
    }
  }
  double dt = seconds_since(t0);
  return {worst <= 1e-8 && dt <= 60.0,
          std::to_string(n) + " classes, max rel err " + fmt("%.2e", worst) + ", " + fmt("%.1f s", dt)};
}

// 2
Outcome closed_form() {
  double wL = 0.0, wI = 0.0;
  Model m = TorusModel();
  for (double eps : {0.1, 0.01}) {
    TorusField f = constant_field({eps, 0.0, 0.0});
    auto s = solve_geodesic(m, f, TorusClass{1, 0});
    wL = std::max(wL, std::abs(s.length - std::sqrt(1.0 + eps)) / std::sqrt(1.0 + eps));
    wI = std::max(wI, std::abs(xray_tensor(m, f, TorusClass{1, 0}).value - eps));
    wI = std::max(wI, std::abs(xray_tensor(m, f, TorusClass{0, 1}).value));
  }
  return {wL <= 1e-6 && wI <= 1e-10,
          "length rel err " + fmt("%.2e", wL) + ", xray err " + fmt("%.2e", wI)};
}

// 3
Outcome linearization() {
  auto t0 = std::chrono::steady_clock::now();
  TorusModel tm;
  Model m = tm;
  auto classes = enumerate_classes(m, 5);
  std::string detail;
  bool ok = true;
  double worst = 1.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Field f = sup_normalized(100 + seed, 4, 2, 1.0, tm);
    Report r = linearization_check(m, f, {1e-2, 5e-3, 2.5e-3}, classes, SolverOptions{});
    ok = ok && r.passed();
    for (const auto& a : r.assertions)
      if (a.name == "remainder_ratio_stable") worst = std::max(worst, a.value);
    if (!r.passed()) detail += " seed " + std::to_string(seed) + ": " + failed_names(r);
  }
  double dt = seconds_since(t0);
  ok = ok && dt <= 600.0;
  return {ok, "worst successive R/t^2 ratio " + fmt("%.4f", worst) + ", " + fmt("%.1f s", dt) + detail};
}

// 4
Outcome kernel_identity() {
  Mat2 G;
  G << 1.3, 0.2, 0.2, 0.8;
  TorusModel tm(G);
  Model m = tm;
  auto classes = enumerate_classes(m, 8);
  double worst = 0.0;
  for (int deg = 0; deg <= 2; ++deg)
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      TorusField p = random_field(1000 * deg + seed, 8, deg);
      Field f = symmetric_derivative(p);
      for (const auto& c : classes)
        worst = std::max(worst, torus_offset_profile(tm, std::get<TorusField>(f), std::get<TorusClass>(c)).sup_abs());
      worst = std::max(worst, xray_batch(m, f, classes).sup_norm);
    }
  return {worst <= 1e-8, "sup |I(Dp)| = " + fmt("%.2e", worst) + " over 30 potentials"};
}

// 5
Outcome decomposition() {
  Mat2 G;
  G << 1.3, 0.2, 0.2, 0.8;
  TorusModel m(G);
  double rec = 0.0, div = 0.0, idem = 0.0, agree = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    TorusField f = random_field(seed, 8, 2);
    auto d = solenoidal_project(m, f);
    rec = std::max(rec, l2_norm(m, f - d.solenoidal - symmetric_derivative(d.potential)));
    div = std::max(div, l2_norm(m, divergence(m, d.solenoidal)));
    auto dd = solenoidal_project(m, d.solenoidal);
    idem = std::max({idem, l2_norm(m, dd.solenoidal - d.solenoidal), l2_norm(m, dd.potential)});
    auto dc = solenoidal_project_cg(m, f);
    agree = std::max({agree, l2_norm(m, dc.solenoidal - d.solenoidal), l2_norm(m, dc.potential - d.potential)});
  }
  return {rec <= 1e-10 && div <= 1e-10 && idem <= 1e-10 && agree <= 1e-8,
          "recon " + fmt("%.1e", rec) + ", div " + fmt("%.1e", div) + ", idem " + fmt("%.1e", idem) +
              ", cg " + fmt("%.1e", agree)};
}

// 6
Outcome positivity() {
  auto t0 = std::chrono::steady_clock::now();
  TorusModel tm;
  Model m = tm;
  auto classes = enumerate_classes(m, 6);
  std::int64_t gated = 0, violations = 0;
  std::string detail;
  for (int kind = 0; kind < 2; ++kind)
    for (std::uint64_t i = 1; i <= 10; ++i) {
      TorusField f = random_conformal(tm, 200 + i, 4, 0.2);
      if (kind == 1)
        f = random_conformal(tm, 300 + i, 4, 0.05) + sup_normalized(400 + i, 4, 2, 0.1, tm) +
            random_potential(tm, 500 + i, 4, 2, 0.05);
      Report r = positivity_check(m, f, classes, SolverOptions{}, 1e-6);
      gated += r.summary["gated_classes"].get<std::int64_t>();
      violations += r.summary["violations"].get<std::int64_t>();
      if (!r.passed()) detail += " field " + std::to_string(kind) + "/" + std::to_string(i);
    }
  return {violations == 0, std::to_string(violations) + " violations among " + std::to_string(gated) +
                               " gated (class, field) pairs, " + fmt("%.1f s", seconds_since(t0)) + detail};
}

// 7
Outcome volume() {
  Mat2 G;
  G << 1.3, 0.2, 0.2, 0.8;
  TorusModel m(G);
  double we = 0.0, ws = 0.0;
  bool ok = true;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Report r = volume_identity(m, sup_normalized(600 + seed, 8, 2, 0.05, m));
    ok = ok && r.passed();
    we = std::max(we, r.assertions[0].value);
    ws = std::max(ws, r.assertions[1].value / (r.assertions[1].tolerance / 1e-4));
  }
  return {ok, "identity err " + fmt("%.1e", we) + ", slope rel err " + fmt("%.1e", ws)};
}

// 8
Outcome hyperbolic() {
  auto t0 = std::chrono::steady_clock::now();
  FuchsianModel fm = FuchsianModel::bolza();
  Model m = fm;
  const double sys = 2.0 * std::acosh(1.0 + std::sqrt(2.0));
  bool sys_found = false;
  for (const auto& c : enumerate_classes(m, 1))
    if (std::abs(background_length(m, c) - sys) <= 1e-9) sys_found = true;

  // every cyclically reduced word up to length 8, in lexmin rotation form
  std::map<Word, double> key_trace;
  std::size_t words = 0, inconsistent = 0;
  Word w;
  std::function<void(std::size_t)> rec = [&](std::size_t n) {
    if (w.size() == n) {
      if (inverse(w.back()) == w.front()) return;
      Word rot(n);
      for (std::size_t r = 1; r < n; ++r) {
        std::rotate_copy(w.begin(), w.begin() + r, w.end(), rot.begin());
        if (rot < w) return;
      }
      ++words;
      CyclicWord c;
      try {
        c = canonicalize(w);
      } catch (const TrivialClassError&) {
        return;
      }
      double tr = std::abs(fm.word_matrix(w).trace());
      auto [it, fresh] = key_trace.emplace(c.letters(), tr);
      if (!fresh && std::abs(it->second - tr) > 1e-9 * tr) ++inconsistent;
      return;
    }
    for (int x = 0; x < 8; ++x) {
      Letter l = static_cast<Letter>(x);
      if (!w.empty() && inverse(w.back()) == l) continue;
      if (!w.empty() && l < w.front()) continue;
      w.push_back(l);
      rec(n);
      w.pop_back();
    }
  };
  for (std::size_t n = 1; n <= 8; ++n) rec(n);
  std::set<long long> traces;
  for (const auto& [k, tr] : key_trace) traces.insert(std::llround(tr * 1e6));
  bool ok = fm.relator_residual() <= 1e-9 && sys_found && inconsistent == 0;
  return {ok, "relator residual " + fmt("%.1e", fm.relator_residual()) + ", systole " +
                  (sys_found ? "found" : "missing") + ", " + std::to_string(words) + " words -> " +
                  std::to_string(key_trace.size()) + " canonical classes, " + std::to_string(traces.size()) +
                  " distinct traces, " + std::to_string(inconsistent) + " trace conflicts, " +
                  fmt("%.1f s", seconds_since(t0))};
}

// 9
Outcome parry() {
  auto t0 = std::chrono::steady_clock::now();
  FuchsianModel fm = FuchsianModel::bolza();
  Report one = parry_average(fm, nullptr, {6.0, 12.0});
  BumpField F(fm, 0, {BumpTerm{cplx(0.0, 0.0), 1.2, {1.0}}});
  Report bump = parry_average(fm, &F, {6.0, 12.0});
  auto errs = bump.summary["errors"].get<std::vector<double>>();
  double dt = seconds_since(t0);
  return {one.passed() && bump.passed() && dt <= 900.0,
          "F=1 " + std::string(one.passed() ? "exact" : "not exact") + ", bump error T=6 " +
              fmt("%.3e", errs.front()) + " -> T=12 " + fmt("%.3e", errs.back()) + ", " + fmt("%.1f s", dt)};
}

// 10
Outcome gauge() {
  auto t0 = std::chrono::steady_clock::now();
  TorusModel m;
  double worst = 0.0;
  int max_it = 0;
  bool ok = true;
  double iso = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    TorusField f = sup_normalized(700 + seed, 8, 2, 0.05, m);
    Report r = gauge_check(m, f, 1e-6, 50, seed == 1 ? 99 : 0, 0.02);
    ok = ok && r.passed();
    worst = std::max(worst, r.summary["residual"].get<double>());
    max_it = std::max(max_it, r.summary["iterations"].get<int>());
    if (seed == 1) iso = r.summary["isometry_normalized_l2"].get<double>();
  }
  return {ok, "max residual " + fmt("%.2e", worst) + ", max iterations " + std::to_string(max_it) +
                  ", isometry case " + fmt("%.2e", iso) + ", " + fmt("%.1f s", seconds_since(t0))};
}

// 11
Outcome isometry() {
  auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig c;
  c.isometry_members = 5;
  c.isometry_bound = 5;
  c.isometry_grad = 0.02;
  SolverOptions opt;
  Report r = isometry_invariance(TorusModel(), c, opt);
  return {r.passed(), "max |L-1| " + fmt("%.2e", r.summary["max_deviation"].get<double>()) + ", min C0 " +
                          fmt("%.2e", r.summary["min_c0"].get<double>()) + ", " + fmt("%.1f s", seconds_since(t0))};
}

// 12
Outcome stability() {
  auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig c;  // 50 members, K = 8, s = 0.1, nu = 0.5, bound 8
  TorusModel m;
  Report r = stability_probe(m, c);
  std::filesystem::create_directories(out_dir);
  const auto& t = r.tables.at("stability_scatter");
  write_text_file(out_dir + "/stability_scatter.csv", to_csv(t, config_digest(r.config)));
  double dt = seconds_since(t0);
  bool ok = r.passed() && t.rows.size() == 50 && dt <= 1200.0;
  return {ok, "C_hat " + fmt("%.4g", r.summary["C_hat"].get<double>()) + ", rank corr " +
                  fmt("%.3f", r.summary["rank_correlation"].get<double>()) + ", homogeneity " +
                  fmt("%.1e", r.summary["homogeneity_error"].get<double>()) + ", " +
                  std::to_string(t.rows.size()) + " rows, " + fmt("%.1f s", dt) +
                  (r.passed() ? "" : " failed: " + failed_names(r))};
}

// 13
Outcome determinism() {
  auto bodies = [](unsigned nt) {
    set_threads(nt);
    std::string all;
    TorusModel tm;
    Model m = tm;
    Field f = sup_normalized(801, 4, 2, 0.5, tm);
    auto classes = enumerate_classes(m, 4);
    Report lin = linearization_check(m, f, {1e-2, 5e-3}, classes, SolverOptions{});
    for (const auto& [name, t] : lin.tables) all += to_csv(t, "-");
    ExperimentConfig c;
    c.ensemble_size = 12;
    c.bound = 5;
    Report st = stability_probe(tm, c);
    for (const auto& [name, t] : st.tables) all += to_csv(t, "-");
    FuchsianModel fm = FuchsianModel::bolza();
    Model hm = fm;
    Field bf = BumpField(fm, 2, {BumpTerm{cplx(0.1, 0.05), 1.0, {0.05, 0.01, -0.02}}});
    auto recs = spectrum_batch(hm, bf, enumerate_classes(hm, 2));
    for (const auto& r : recs) all += class_id(r.cls) + "," + format_double(r.L) + "\n";
    return all;
  };
  auto a = bodies(1), b = bodies(4);
  set_threads(0);
  return {a == b && !a.empty(), std::to_string(a.size()) + " bytes compared, threads 1 vs 4 " +
                                    (a == b ? "identical" : "DIFFER")};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--out") == 0 && i + 1 < argc) {
      out_dir = argv[++i];
    } else {
      int k = std::atoi(argv[i]);
      if (k < 1 || k > 13) {
        std::fprintf(stderr, "usage: acceptance [--out DIR] [criterion numbers 1..13]\n");
        return 2;
      }
      only.insert(k);
    }
  }
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"flat oracle lengths", flat_oracle},
      {"closed-form perturbation", closed_form},
      {"linearization remainder", linearization},
      {"kernel identity I(Dp) = 0", kernel_identity},
      {"solenoidal decomposition", decomposition},
      {"positivity under length hypothesis", positivity},
      {"volume identity", volume},
      {"hyperbolic model", hyperbolic},
      {"closed-geodesic averaging", parry},
      {"gauge normalization", gauge},
      {"isometry invariance", isometry},
      {"stability probe", stability},
      {"determinism across thread counts", determinism},
  };
  int failed = 0;
  std::string log;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    int k = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(k)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::string line = std::string(o.pass ? "PASS" : "FAIL") + fmt(" criterion %2.0f ", k) + criteria[i].first + ": " + o.detail;
    std::printf("%s\n", line.c_str());
    std::fflush(stdout);
    log += line + "\n";
    if (!o.pass) ++failed;
  }
  // ctest hides stdout of passing tests; keep a copy next to the outputs
  std::filesystem::create_directories(out_dir);
  write_text_file(out_dir + "/acceptance.txt", log);
  return failed ? 1 : 0;
}
