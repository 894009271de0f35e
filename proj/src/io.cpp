#include "mlslab/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mlslab/errors.hpp"

namespace mlslab {

using nlohmann::json;

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[i] = digits[v & 0xf];
  return s;
}

std::string config_digest(const json& config) { return hex64(fnv1a64(config.dump())); }

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

std::string csv_cell(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  const auto& s = std::get<std::string>(c);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

}  // namespace

std::string to_csv(const Table& t, const std::string& digest) {
  std::string out = "# mlslab " MLSLAB_VERSION " digest=" + digest + "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_cell(row[i]);
    out += "\n";
  }
  return out;
}

json model_to_json(const Model& m) {
  if (const auto* t = std::get_if<TorusModel>(&m))
    return {{"kind", "torus"},
            {"gram", {{t->gram(0, 0), t->gram(0, 1)}, {t->gram(1, 0), t->gram(1, 1)}}}};
  return {{"kind", "bolza"}};
}

Model model_from_json(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "bolza") return FuchsianModel::bolza();
  if (kind != "torus") throw ConfigError("unknown model kind '" + kind + "'");
  Mat2 G = Mat2::Identity();
  if (j.contains("gram")) {
    const auto& g = j.at("gram");
    G << g.at(0).at(0).get<double>(), g.at(0).at(1).get<double>(), g.at(1).at(0).get<double>(),
        g.at(1).at(1).get<double>();
  }
  return TorusModel(G);
}

json field_to_json(const Field& f) {
  if (const auto* t = std::get_if<TorusField>(&f))
    return {{"kind", "fourier"}, {"degree", t->degree()}, {"K", t->K()}, {"re", t->re()},
            {"im", t->im()}};
  const auto& b = std::get<BumpField>(f);
  json terms = json::array();
  for (const auto& term : b.terms())
    terms.push_back({{"center", {term.center.real(), term.center.imag()}},
                     {"radius", term.radius},
                     {"coeffs", term.coeffs}});
  return {{"kind", "bump"}, {"degree", b.degree()}, {"terms", terms}};
}

Field field_from_json(const json& j, const Model& m) {
  try {
    std::string kind = j.at("kind").get<std::string>();
    int degree = j.at("degree").get<int>();
    if (kind == "fourier") {
      if (!is_torus(m)) throw ConfigError("Fourier fields need the torus model");
      TorusField f(degree, j.at("K").get<int>());
      auto re = j.at("re").get<std::vector<double>>();
      auto im = j.at("im").get<std::vector<double>>();
      if (re.size() != f.re().size() || im.size() != f.im().size())
        throw ConfigError("field coefficient array has the wrong length");
      f.re() = std::move(re);
      f.im() = std::move(im);
      return f;
    }
    if (kind == "bump") {
      const auto* fm = std::get_if<FuchsianModel>(&m);
      if (!fm) throw ConfigError("bump fields need the bolza model");
      std::vector<BumpTerm> terms;
      for (const auto& t : j.at("terms")) {
        BumpTerm b;
        b.center = cplx(t.at("center").at(0).get<double>(), t.at("center").at(1).get<double>());
        b.radius = t.at("radius").get<double>();
        b.coeffs = t.at("coeffs").get<std::vector<double>>();
        terms.push_back(std::move(b));
      }
      return BumpField(*fm, degree, std::move(terms));
    }
    throw ConfigError("unknown field kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed field JSON: ") + e.what());
  }
}

json report_to_json(const Report& r) {
  json a = json::array();
  for (const auto& x : r.assertions)
    a.push_back({{"name", x.name}, {"pass", x.pass}, {"value", x.value}, {"tolerance", x.tolerance}});
  json tables = json::array();
  for (const auto& [name, t] : r.tables) tables.push_back(name + ".csv");
  return {{"experiment", r.experiment}, {"config", r.config},     {"assertions", a},
          {"passed", r.passed()},       {"summary", r.summary},   {"tables", tables}};
}

json manifest_to_json(const RunManifest& m) {
  return {{"command_line", m.command_line}, {"config_digest", m.config_digest},
          {"seed", m.seed},                 {"version", m.version},
          {"wall_time_s", m.wall_time_s},   {"outputs", m.outputs}};
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ConfigError("write failed for '" + path + "'");
}

}  // namespace mlslab
