#include "pdehopf/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace pdehopf {

json vec_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vec json_vec(const json& j) {
  Vec v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

json cvec_json(const CVec& v) { return json{{"re", vec_json(v.real())}, {"im", vec_json(v.imag())}}; }

CVec json_cvec(const json& j) {
  Vec re = json_vec(j.at("re")), im = json_vec(j.at("im"));
  if (re.size() != im.size()) throw ConfigError("complex vector with mismatched parts");
  CVec v(re.size());
  v.real() = re;
  v.imag() = im;
  return v;
}

json orbit_json(const PeriodicOrbit& o) {
  return json{{"n", o.n},         {"m", o.m},         {"t", vec_json(o.t)},   {"U", vec_json(o.U)},
              {"T", o.T},         {"lambda", o.lam},  {"tau", vec_json(o.tau)}, {"uref", vec_json(o.uref)},
              {"xi", o.xi},       {"wT", o.wT}};
}

PeriodicOrbit json_orbit(const json& j) {
  PeriodicOrbit o;
  o.n = j.at("n").get<int>();
  o.m = j.at("m").get<int>();
  o.t = json_vec(j.at("t"));
  o.U = json_vec(j.at("U"));
  o.T = j.at("T").get<double>();
  o.lam = j.at("lambda").get<double>();
  o.tau = json_vec(j.at("tau"));
  o.uref = json_vec(j.at("uref"));
  o.xi = j.at("xi").get<double>();
  o.wT = j.at("wT").get<double>();
  if (o.t.size() != o.m || o.U.size() != (long)o.n * o.m) throw ConfigError("orbit payload has inconsistent sizes");
  return o;
}

json spectrum_json(const FloquetSpectrum& s) {
  json g = json::array();
  for (const auto& m : s.gamma) g.push_back(json{{"logmod", m.infinite ? 0.0 : m.logmod}, {"arg", m.arg}, {"infinite", m.infinite}});
  return json{{"algorithm", s.algo == FloquetAlgo::FA1 ? "fa1" : "fa2"},
              {"gamma", g},
              {"trivial", s.trivial},
              {"err_mu", s.err_mu},
              {"ind", s.ind},
              {"warnings", s.warnings}};
}

FloquetSpectrum json_spectrum(const json& j) {
  FloquetSpectrum s;
  s.algo = j.at("algorithm").get<std::string>() == "fa1" ? FloquetAlgo::FA1 : FloquetAlgo::FA2;
  for (const auto& g : j.at("gamma")) {
    Multiplier m;
    m.logmod = g.at("logmod").get<double>();
    m.arg = g.at("arg").get<double>();
    m.infinite = g.at("infinite").get<bool>();
    s.gamma.push_back(m);
  }
  s.trivial = j.at("trivial").get<int>();
  s.err_mu = j.at("err_mu").is_null() ? HUGE_VAL : j.at("err_mu").get<double>();
  s.ind = j.at("ind").get<int>();
  s.warnings = j.at("warnings").get<std::vector<std::string>>();
  return s;
}

void save_json(const std::string& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path);
  f << j.dump(1) << "\n";
}

json load_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read " + path);
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

namespace {

std::string num(double x) {
  if (std::isnan(x)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string quoted(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c == '\n' ? ' ' : c;
  }
  return q + "\"";
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool inq = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (inq) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        inq = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      inq = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double field(const std::string& s) { return s.empty() ? NAN : std::stod(s); }

}  // namespace

void write_branch(const std::string& path, const std::vector<BranchRow>& rows) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path);
  f << kBranchHeader << "\n";
  for (const auto& r : rows)
    f << r.step << "," << num(r.lambda) << "," << num(r.T) << "," << num(r.norm) << ","
      << (r.ind < 0 ? std::string() : std::to_string(r.ind)) << "," << num(r.err_mu) << "," << quoted(r.msg) << "\n";
}

std::vector<BranchRow> read_branch(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read " + path);
  std::string line;
  if (!std::getline(f, line) || line != kBranchHeader) throw ConfigError(path + ": not a branch file");
  std::vector<BranchRow> rows;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    auto c = split_csv(line);
    if (c.size() != 7) throw ConfigError(path + ": malformed row '" + line + "'");
    BranchRow r;
    try {
      r.step = std::stoi(c[0]);
      r.lambda = field(c[1]);
      r.T = field(c[2]);
      r.norm = field(c[3]);
      r.ind = c[4].empty() ? -1 : std::stoi(c[4]);
      r.err_mu = field(c[5]);
    } catch (const std::exception&) {
      throw ConfigError(path + ": malformed row '" + line + "'");
    }
    r.msg = c[6];
    rows.push_back(r);
  }
  return rows;
}

}  // namespace pdehopf
