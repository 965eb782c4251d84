#include "pdehopf/commands.hpp"

#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "pdehopf/timestep.hpp"

namespace pdehopf {

namespace fs = std::filesystem;

namespace {

double to_num(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("value of '" + key + "' is not a number: '" + v + "'");
  }
}

int to_int(const std::string& key, const std::string& v) {
  double x = to_num(key, v);
  if (x != std::floor(x) || std::abs(x) > 1e9) throw ConfigError("value of '" + key + "' is not an integer");
  return (int)x;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string trim(std::string s) {
  s.erase(0, s.find_first_not_of(" \t\r"));
  s.erase(s.find_last_not_of(" \t\r") + 1);
  return s;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s;
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

FloquetAlgo algo_of(const std::string& a) {
  if (a == "fa1") return FloquetAlgo::FA1;
  if (a == "fa2") return FloquetAlgo::FA2;
  throw ConfigError("unknown Floquet algorithm '" + a + "' (fa1, fa2)");
}

double orbit_residual(const System& sys, const PeriodicOrbit& o) { return po_residual(sys, o).lpNorm<Eigen::Infinity>(); }

void log_line(std::ostream& log, const char* f, ...) __attribute__((format(printf, 2, 3)));
void log_line(std::ostream& log, const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  log << buf << "\n";
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  const std::string& v = value;
  if (key == "model") model = v;
  else if (key == "out") out = v;
  else if (key == "schema") {
    if (v != kConfigSchema) throw ConfigError("unsupported config schema '" + v + "'");
  }
  else if (key == "ds") steady.ds = to_num(key, v);
  else if (key == "dsmin") steady.dsmin = to_num(key, v);
  else if (key == "dsmax") steady.dsmax = to_num(key, v);
  else if (key == "nsteps") steady.nsteps = to_int(key, v);
  else if (key == "lam_min") steady.lam_min = to_num(key, v);
  else if (key == "lam_max") steady.lam_max = to_num(key, v);
  else if (key == "dir") steady.dir = to_int(key, v);
  else if (key == "tol") steady.tol = to_num(key, v);
  else if (key == "maxit") steady.maxit = to_int(key, v);
  else if (key == "xi") steady.xi = to_num(key, v);
  else if (key == "shifts" || key == "detector") {
    if (v == "auto") {
      det.auto_shifts = true;
      det.shifts = {0.0};
    } else {
      det.auto_shifts = false;
      det.shifts.clear();
      for (const auto& s : split_list(v)) det.shifts.push_back(to_num(key, s));
    }
  }
  else if (key == "neig") {
    det.neig.clear();
    for (const auto& s : split_list(v)) det.neig.push_back(to_int(key, s));
  }
  else if (key == "mu1") det.mu1 = to_num(key, v);
  else if (key == "mu2") det.mu2 = to_num(key, v);
  else if (key == "refresh") det.refresh = to_int(key, v);
  else if (key == "omega_max") det.omega_max = to_num(key, v);
  else if (key == "n_samples") det.n_samples = to_int(key, v);
  else if (key == "dense_limit") det.dense_limit = to_int(key, v);
  else if (key == "seed") det.seed = (unsigned)to_int(key, v);
  else if (key == "m") m = to_int(key, v);
  else if (key == "po_ds") po.ds = to_num(key, v);
  else if (key == "po_dsmin") po.dsmin = to_num(key, v);
  else if (key == "po_dsmax") po.dsmax = to_num(key, v);
  else if (key == "po_nsteps") po_nsteps = to_int(key, v);
  else if (key == "po_tol") po.tol = to_num(key, v);
  else if (key == "po_maxit") po.maxit = to_int(key, v);
  else if (key == "po_xi") po.xi = to_num(key, v);
  else if (key == "wT") po.wT = to_num(key, v);
  else if (key == "parametrization") parametrization = v;
  else if (key == "natural_dlam") natural_dlam = to_num(key, v);
  else if (key == "fallback_alpha") fallback_alpha = to_num(key, v);
  else if (key == "floquet") floquet = v;
  else if (key == "nplus") nplus = to_int(key, v);
  else if (key == "tol_fl") tol_fl = to_num(key, v);
  else overrides[key] = to_num(key, v);
}

void RunConfig::validate() const {
  if (model.empty()) throw ConfigError("no model given");
  if (!(steady.ds > 0) || !(steady.dsmin > 0) || steady.dsmax < steady.dsmin || steady.ds > steady.dsmax)
    throw ConfigError("steady step lengths must satisfy 0 < dsmin <= ds <= dsmax");
  if (steady.nsteps < 0 || po_nsteps < 0) throw ConfigError("step counts must be non-negative");
  if (steady.dir != 1 && steady.dir != -1) throw ConfigError("dir must be 1 or -1");
  if (!(steady.tol > 0) || !(po.tol > 0)) throw ConfigError("tolerances must be positive");
  if (steady.xi < 0 || steady.xi >= 1 || po.xi < 0 || po.xi >= 1) throw ConfigError("xi must lie in (0, 1), 0 for the default");
  if (po.wT < 0 || po.wT > 1) throw ConfigError("wT must lie in [0, 1]");
  if (m < 5) throw ConfigError("m must be at least 5");
  if (!(po.ds > 0) || !(po.dsmin > 0) || po.dsmax < po.dsmin) throw ConfigError("orbit step lengths invalid");
  if (parametrization != "arclength" && parametrization != "natural")
    throw ConfigError("parametrization must be arclength or natural");
  if (floquet != "fa1" && floquet != "fa2" && floquet != "off") throw ConfigError("floquet must be fa1, fa2 or off");
  if (nplus < 1 || !(tol_fl > 0)) throw ConfigError("nplus and tol_fl must be positive");
  det.validate();
}

json RunConfig::to_json() const {
  json j;
  j["schema"] = kConfigSchema;
  j["model"] = model;
  if (!out.empty()) j["out"] = out;
  for (const auto& [k, v] : overrides) j[k] = v;
  j["ds"] = steady.ds;
  j["dsmin"] = steady.dsmin;
  j["dsmax"] = steady.dsmax;
  j["nsteps"] = steady.nsteps;
  if (std::isfinite(steady.lam_min)) j["lam_min"] = steady.lam_min;
  if (std::isfinite(steady.lam_max)) j["lam_max"] = steady.lam_max;
  j["dir"] = steady.dir;
  j["tol"] = steady.tol;
  j["maxit"] = steady.maxit;
  j["xi"] = steady.xi;
  j["shifts"] = det.auto_shifts ? std::string("auto") : join(det.shifts);
  j["neig"] = join(det.neig);
  j["mu1"] = det.mu1;
  j["mu2"] = det.mu2;
  j["refresh"] = det.refresh;
  j["omega_max"] = det.omega_max;
  j["n_samples"] = det.n_samples;
  j["dense_limit"] = det.dense_limit;
  j["seed"] = det.seed;
  j["m"] = m;
  j["po_ds"] = po.ds;
  j["po_dsmin"] = po.dsmin;
  j["po_dsmax"] = po.dsmax;
  j["po_nsteps"] = po_nsteps;
  j["po_tol"] = po.tol;
  j["po_maxit"] = po.maxit;
  j["po_xi"] = po.xi;
  j["wT"] = po.wT;
  j["parametrization"] = parametrization;
  j["natural_dlam"] = natural_dlam;
  j["fallback_alpha"] = fallback_alpha;
  j["floquet"] = floquet;
  j["nplus"] = nplus;
  j["tol_fl"] = tol_fl;
  return j;
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  for (const auto& [k, v] : j.items()) {
    if (v.is_string()) c.set(k, v.get<std::string>());
    else if (v.is_number_integer()) c.set(k, std::to_string(v.get<long long>()));
    else if (v.is_number()) c.set(k, fmt(v.get<double>()));
    else throw ConfigError("config key '" + k + "' has an unsupported value");
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  std::string text = ss.str();
  if (trim(text).rfind("{", 0) == 0) {
    try {
      return config_from_json(json::parse(text));
    } catch (const json::exception& e) {
      throw ConfigError(path + ": " + e.what());
    }
  }
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(path + ":" + std::to_string(no) + ": expected key = value");
    c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return c;
}

std::string output_dir(const RunConfig& cfg) {
  const char* root = std::getenv("PDEHOPF_OUT");
  fs::path p = fs::path(root && *root ? root : ".") / (cfg.out.empty() ? "out/" + cfg.model : cfg.out);
  fs::create_directories(p);
  return p.string();
}

double state_norm(const System& sys, const Vec& u) {
  return std::sqrt(std::max(0.0, u.dot(sys.mass() * u)) / sys.measure());
}

double verify_point(const System& sys, const json& point) {
  std::string kind = point.at("kind").get<std::string>();
  double stored = point.at("residual").get<double>();
  double r;
  if (kind == "orbit") {
    r = orbit_residual(sys, json_orbit(point.at("orbit")));
  } else {
    Vec u = json_vec(point.at("u"));
    if (u.size() != sys.size()) throw ConfigError("point state does not match the model size");
    r = sys.residual(u, point.at("lambda").get<double>()).lpNorm<Eigen::Infinity>();
  }
  if (!(r <= 10 * stored + 1e-12)) throw SolverError("point file no longer meets its residual: " + fmt(r) + " > " + fmt(stored));
  return r;
}

// ---------------------------------------------------------------- steady

SteadyRun cmd_steady(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  ModelSetup ms = make_model(cfg.model, cfg.overrides);
  SteadyRun run;
  run.dir = output_dir(cfg);
  log_line(log, "# steady %s, %s from %g, n_u = %d", cfg.model.c_str(), ms.param_name.c_str(), ms.lam0, ms.disc.size());
  log_line(log, "%5s %14s %14s %s", "step", ms.param_name.c_str(), "norm", "counts");
  auto on_step = [&](const StationaryPoint& p) {
    log_line(log, "%5d %14.8g %14.8g %s", p.step, p.lam, state_norm(ms.disc, p.u), join(p.counts).c_str());
  };
  run.branch = continue_steady(ms.disc, ms.u0, ms.lam0, cfg.steady, cfg.det, on_step);
  for (const auto& l : run.branch.log) log << "# " << l << "\n";
  for (const auto& p : run.branch.points) {
    BranchRow r;
    r.step = p.step;
    r.lambda = p.lam;
    r.norm = state_norm(ms.disc, p.u);
    int unstable = 0;
    for (int c : p.counts) unstable = std::max(unstable, c);
    r.ind = p.counts.empty() ? -1 : unstable;
    run.rows.push_back(r);
  }
  int nh = 0, nb = 0;
  json echo = cfg.to_json();
  for (const auto& sp : run.branch.special) {
    bool h = sp.type == SpecialType::HBP;
    std::string name = h ? "hbp" + std::to_string(++nh) : "bp" + std::to_string(++nb);
    json j;
    j["schema"] = kPointSchema;
    j["kind"] = h ? "hopf-point" : "branch-point";
    j["config"] = echo;
    j["lambda"] = sp.lam;
    j["omega"] = sp.omega;
    j["mu"] = {sp.mu.real(), sp.mu.imag()};
    j["u"] = vec_json(sp.u);
    j["tau"] = vec_json(sp.tau);
    j["step"] = sp.step;
    j["shift"] = sp.shift;
    j["residual"] = ms.disc.residual(sp.u, sp.lam).lpNorm<Eigen::Infinity>();
    std::string path = (fs::path(run.dir) / (name + ".json")).string();
    save_json(path, j);
    run.point_files.push_back(path);
    for (auto& r : run.rows)
      if (r.step == sp.step) r.msg += (r.msg.empty() ? "" : "; ") + std::string(h ? "HBP " : "BP ") + name;
    log_line(log, "# %s at %s = %.8g, omega = %.6g -> %s", h ? "HBP" : "BP", ms.param_name.c_str(), sp.lam, sp.omega,
             path.c_str());
  }
  write_branch((fs::path(run.dir) / "steady.csv").string(), run.rows);
  json sh;
  sh["schema"] = kPointSchema;
  sh["kind"] = "shifts";
  sh["auto"] = cfg.det.auto_shifts;
  sh["history"] = run.branch.shift_history;
  save_json((fs::path(run.dir) / "shifts.json").string(), sh);
  return run;
}

// ---------------------------------------------------------------- hopf

HopfRun cmd_hopf(const RunConfig& cfg, const json& point, std::ostream& log, const std::string& tag) {
  cfg.validate();
  if (point.at("kind").get<std::string>() != "hopf-point") throw ConfigError("not a Hopf point file");
  ModelSetup ms = make_model(cfg.model, cfg.overrides);
  const System& sys = ms.disc;
  verify_point(sys, point);
  HopfRun run;
  RunConfig c2 = cfg;
  if (!tag.empty()) c2.out = (cfg.out.empty() ? "out/" + cfg.model : cfg.out) + "/" + tag;
  run.dir = output_dir(c2);
  HopfSettings hs;
  hs.mu2 = cfg.det.mu2;
  hs.fallback_alpha = cfg.fallback_alpha;
  hs.dense_limit = cfg.det.dense_limit;
  run.hp = hopf_eigenpair(sys, json_vec(point.at("u")), point.at("lambda").get<double>(), point.at("omega").get<double>(), hs);
  branch_direction(sys, run.hp, hs);
  const HopfPoint& hp = run.hp;
  log_line(log, "# Hopf point %s = %.8g, omega = %.8g, mu_r = %.6g, c1 = %.6g, s = %d, alpha = %.6g",
           ms.param_name.c_str(), hp.lam, hp.omega, hp.mu_r, hp.c1, hp.s, hp.alpha);
  PoSettings ps = cfg.po;
  run.pred = build_predictor(sys, hp, cfg.m, ps.ds, ps.xi, ps.wT);
  log_line(log, "# predictor eps = %.6g, T = %.8g", run.pred.eps, run.pred.start.T);
  log_line(log, "%5s %14s %14s %14s %4s %10s %s", "step", ms.param_name.c_str(), "T", "norm", "ind", "err_mu", "msg");
  json echo = cfg.to_json();
  bool fl = cfg.floquet != "off";
  double prev_tl = run.pred.start.tau[run.pred.start.tau.size() - 1];
  auto record = [&](PoStep st) {
    BranchRow r;
    r.step = st.step;
    r.lambda = st.orb.lam;
    r.T = st.orb.T;
    r.norm = st.norm;
    r.msg = st.msg;
    json j;
    j["schema"] = kPointSchema;
    j["kind"] = "orbit";
    j["config"] = echo;
    j["step"] = st.step;
    j["orbit"] = orbit_json(st.orb);
    j["norm"] = st.norm;
    j["residual"] = orbit_residual(sys, st.orb);
    if (fl) {
      FloquetSpectrum s;
      try {
        s = orbit_multipliers(sys, st.orb, algo_of(cfg.floquet), cfg.nplus, cfg.tol_fl);
      } catch (const Error& e) {
        s.warnings.push_back(e.what());
        s.err_mu = NAN;
        s.ind = -1;
      }
      r.ind = s.ind;
      r.err_mu = s.err_mu;
      for (const auto& w : s.warnings) r.msg += (r.msg.empty() ? "" : "; ") + w;
      j["spectrum"] = spectrum_json(s);
      run.spectra.push_back(s);
    }
    if (st.orb.tau.size() > 0) {
      double tl = st.orb.tau[st.orb.tau.size() - 1];
      if (cfg.parametrization == "arclength" && tl * prev_tl < 0) {
        run.folds.push_back(st.step);
        r.msg += (r.msg.empty() ? "" : "; ") + std::string("fold");
      }
      prev_tl = tl;
    }
    save_json((fs::path(run.dir) / ("pt" + std::to_string(st.step) + ".json")).string(), j);
    log_line(log, "%5d %14.8g %14.8g %14.8g %4d %10.3e %s", r.step, r.lambda, r.T, r.norm, r.ind, r.err_mu, r.msg.c_str());
    run.rows.push_back(r);
    run.steps.push_back(st);
  };
  if (cfg.parametrization == "arclength") {
    continue_po(sys, run.pred.start, cfg.po_nsteps, ps, [&](const PoStep& st) {
      record(st);
      return true;
    });
    if (!run.steps.empty()) {
      std::string m = run.steps.back().msg;
      if (m.find("stopped") != std::string::npos && run.rows.back().msg.find(m) == std::string::npos)
        run.rows.back().msg += (run.rows.back().msg.empty() ? "" : "; ") + m;
    }
  } else {
    PeriodicOrbit start;
    try {
      start = natural_corrector(sys, run.pred.guess, ps);
    } catch (const Error& e) {
      run.stop = std::string("natural corrector failed at the first point: ") + e.what();
    }
    if (run.stop.empty()) {
      start.uref = phase_weights(sys, start);
      PoStep first;
      first.orb = start;
      first.step = 1;
      first.norm = branch_norm(sys, start);
      record(first);
      auto rest = continue_po_natural(sys, start, cfg.po_nsteps - 1, hp.s * cfg.natural_dlam, ps, &run.stop);
      for (auto& st : rest) {
        st.step += 1;
        record(st);
      }
    }
  }
  if (!run.stop.empty()) log << "# stopped: " << run.stop << "\n";
  write_branch((fs::path(run.dir) / "orbit.csv").string(), run.rows);
  return run;
}

// ---------------------------------------------------------------- floq

FloqReport cmd_floq(const RunConfig& cfg, const json& point, const std::string& algo, bool compare, std::ostream& log) {
  if (point.at("kind").get<std::string>() != "orbit") throw ConfigError("not an orbit point file");
  ModelSetup ms = make_model(cfg.model, cfg.overrides);
  verify_point(ms.disc, point);
  PeriodicOrbit orb = json_orbit(point.at("orbit"));
  FloqReport rep;
  FloquetAlgo a = algo_of(algo);
  rep.spectrum = orbit_multipliers(ms.disc, orb, a, cfg.nplus, cfg.tol_fl);
  auto show = [&](const char* name, const FloquetSpectrum& s) {
    log_line(log, "%s: ind = %d, err_mu = %.3e, trivial slot %d", name, s.ind, s.err_mu, s.trivial);
    int k = std::min<int>(s.gamma.size(), 10);
    for (int i = 0; i < k; ++i) {
      const Multiplier& g = s.gamma[i];
      if (g.infinite) log_line(log, "  gamma_%d = inf", i + 1);
      else log_line(log, "  gamma_%d: |gamma| = %.6e (log %.6f), arg = %.6f", i + 1, g.mod(), g.logmod, g.arg);
    }
    for (const auto& w : s.warnings) log << "  warning: " << w << "\n";
  };
  show(algo.c_str(), rep.spectrum);
  if (compare) {
    rep.compared = true;
    FloquetAlgo b = a == FloquetAlgo::FA1 ? FloquetAlgo::FA2 : FloquetAlgo::FA1;
    try {
      rep.other = orbit_multipliers(ms.disc, orb, b, cfg.nplus, cfg.tol_fl);
    } catch (const Error& e) {
      rep.other.warnings.push_back(e.what());
      rep.other.err_mu = HUGE_VAL;
      rep.other.ind = -1;
    }
    show(a == FloquetAlgo::FA1 ? "fa2" : "fa1", rep.other);
    const FloquetSpectrum& s1 = a == FloquetAlgo::FA1 ? rep.spectrum : rep.other;
    const FloquetSpectrum& s2 = a == FloquetAlgo::FA1 ? rep.other : rep.spectrum;
    std::ostringstream note;
    if (s1.ind != s2.ind) note << "index differs (fa1 " << s1.ind << ", fa2 " << s2.ind << "); ";
    if (!(s1.err_mu <= cfg.tol_fl) && s2.err_mu <= cfg.tol_fl)
      note << "fa1 misses the trivial multiplier (err_mu " << s1.err_mu << " vs " << s2.err_mu << "); ";
    rep.note = note.str();
    rep.inconsistent = !rep.note.empty();
    log << (rep.inconsistent ? "INCONSISTENT: " + rep.note : std::string("fa1 and fa2 agree")) << "\n";
  }
  json j;
  j["schema"] = kPointSchema;
  j["kind"] = "spectrum";
  j["spectrum"] = spectrum_json(rep.spectrum);
  if (compare) {
    j["other"] = spectrum_json(rep.other);
    j["inconsistent"] = rep.inconsistent;
    j["note"] = rep.note;
  }
  save_json((fs::path(output_dir(cfg)) / ("floq_" + algo + ".json")).string(), j);
  return rep;
}

// ---------------------------------------------------------------- plotdata

int cmd_plotdata(const std::vector<std::string>& files, const std::string& prefix, const std::string& oracle,
                 std::ostream& log) {
  if (oracle != "none" && oracle != "cgl") throw ConfigError("oracle must be none or cgl");
  struct Row {
    std::string branch;
    BranchRow r;
    bool stable;
    double oracle;
  };
  std::vector<Row> rows;
  for (const auto& f : files) {
    std::string b = fs::path(f).parent_path().filename().string() + "/" + fs::path(f).stem().string();
    for (const auto& r : read_branch(f)) {
      double o = NAN;
      if (oracle == "cgl") {
        CglOracle c = cgl_oracle(0, r.lambda);
        if (c.exists) {
          double up = std::sqrt(c.a2_upper), lo = c.a2_lower > 0 ? std::sqrt(c.a2_lower) : NAN;
          o = std::isnan(lo) || std::abs(up - r.norm) < std::abs(lo - r.norm) ? up : lo;
        }
      }
      rows.push_back({b, r, r.ind == 0, o});
    }
  }
  fs::path pre(prefix);
  if (pre.has_parent_path()) fs::create_directories(pre.parent_path());
  std::ofstream csv(prefix + ".csv");
  if (!csv) throw ConfigError("cannot write " + prefix + ".csv");
  csv << "branch,step,lambda,norm,T,ind,stable" << (oracle == "cgl" ? ",oracle_norm" : "") << "\n";
  for (const auto& x : rows) {
    csv << x.branch << "," << x.r.step << "," << fmt(x.r.lambda) << "," << fmt(x.r.norm) << ","
        << (std::isnan(x.r.T) ? "" : fmt(x.r.T)) << "," << (x.r.ind < 0 ? "" : std::to_string(x.r.ind)) << ","
        << (x.r.ind < 0 ? "" : (x.stable ? "1" : "0"));
    if (oracle == "cgl") csv << "," << (std::isnan(x.oracle) ? "" : fmt(x.oracle));
    csv << "\n";
  }
  double x0 = HUGE_VAL, x1 = -HUGE_VAL, y0 = HUGE_VAL, y1 = -HUGE_VAL;
  for (const auto& x : rows) {
    x0 = std::min(x0, x.r.lambda);
    x1 = std::max(x1, x.r.lambda);
    y0 = std::min(y0, x.r.norm);
    y1 = std::max(y1, x.r.norm);
  }
  if (rows.empty()) x0 = y0 = 0, x1 = y1 = 1;
  if (x1 - x0 < 1e-12) x1 = x0 + 1;
  if (y1 - y0 < 1e-12) y1 = y0 + 1;
  const double W = 640, H = 400, P = 40;
  auto X = [&](double v) { return P + (v - x0) / (x1 - x0) * (W - 2 * P); };
  auto Y = [&](double v) { return H - P - (v - y0) / (y1 - y0) * (H - 2 * P); };
  std::ofstream svg(prefix + ".svg");
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  svg << "<rect x=\"" << P << "\" y=\"" << P << "\" width=\"" << W - 2 * P << "\" height=\"" << H - 2 * P
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << P << "\" y=\"" << H - 10 << "\" font-size=\"11\">lambda " << fmt(x0) << " .. " << fmt(x1)
      << ", norm " << fmt(y0) << " .. " << fmt(y1) << "</text>\n";
  for (size_t i = 1; i < rows.size(); ++i) {
    const Row &a = rows[i - 1], &b = rows[i];
    if (a.branch != b.branch) continue;
    svg << "<line x1=\"" << X(a.r.lambda) << "\" y1=\"" << Y(a.r.norm) << "\" x2=\"" << X(b.r.lambda) << "\" y2=\""
        << Y(b.r.norm) << "\" stroke=\"black\" stroke-width=\"" << (a.stable && b.stable ? 3 : 1) << "\"/>\n";
  }
  for (const auto& x : rows)
    if (!std::isnan(x.oracle))
      svg << "<circle cx=\"" << X(x.r.lambda) << "\" cy=\"" << Y(x.oracle) << "\" r=\"2\"/>\n";
  svg << "</svg>\n";
  log_line(log, "%zu rows -> %s.csv, %s.svg", rows.size(), prefix.c_str(), prefix.c_str());
  return (int)rows.size();
}

// ---------------------------------------------------------------- timestep

void cmd_timestep(const RunConfig& cfg, const TimestepOptions& opt, std::ostream& log) {
  ModelSetup ms = make_model(cfg.model, cfg.overrides);
  if (backward_diffusion(ms.disc.problem()) && !opt.force)
    throw ConfigError("model " + cfg.model + " has backward diffusion; the initial value problem is ill-posed (use --force)");
  Discretization disc(ms.disc.problem(), ms.disc.grid(), opt.lumped);
  Vec u = ms.u0;
  double lam = ms.lam0;
  if (!opt.from.empty()) {
    json p = load_json(opt.from);
    std::string kind = p.at("kind").get<std::string>();
    if (kind == "orbit") {
      PeriodicOrbit o = json_orbit(p.at("orbit"));
      u = o.slice(0);
      lam = o.lam;
    } else {
      u = json_vec(p.at("u"));
      lam = p.at("lambda").get<double>();
    }
    if (u.size() != disc.size()) throw ConfigError("initial state does not match the model size");
  }
  if (opt.perturb != 0) {
    std::mt19937 gen(cfg.det.seed);
    std::normal_distribution<double> nd;
    for (int i = 0; i < u.size(); ++i) u[i] += opt.perturb * nd(gen);
  }
  TimestepSettings ts;
  ts.dt = opt.dt;
  ts.nsteps = opt.nsteps;
  ts.every = opt.every;
  Trajectory tr = integrate(disc, u, lam, ts);
  std::string dir = output_dir(cfg);
  std::ofstream f((fs::path(dir) / "trajectory.csv").string());
  f << "t,norm\n";
  for (size_t k = 0; k < tr.t.size(); ++k) {
    double nrm = state_norm(disc, tr.u[k]);
    f << fmt(tr.t[k]) << "," << fmt(nrm) << "\n";
    log_line(log, "t = %10.4f  norm = %.8g", tr.t[k], nrm);
  }
  json j;
  j["schema"] = kPointSchema;
  j["kind"] = "state";
  j["config"] = cfg.to_json();
  j["lambda"] = lam;
  j["t"] = tr.t.back();
  j["u"] = vec_json(tr.u.back());
  j["residual"] = disc.residual(tr.u.back(), lam).lpNorm<Eigen::Infinity>();
  save_json((fs::path(dir) / "final.json").string(), j);
}

// ---------------------------------------------------------------- selftest

bool cmd_selftest(std::ostream& log) {
  bool ok = true;
  for (std::string name : {"cgl1d", "cgl2d", "bruss1d", "bruss2d", "ocpol"}) {
    ModelSetup ms = make_model(name);
    double rs = reaction_selftest(ms.disc.problem());
    std::mt19937 gen(5);
    std::normal_distribution<double> nd;
    Vec u = ms.u0;
    for (int i = 0; i < u.size(); ++i) u[i] += 0.1 * nd(gen);
    double je = jacobian_fd_error(ms.disc, u, ms.lam0);
    bool pass = rs < 1e-5 && je < 1e-5;
    ok = ok && pass;
    log_line(log, "%-8s reaction %.2e  jacobian %.2e  %s", name.c_str(), rs, je, pass ? "ok" : "FAIL");
  }
  {
    OdeSystem sl = stuart_landau(1.0, cplx(-1.0, 0.3));
    HopfPoint hp = hopf_eigenpair(sl, Vec::Zero(2), 0.0, 1.0);
    branch_direction(sl, hp);
    bool pass = std::abs(hp.c1 + 2.0) < 1e-4 && hp.s == 1;
    ok = ok && pass;
    log_line(log, "%-8s c1 %.8f  s %d  %s", "sl", hp.c1, hp.s, pass ? "ok" : "FAIL");
  }
  return ok;
}

}  // namespace pdehopf
