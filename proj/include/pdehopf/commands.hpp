#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "pdehopf/hopf.hpp"
#include "pdehopf/io.hpp"
#include "pdehopf/models.hpp"

namespace pdehopf {

struct RunConfig {
  std::string model = "cgl1d";
  std::map<std::string, double> overrides;
  std::string out;  // empty selects out/<model>

  SteadySettings steady;
  DetectorState det;

  int m = 21;
  PoSettings po;
  int po_nsteps = 20;
  std::string parametrization = "arclength";
  double natural_dlam = 0.01;
  double fallback_alpha = 0;

  std::string floquet = "fa1";
  int nplus = 20;
  double tol_fl = 1e-6;

  // one key; numeric keys not known here become model parameter overrides
  void set(const std::string& key, const std::string& value);
  void validate() const;
  json to_json() const;
};

RunConfig config_from_json(const json& j);
// flat "key = value" lines with # comments, or a JSON object
RunConfig load_config(const std::string& path);

// PDEHOPF_OUT (default ".") joined with cfg.out; created on demand
std::string output_dir(const RunConfig& cfg);

double state_norm(const System& sys, const Vec& u);

struct SteadyRun {
  SteadyBranch branch;
  std::vector<BranchRow> rows;
  std::vector<std::string> point_files;
  std::string dir;
};
SteadyRun cmd_steady(const RunConfig& cfg, std::ostream& log);

struct HopfRun {
  HopfPoint hp;
  Predictor pred;
  std::vector<PoStep> steps;
  std::vector<FloquetSpectrum> spectra;  // empty when floquet = off
  std::vector<BranchRow> rows;
  std::vector<int> folds;  // steps after which tau_lambda changed sign
  std::string dir, stop;
};
// cfg starts from the config echo of the point file; edits are applied on top by the caller
HopfRun cmd_hopf(const RunConfig& cfg, const json& hopf_point, std::ostream& log, const std::string& tag = "");

struct FloqReport {
  FloquetSpectrum spectrum;
  bool compared = false, inconsistent = false;
  FloquetSpectrum other;
  std::string note;
};
FloqReport cmd_floq(const RunConfig& cfg, const json& orbit_point, const std::string& algo, bool compare,
                    std::ostream& log);

// tidy CSV and SVG of (lambda, norm) with stability; oracle "cgl" adds the closed-form k = 0 norm
int cmd_plotdata(const std::vector<std::string>& files, const std::string& prefix, const std::string& oracle,
                 std::ostream& log);

struct TimestepOptions {
  double dt = 0.05;
  int nsteps = 200, every = 10;
  bool force = false, lumped = false;
  double perturb = 0;
  std::string from;
};
void cmd_timestep(const RunConfig& cfg, const TimestepOptions& opt, std::ostream& log);

bool cmd_selftest(std::ostream& log);

// re-evaluate the residual stored in a point file; throws when it is no longer met
double verify_point(const System& sys, const json& point);

}  // namespace pdehopf
