#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "pdehopf/floquet.hpp"
#include "pdehopf/orbit.hpp"
#include "pdehopf/steady.hpp"

namespace pdehopf {

using json = nlohmann::json;

inline const char* kPointSchema = "pdehopf.point/1";
inline const char* kConfigSchema = "pdehopf.config/1";

json vec_json(const Vec& v);
Vec json_vec(const json& j);
json cvec_json(const CVec& v);
CVec json_cvec(const json& j);

json orbit_json(const PeriodicOrbit& o);
PeriodicOrbit json_orbit(const json& j);
json spectrum_json(const FloquetSpectrum& s);
FloquetSpectrum json_spectrum(const json& j);

void save_json(const std::string& path, const json& j);
json load_json(const std::string& path);

struct BranchRow {
  int step = 0;
  double lambda = 0, T = NAN, norm = 0;
  int ind = -1;  // -1 when not computed
  double err_mu = NAN;
  std::string msg;
};

inline const char* kBranchHeader = "step,lambda,T,norm,ind,err_mu,msg";

void write_branch(const std::string& path, const std::vector<BranchRow>& rows);
std::vector<BranchRow> read_branch(const std::string& path);

}  // namespace pdehopf
