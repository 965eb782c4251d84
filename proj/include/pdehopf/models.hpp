#pragma once

#include <array>
#include <map>
#include <string>

#include "pdehopf/spatial.hpp"

namespace pdehopf {

struct PeriodicOrbit;

// cubic-quintic complex Ginzburg-Landau, real two-component form; parameter vector (r, nu, c3, mu, c5)
struct CglParams {
  double r = 0, nu = 1, c3 = -1, mu = 0.1, c5 = 1;
};

PdeProblem cgl_problem(const CglParams& p);
// Neumann on (-l pi, l pi)
Discretization cgl1d(int nx = 31, double l = 1, const CglParams& p = {});
// stiff-spring Dirichlet on (-lx pi, lx pi) x (-ly pi, ly pi)
Discretization cgl2d(int nx = 41, int ny = 21, double lx = 1, double ly = 0.5, const CglParams& p = {},
                     double spring = 1e3);

struct CglOracle {
  bool exists = false;
  double a2_upper = 0, a2_lower = 0;  // |a|^2 on both roots
  double omega_upper = 0, omega_lower = 0;
  double fold_r = 0;
};
// closed-form orbits u = a exp(i(omega t - k.x)) with |k|^2 = k2
CglOracle cgl_oracle(double k2, double r, const CglParams& p = {});
// growth rate h(r) of the amplitude perturbation on the k=0 orbit with |a|^2 = a2
double cgl_floquet_rate(double r, double a2, const CglParams& p = {});

// extended Brusselator, components (u, v, w); parameter vector (a, b, c, d)
struct BrussParams {
  double a = 0.95, b = 2.75, c = 1, d = 1, Du = 0.01, Dv = 0.1, Dw = 1;
};

PdeProblem bruss_problem(const BrussParams& p);
Discretization bruss1d(int nx, double L, const BrussParams& p = {});
Discretization bruss2d(int nx, int ny, double lx, double ly, const BrussParams& p = {});
Vec bruss_homogeneous(const BrussParams& p, int np);
// eigenvalues of the linearization at the homogeneous state with wave number k (positive real part unstable)
std::array<cplx, 3> bruss_dispersion(const BrussParams& p, double k);
// smallest b > b_lo where the mode k loses stability, by bisection
double bruss_critical_b(BrussParams p, double k, double b_lo = 1.0, double b_hi = 6.0);

// pollution optimal control canonical system; components (v1, v2, l1, l2); parameter vector (rho, p, beta, gamma)
struct OcParams {
  double rho = 0.5, p = 1, beta = 0.2, gamma = 300, d1 = 0.001, d2 = 0.2;
};

PdeProblem oc_problem(const OcParams& p);
Discretization ocpol(int nx = 41, const OcParams& p = {});

struct OcCss {
  std::array<double, 4> u;
  double value;
};
OcCss oc_css(const OcParams& p);
double oc_hopf_condition(const OcParams& p, double l);
// current value J_c at one node
double oc_current_value(const OcParams& p, const double* u);
// discounted value of an orbit started at phase phi (fraction of the period in [0,1))
double oc_orbit_value(const Discretization& disc, const OcParams& p, const PeriodicOrbit& orb, double phi);
// spatial average of J_c over the grid for a state vector
double oc_average_value(const Discretization& disc, const OcParams& p, const Vec& u);

// Stuart-Landau normal form z' = (lam + i om) z + ell |z|^2 z as a two-component system
struct OdeSystem : System {
  std::function<Vec(const Vec&, double)> f;
  std::function<Mat(const Vec&, double)> df;
  int n = 0;
  SpMat M;

  int size() const override { return n; }
  const SpMat& mass() const override { return M; }
  Vec residual(const Vec& u, double lam) const override { return -f(u, lam); }
  SpMat jacobian(const Vec& u, double lam) const override { return (-df(u, lam)).sparseView(); }
};

OdeSystem stuart_landau(double omega, cplx ell);

struct ModelSetup {
  std::string name;
  Discretization disc;
  Vec u0;
  double lam0;
  std::string param_name;
};

// named demo models with parameter overrides, e.g. {"b", 2.7} or {"nx", 61}
ModelSetup make_model(const std::string& name, const std::map<std::string, double>& overrides = {});

}  // namespace pdehopf
