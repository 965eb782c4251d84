#pragma once

#include <vector>

#include "pdehopf/spatial.hpp"

namespace pdehopf {

struct TimestepSettings {
  double dt = 0.05;
  int nsteps = 200;
  int every = 1;  // store every k-th state
  double tol = 1e-10;
  int maxit = 10;
};

struct Trajectory {
  std::vector<double> t;
  std::vector<Vec> u;
};

// trapezoidal rule M (u_{k+1} - u_k) / dt = -(G(u_{k+1}) + G(u_k)) / 2 with Newton per step
Trajectory integrate(const System& sys, const Vec& u0, double lam, const TimestepSettings& s);

// true if some component diffuses backwards, which makes the initial value problem ill-posed
bool backward_diffusion(const PdeProblem& p);

}  // namespace pdehopf
