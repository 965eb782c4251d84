#pragma once

#include "pdehopf/orbit.hpp"

namespace pdehopf {

// Hopf point data; mu_r and c1 in the dynamics convention M u' = -G
struct HopfPoint {
  Vec u0;
  double lam = 0, omega = 0;
  cplx mu;       // eigenvalue of mu M phi = G_u phi nearest i omega
  CVec psi;      // psi^H M psi = 1, largest entry real positive
  double residual = 0;
  double mu_r = 0, c1 = 0;
  int s = 0;
  double alpha = 0;
};

struct HopfSettings {
  double mu2 = 1e-4;
  double fd_lam = 1e-4;   // relative to max(1, |lam|)
  double fd_form = 1e-4;  // step of the multilinear differences
  double fallback_alpha = 0;
  int dense_limit = 600;
};

HopfPoint hopf_eigenpair(const System& sys, const Vec& u0, double lam, double omega_guess,
                         const HopfSettings& hs = {});

// second and third directional derivatives of G by differences of the Jacobian
CVec form_b(const System& sys, const Vec& u, double lam, const CVec& x, const CVec& y, double h = 1e-4);
CVec form_c(const System& sys, const Vec& u, double lam, const CVec& x, const CVec& y, const CVec& z,
            double h = 1e-4);

double cubic_coefficient(const System& sys, const HopfPoint& hp, const HopfSettings& hs = {});
double eigen_drift(const System& sys, const HopfPoint& hp, const HopfSettings& hs = {});

// fills mu_r, c1, s and alpha
void branch_direction(const System& sys, HopfPoint& hp, const HopfSettings& hs = {});

struct Predictor {
  PeriodicOrbit start;  // steady replicated, tangent and phase weights set
  PeriodicOrbit guess;  // start + ds * tangent
  double eps = 0;
};

Predictor build_predictor(const System& sys, const HopfPoint& hp, int m, double ds, double xi = 0, double wT = 0.5);

}  // namespace pdehopf
