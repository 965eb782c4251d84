#pragma once

#include <string>
#include <vector>

#include "pdehopf/types.hpp"

namespace pdehopf {
class System;
struct PeriodicOrbit;
}  // namespace pdehopf

namespace pdehopf {

// multiplier stored as log-modulus and argument so that 1e300 and beyond stay representable
struct Multiplier {
  double logmod = 0;
  double arg = 0;
  bool infinite = false;

  double mod() const { return infinite ? HUGE_VAL : std::exp(logmod); }
  cplx value() const { return std::polar(mod(), arg); }
};

enum class FloquetAlgo { FA1, FA2 };

struct FloquetSpectrum {
  std::vector<Multiplier> gamma;  // sorted by modulus, descending
  int trivial = -1;               // slot nearest to 1
  double err_mu = 0;
  int ind = 0;
  FloquetAlgo algo = FloquetAlgo::FA1;
  std::vector<std::string> warnings;
};

// M_{K}^{-1} H_{K} ... M_1^{-1} H_1
Mat monodromy_fa1(const std::vector<SpMat>& Mj, const std::vector<SpMat>& Hj);
FloquetSpectrum multipliers_fa1(const Mat& mon, int n_plus, double tol_fl = 1e-6);

struct PeriodicSchurForm {
  std::vector<CMat> A, B, Q, Z;  // A_i = Q_i At_i Z_{i-1}^H (Z_0 = Z_K), B_i = Q_i Bt_i Z_i^H
  int sweeps = 0;
};

// pairs (A_i, B_i), i = 1..K, of the product B_K^{-1} A_K ... B_1^{-1} A_1
// want_schur = false skips Q, Z and the parts of the factors outside the active window; diagonals stay exact
PeriodicSchurForm periodic_schur(const std::vector<Mat>& A, const std::vector<Mat>& B, bool want_schur = true);
std::vector<Multiplier> schur_products(const PeriodicSchurForm& f);
FloquetSpectrum multipliers_fa2(const PeriodicSchurForm& f, double tol_fl = 1e-6);

// fill trivial slot, err_mu, ind and warnings from a multiplier list
void finish_spectrum(FloquetSpectrum& s, double tol_fl);
int floq_index(const FloquetSpectrum& s, double tol_fl = 1e-6);

// multipliers of a collocated orbit from its blocks M_j, H_j
FloquetSpectrum orbit_multipliers(const System& sys, const PeriodicOrbit& orb, FloquetAlgo algo, int n_plus = 20,
                                  double tol_fl = 1e-6);

// defect of a steady state from the full pencil spectrum: n/2 - #{Re mu > 0}
int oc_steady_defect(const CVec& mu, std::vector<std::string>* warnings = nullptr);
// defect of an orbit: ind - n/2
int oc_orbit_defect(const FloquetSpectrum& s, int n);

}  // namespace pdehopf
