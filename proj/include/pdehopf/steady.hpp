#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pdehopf/system.hpp"

namespace pdehopf {

struct StationaryPoint {
  Vec u;
  double lam = 0;
  Vec tau;  // (tau_u, tau_lam), xi-normalized
  std::vector<int> counts;
  std::vector<CVec> near;  // eigenvalues behind each count
  int det_sign = 0;
  bool stable = true;
  int step = 0;
};

struct DetectorState {
  std::vector<double> shifts = {0.0};
  std::vector<int> neig = {6};
  double mu1 = 0.01, mu2 = 1e-4;
  int refresh = 20;   // steps between resonance scans in auto mode
  bool auto_shifts = false;
  double omega_max = 2.0;
  int n_samples = 32;
  int max_bisect = 10;
  int dense_limit = 600;
  unsigned seed = 1;

  void validate() const;
};

struct SteadySettings {
  double ds = 0.01, dsmin = 1e-5, dsmax = 0.02;
  double tol = 1e-8;
  int maxit = 10;
  int nsteps = 100;
  double lam_min = -HUGE_VAL, lam_max = HUGE_VAL;
  int dir = 1;
  double xi = 0;  // 0 selects 1/n_u
  double grow = 1.3;
  bool detect = true;
};

enum class SpecialType { BP, HBP };

struct SpecialPoint {
  SpecialType type = SpecialType::HBP;
  double lam = 0, omega = 0;
  cplx mu;
  Vec u, tau;
  int step = 0;
  int shift = 0;
};

struct SteadyBranch {
  std::vector<StationaryPoint> points;
  std::vector<SpecialPoint> special;
  std::vector<std::string> log;
  std::vector<std::vector<double>> shift_history;
};

// sign of the determinant from an LU factorization, permutation parity included; 0 on an exact zero pivot
int det_sign(const SpMat& A);

struct ResonanceResult {
  std::vector<double> omegas;  // sorted by peak height, descending
  std::vector<double> heights;
  std::vector<std::string> warnings;
};
// peaks of sum_b |b^H (G_u - i omega M)^{-1} b| over (0, omega_max]
ResonanceResult resonance_scan(const SpMat& Gu, const SpMat& M, double omega_max, int n_samples,
                               const std::vector<CVec>& probes, int refine_rounds = 2);
std::vector<CVec> default_probes(int n, unsigned seed);

// counts of eigenvalues with negative real part among the n_eig closest to i omega_j; pairs count twice for omega_j > 0
void count_unstable(const System& sys, StationaryPoint& pt, const DetectorState& det);

double xi_stationary(int n);

// Newton on G(u, lam) = 0 at fixed lam
Vec newton_fixed(const System& sys, const Vec& u0, double lam, double tol = 1e-8, int maxit = 10);

// tangent of the branch through (u, lam); oriented against ref, or along dir in lambda if ref is empty
Vec stationary_tangent(const System& sys, const Vec& u, double lam, const Vec& ref, double xi, int dir = 1);

// predictor-corrector step of length ds from pt; throws SolverError when Newton fails
StationaryPoint cont_step_stationary(const System& sys, const StationaryPoint& pt, double ds, const SteadySettings& s,
                                     int* iterations = nullptr);

// localize crossings between consecutive points a and b
std::vector<SpecialPoint> detect_and_localize(const System& sys, const StationaryPoint& a, const StationaryPoint& b,
                                              double ds_ab, const DetectorState& det, const SteadySettings& s,
                                              std::vector<std::string>* log = nullptr);

StationaryPoint initial_point(const System& sys, const Vec& u0, double lam0, const SteadySettings& s);

SteadyBranch continue_steady(const System& sys, const Vec& u0, double lam0, const SteadySettings& s,
                             DetectorState det, const std::function<void(const StationaryPoint&)>& on_step = {});

}  // namespace pdehopf
