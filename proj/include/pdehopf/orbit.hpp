#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/SparseLU>

#include "pdehopf/system.hpp"

namespace pdehopf {

// m time slices u(t_1..t_m) on 0 = t_1 < ... < t_m = 1, stored slice-major; u_m = u_1.
struct PeriodicOrbit {
  int n = 0, m = 0;
  Vec t;
  Vec U;
  double T = 0, lam = 0;
  Vec tau;   // (tau_u, tau_T, tau_lam), length m n + 2
  Vec uref;  // M u'_ref on every slice, phase-condition weights
  double xi = 0, wT = 0.5;

  auto slice(int j) { return U.segment(j * n, n); }
  auto slice(int j) const { return U.segment(j * n, n); }
  double h(int j) const { return t[j + 1] - t[j]; }
};

struct PoSettings {
  double xi = 0;  // 0 selects 10/(m n)
  double wT = 0.5;
  double tol = 1e-8;
  int maxit = 10;
  double ds = 0.1, dsmin = 1e-4, dsmax = 1.0;
  double grow = 1.3;
  int refine_passes = 5;
  double bordered_tol = 1e-10;
};

double default_xi(int m, int n);
Vec uniform_mesh(int m);
PeriodicOrbit steady_orbit(const Vec& u, double T, double lam, int m);

Vec po_residual(const System& sys, const PeriodicOrbit& orb);

struct PoJacobian {
  std::vector<SpMat> Mj, Hj;  // blocks j = 1..m-1 (index 0..m-2)
  SpMat A;                    // collocation Jacobian with the periodicity rows
  Vec dT, dlam;
};

PoJacobian po_jacobian(const System& sys, const PeriodicOrbit& orb, bool with_dlam = true);

// assemble the cyclic block matrix from the M_j, H_j blocks with corner factor gamma
SpMat assemble_cyclic(const std::vector<SpMat>& Mj, const std::vector<SpMat>& Hj, double gamma = 1.0);

struct Phase {
  double phi;
  Vec grad;
};
Phase phase_condition(const PeriodicOrbit& orb);
// M u' = -T G(u) on every slice
Vec phase_weights(const System& sys, const PeriodicOrbit& orb);

struct Arclength {
  double psi;
  Vec grad;  // length m n + 2
};
Arclength arclength_condition(const PeriodicOrbit& orb, const PeriodicOrbit& prev, double ds);

double xi_norm(const Vec& U, double T, double lam, double xi, double wT);
double xi_dot(const Vec& a, const Vec& b, int nu, double xi, double wT);

// bordered system [A B; C D] x = rhs by block elimination with residual refinement;
// falls back to a sparse LU of the full matrix when the elimination is unusable
class BorderedSolver {
 public:
  BorderedSolver(const SpMat& A, const Mat& B, const Mat& C, const Mat& D);
  Vec solve(const Vec& rhs, double tol = 1e-10, int passes = 5, double* final_res = nullptr) const;
  Vec apply(const Vec& x) const;
  bool used_full() const { return full_ != nullptr; }

 private:
  SpMat A_;
  Mat B_, C_, D_, V_;
  Eigen::SparseLU<SpMat> lu_;
  Eigen::PartialPivLU<Mat> dlu_;
  bool block_ok_ = false;
  mutable std::shared_ptr<Eigen::SparseLU<SpMat>> full_;
  Vec once(const Vec& rhs) const;
  Vec once_full(const Vec& rhs) const;
  Vec refine(Vec x, const Vec& rhs, double bn, double tol, int passes, bool full, double* rel) const;
};

struct StepStats {
  int iterations = 0;
  double residual = 0;
};

// arclength Newton corrector; prev carries tangent, phase weights and weights
PeriodicOrbit newton_po(const System& sys, const PeriodicOrbit& guess, const PeriodicOrbit& prev, double ds,
                        const PoSettings& s, StepStats* stats = nullptr);

// tangent from [A B; C D] tau = (0, 0, 1), xi-normalized, oriented against prev tangent
Vec new_tangent(const System& sys, const PeriodicOrbit& orb, const PoSettings& s);

enum class PhaseMode { Point, Integral };

// fixed-lambda corrector in (u, T)
PeriodicOrbit correct_fixed_lambda(const System& sys, const PeriodicOrbit& guess, PhaseMode mode,
                                   const PoSettings& s, StepStats* stats = nullptr);
PeriodicOrbit natural_corrector(const System& sys, const PeriodicOrbit& guess, const PoSettings& s,
                                StepStats* stats = nullptr);

// insert mesh points where |u'| is largest and re-correct at fixed lambda
PeriodicOrbit refine_tmesh(const System& sys, const PeriodicOrbit& orb, int m_new, const PoSettings& s,
                           std::string* warning = nullptr);
// orbit evaluated on a new mesh by linear interpolation in t
PeriodicOrbit interpolate_orbit(const PeriodicOrbit& orb, const Vec& t_new);

// sqrt of the time-trapezoid of u' M u over |Omega|
double branch_norm(const System& sys, const PeriodicOrbit& orb);

struct PoStep {
  PeriodicOrbit orb;
  int step = 0;
  int iterations = 0;
  double ds = 0;
  double projected_step = 0;  // <tau_prev, U - U_prev>_xi
  double norm = 0;
  std::string msg;
};

// arclength continuation from a point carrying tangent and phase weights
std::vector<PoStep> continue_po(const System& sys, const PeriodicOrbit& start, int nsteps, PoSettings s,
                                const std::function<bool(const PoStep&)>& on_step = {});

// natural-parameter continuation in steps of dlam; stops at the first corrector failure
std::vector<PoStep> continue_po_natural(const System& sys, const PeriodicOrbit& start, int nsteps, double dlam,
                                        const PoSettings& s, std::string* stop_reason = nullptr);

}  // namespace pdehopf
