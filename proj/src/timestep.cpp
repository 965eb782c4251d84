#include "pdehopf/timestep.hpp"

#include <Eigen/SparseLU>

namespace pdehopf {

bool backward_diffusion(const PdeProblem& p) {
  for (double d : p.diff)
    if (d < 0) return true;
  return false;
}

Trajectory integrate(const System& sys, const Vec& u0, double lam, const TimestepSettings& s) {
  if (!(s.dt > 0) || s.nsteps < 0 || s.every < 1) throw ConfigError("time stepping: invalid dt, nsteps or every");
  const SpMat& M = sys.mass();
  Trajectory tr;
  tr.t.push_back(0);
  tr.u.push_back(u0);
  Vec u = u0;
  Vec Gu = sys.residual(u, lam);
  for (int k = 1; k <= s.nsteps; ++k) {
    Vec w = u;
    Vec Gw = Gu;
    for (int it = 0;; ++it) {
      Vec F = M * (w - u) / s.dt + 0.5 * (Gw + Gu);
      double res = F.lpNorm<Eigen::Infinity>();
      if (!std::isfinite(res)) throw EvaluationError("time stepping: non-finite state", k);
      if (res <= s.tol) break;
      if (it >= s.maxit) throw SolverError("time stepping: Newton failed at step " + std::to_string(k));
      SpMat J = M / s.dt + 0.5 * sys.jacobian(w, lam);
      Eigen::SparseLU<SpMat> lu;
      lu.compute(J);
      if (lu.info() != Eigen::Success) throw SolverError("time stepping: singular step matrix");
      w -= lu.solve(F);
      Gw = sys.residual(w, lam);
    }
    u = w;
    Gu = Gw;
    if (k % s.every == 0 || k == s.nsteps) {
      tr.t.push_back(k * s.dt);
      tr.u.push_back(u);
    }
  }
  return tr;
}

}  // namespace pdehopf
