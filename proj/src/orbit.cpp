#include "pdehopf/orbit.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

namespace pdehopf {

double default_xi(int m, int n) { return 10.0 / (double(m) * n); }

Vec uniform_mesh(int m) {
  Vec t(m);
  for (int j = 0; j < m; ++j) t[j] = double(j) / (m - 1);
  return t;
}

PeriodicOrbit steady_orbit(const Vec& u, double T, double lam, int m) {
  PeriodicOrbit o;
  o.n = (int)u.size();
  o.m = m;
  o.t = uniform_mesh(m);
  o.U = u.replicate(m, 1);
  o.T = T;
  o.lam = lam;
  o.uref = Vec::Zero(o.n * m);
  o.xi = default_xi(m, o.n);
  return o;
}

namespace {

void check_orbit(const PeriodicOrbit& o) {
  if (o.m < 3) throw ConfigError("orbit needs at least 3 time slices");
  if (o.U.size() != (long)o.n * o.m || o.t.size() != o.m) throw ConfigError("orbit data has inconsistent sizes");
  for (int j = 0; j + 1 < o.m; ++j)
    if (!(o.h(j) > 0)) throw ConfigError("time mesh must be strictly increasing");
}

// previous slice and interval length of collocation block s
inline int prev_slice(const PeriodicOrbit& o, int s) { return s == 0 ? o.m - 2 : s - 1; }
inline double block_h(const PeriodicOrbit& o, int s) { return s == 0 ? o.h(o.m - 2) : o.h(s - 1); }

std::vector<Vec> slice_residuals(const System& sys, const PeriodicOrbit& o, double lam) {
  std::vector<Vec> G(o.m - 1);
  for (int s = 0; s + 1 < o.m; ++s) {
    try {
      G[s] = sys.residual(o.slice(s), lam);
    } catch (const EvaluationError& e) {
      throw EvaluationError(std::string(e.what()) + " in slice " + std::to_string(s), s);
    }
    if (!G[s].allFinite()) throw EvaluationError("non-finite residual in slice " + std::to_string(s), s);
  }
  return G;
}

Vec collocation(const System& sys, const PeriodicOrbit& o, double T, double lam) {
  int n = o.n, m = o.m;
  std::vector<Vec> G = slice_residuals(sys, o, lam);
  const SpMat& M = sys.mass();
  Vec r(n * m);
  for (int s = 0; s + 1 < m; ++s) {
    int p = prev_slice(o, s);
    double h = block_h(o, s);
    r.segment(s * n, n) = -(M * (o.slice(s) - o.slice(p))) / h - 0.5 * T * (G[s] + G[p]);
  }
  r.segment((m - 1) * n, n) = o.slice(m - 1) - o.slice(0);
  return r;
}

void add_block(std::vector<Triplet>& t, const SpMat& B, int r0, int c0, double scale) {
  for (int k = 0; k < B.outerSize(); ++k)
    for (SpMat::InnerIterator it(B, k); it; ++it) t.emplace_back(r0 + it.row(), c0 + it.col(), scale * it.value());
}

}  // namespace

Vec po_residual(const System& sys, const PeriodicOrbit& orb) {
  check_orbit(orb);
  return collocation(sys, orb, orb.T, orb.lam);
}

SpMat assemble_cyclic(const std::vector<SpMat>& Mj, const std::vector<SpMat>& Hj, double gamma) {
  int K = (int)Mj.size(), m = K + 1;
  int n = (int)Mj[0].rows();
  std::vector<Triplet> t;
  for (int s = 0; s < K; ++s) {
    int p = s == 0 ? m - 2 : s - 1;
    add_block(t, Mj[s], s * n, s * n, 1.0);
    add_block(t, Hj[s], s * n, p * n, -1.0);
  }
  for (int i = 0; i < n; ++i) {
    t.emplace_back((m - 1) * n + i, i, -gamma);
    t.emplace_back((m - 1) * n + i, (m - 1) * n + i, 1.0);
  }
  SpMat A(m * n, m * n);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

PoJacobian po_jacobian(const System& sys, const PeriodicOrbit& orb, bool with_dlam) {
  check_orbit(orb);
  int n = orb.n, m = orb.m;
  const SpMat& M = sys.mass();
  std::vector<SpMat> J(m - 1);
  for (int s = 0; s + 1 < m; ++s) J[s] = sys.jacobian(orb.slice(s), orb.lam);
  std::vector<Vec> G = slice_residuals(sys, orb, orb.lam);
  PoJacobian pj;
  pj.Mj.resize(m - 1);
  pj.Hj.resize(m - 1);
  pj.dT = Vec::Zero(n * m);
  for (int s = 0; s + 1 < m; ++s) {
    int p = prev_slice(orb, s);
    double h = block_h(orb, s);
    pj.Mj[s] = -M / h - 0.5 * orb.T * J[s];
    pj.Hj[s] = -M / h + 0.5 * orb.T * J[p];
    pj.dT.segment(s * n, n) = -0.5 * (G[s] + G[p]);
  }
  pj.A = assemble_cyclic(pj.Mj, pj.Hj, 1.0);
  if (with_dlam) {
    double h = 1e-6 * std::max(1.0, std::abs(orb.lam));
    pj.dlam = (collocation(sys, orb, orb.T, orb.lam + h) - collocation(sys, orb, orb.T, orb.lam - h)) / (2 * h);
  }
  return pj;
}

Vec phase_weights(const System& sys, const PeriodicOrbit& orb) {
  Vec w(orb.n * orb.m);
  for (int j = 0; j < orb.m; ++j) w.segment(j * orb.n, orb.n) = -orb.T * sys.residual(orb.slice(j), orb.lam);
  return w;
}

Phase phase_condition(const PeriodicOrbit& orb) {
  int n = orb.n, m = orb.m;
  Phase ph{0.0, Vec::Zero(n * m)};
  for (int l = 0; l + 1 < m; ++l) {
    ph.grad.segment(l * n, n) = orb.h(l) * orb.uref.segment(l * n, n);
    ph.phi += ph.grad.segment(l * n, n).dot(orb.slice(l));
  }
  return ph;
}

Arclength arclength_condition(const PeriodicOrbit& orb, const PeriodicOrbit& prev, double ds) {
  int N = orb.n * orb.m;
  double xi = prev.xi, wT = prev.wT;
  const Vec& tau = prev.tau;
  Arclength a;
  a.grad.resize(N + 2);
  a.grad.head(N) = xi * tau.head(N);
  a.grad[N] = (1 - xi) * wT * tau[N];
  a.grad[N + 1] = (1 - xi) * (1 - wT) * tau[N + 1];
  a.psi = a.grad.head(N).dot(orb.U - prev.U) + a.grad[N] * (orb.T - prev.T) + a.grad[N + 1] * (orb.lam - prev.lam) - ds;
  return a;
}

double xi_norm(const Vec& U, double T, double lam, double xi, double wT) {
  return std::sqrt(xi * U.squaredNorm() + (1 - xi) * (wT * T * T + (1 - wT) * lam * lam));
}

double xi_dot(const Vec& a, const Vec& b, int nu, double xi, double wT) {
  return xi * a.head(nu).dot(b.head(nu)) + (1 - xi) * (wT * a[nu] * b[nu] + (1 - wT) * a[nu + 1] * b[nu + 1]);
}

BorderedSolver::BorderedSolver(const SpMat& A, const Mat& B, const Mat& C, const Mat& D)
    : A_(A), B_(B), C_(C), D_(D) {
  A_.makeCompressed();
  lu_.compute(A_);
  if (lu_.info() == Eigen::Success) {
    V_ = lu_.solve(B_);
    Mat Dt = D_ - C_ * V_;
    if (V_.allFinite() && Dt.allFinite()) {
      dlu_ = Dt.partialPivLu();
      block_ok_ = Dt.size() == 0 || dlu_.rcond() > 1e-15;
    }
  }
}

Vec BorderedSolver::once(const Vec& rhs) const {
  int N = (int)A_.rows(), k = (int)B_.cols();
  Vec x1 = lu_.solve(rhs.head(N));
  Vec y2 = dlu_.solve(rhs.tail(k) - C_ * x1);
  Vec x(N + k);
  x.head(N) = x1 - V_ * y2;
  x.tail(k) = y2;
  return x;
}

Vec BorderedSolver::once_full(const Vec& rhs) const {
  if (!full_) {
    int N = (int)A_.rows(), k = (int)B_.cols();
    std::vector<Triplet> tr;
    tr.reserve(A_.nonZeros() + 2 * N * k + k * k);
    for (int c = 0; c < A_.outerSize(); ++c)
      for (SpMat::InnerIterator it(A_, c); it; ++it) tr.emplace_back(it.row(), it.col(), it.value());
    for (int j = 0; j < k; ++j)
      for (int i = 0; i < N; ++i) {
        if (B_(i, j) != 0) tr.emplace_back(i, N + j, B_(i, j));
        if (C_(j, i) != 0) tr.emplace_back(N + j, i, C_(j, i));
      }
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        if (D_(i, j) != 0) tr.emplace_back(N + i, N + j, D_(i, j));
    SpMat F(N + k, N + k);
    F.setFromTriplets(tr.begin(), tr.end());
    F.makeCompressed();
    full_ = std::make_shared<Eigen::SparseLU<SpMat>>();
    full_->compute(F);
    if (full_->info() != Eigen::Success) throw SolverError("bordered solve: full matrix is singular");
  }
  return full_->solve(rhs);
}

Vec BorderedSolver::apply(const Vec& x) const {
  int N = (int)A_.rows(), k = (int)B_.cols();
  Vec y(N + k);
  y.head(N) = A_ * x.head(N) + B_ * x.tail(k);
  y.tail(k) = C_ * x.head(N) + D_ * x.tail(k);
  return y;
}

Vec BorderedSolver::refine(Vec x, const Vec& rhs, double bn, double tol, int passes, bool full, double* rel) const {
  for (int p = 0;; ++p) {
    Vec r = apply(x) - rhs;
    *rel = r.lpNorm<Eigen::Infinity>() / bn;
    if (!std::isfinite(*rel) || *rel <= tol || p == passes) return x;
    x -= full ? once_full(r) : once(r);
  }
}

Vec BorderedSolver::solve(const Vec& rhs, double tol, int passes, double* final_res) const {
  double bn = rhs.lpNorm<Eigen::Infinity>();
  if (bn == 0) {
    if (final_res) *final_res = 0;
    return Vec::Zero(rhs.size());
  }
  double rel = HUGE_VAL;
  Vec x;
  if (block_ok_ && !full_) {
    x = refine(once(rhs), rhs, bn, tol, passes, false, &rel);
    if (!x.allFinite()) rel = HUGE_VAL;
  }
  if (!(rel <= tol)) x = refine(once_full(rhs), rhs, bn, tol, passes, true, &rel);
  if (!std::isfinite(rel)) throw SolverError("bordered solve: non-finite residual");
  if (final_res) *final_res = rel;
  else if (rel > tol)
    throw SolverError("bordered solve: refinement stagnated at relative residual " + std::to_string(rel));
  return x;
}

namespace {

// solve with refinement; a residual between tol and 1e-6 is tolerated inside Newton loops
Vec robust_solve(const BorderedSolver& bs, const Vec& rhs, const PoSettings& s) {
  double res = 0;
  Vec x = bs.solve(rhs, s.bordered_tol, s.refine_passes, &res);
  if (res > 1e-6) throw SolverError("bordered solve: refinement stagnated at relative residual " + std::to_string(res));
  return x;
}

struct Extended {
  PoJacobian pj;
  Mat B, C, D;
};

Extended arclength_system(const System& sys, const PeriodicOrbit& orb, const PeriodicOrbit& prev, double ds) {
  int N = orb.n * orb.m;
  Extended e;
  e.pj = po_jacobian(sys, orb, true);
  Phase ph = phase_condition(orb);
  Arclength al = arclength_condition(orb, prev, ds);
  e.B.resize(N, 2);
  e.B.col(0) = e.pj.dT;
  e.B.col(1) = e.pj.dlam;
  e.C.resize(2, N);
  e.C.row(0) = ph.grad.transpose();
  e.C.row(1) = al.grad.head(N).transpose();
  e.D = Mat::Zero(2, 2);
  e.D(1, 0) = al.grad[N];
  e.D(1, 1) = al.grad[N + 1];
  return e;
}

}  // namespace

PeriodicOrbit newton_po(const System& sys, const PeriodicOrbit& guess, const PeriodicOrbit& prev, double ds,
                        const PoSettings& s, StepStats* stats) {
  PeriodicOrbit orb = guess;
  orb.uref = prev.uref;
  orb.tau = prev.tau;
  orb.xi = prev.xi;
  orb.wT = prev.wT;
  int N = orb.n * orb.m;
  for (int it = 0;; ++it) {
    Vec H(N + 2);
    H.head(N) = po_residual(sys, orb);
    H[N] = phase_condition(orb).phi;
    H[N + 1] = arclength_condition(orb, prev, ds).psi;
    double res = H.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(res)) throw SolverError("orbit Newton: non-finite residual");
    if (res <= s.tol) {
      if (!(orb.T > 0)) throw SolverError("orbit Newton: non-positive period");
      orb.slice(orb.m - 1) = orb.slice(0);
      if (stats) *stats = {it, res};
      return orb;
    }
    if (it >= s.maxit) throw SolverError("orbit Newton: no convergence, residual " + std::to_string(res));
    Extended e = arclength_system(sys, orb, prev, ds);
    BorderedSolver bs(e.pj.A, e.B, e.C, e.D);
    Vec dx = robust_solve(bs, H, s);
    orb.U -= dx.head(N);
    orb.T -= dx[N];
    orb.lam -= dx[N + 1];
    if (!(orb.T > 0)) throw SolverError("orbit Newton: period became non-positive");
  }
}

Vec new_tangent(const System& sys, const PeriodicOrbit& orb, const PoSettings& s) {
  int N = orb.n * orb.m;
  Extended e = arclength_system(sys, orb, orb, 0.0);
  BorderedSolver bs(e.pj.A, e.B, e.C, e.D);
  Vec rhs = Vec::Zero(N + 2);
  rhs[N + 1] = 1;
  Vec tau = robust_solve(bs, rhs, s);
  tau /= xi_norm(tau.head(N), tau[N], tau[N + 1], orb.xi, orb.wT);
  if (orb.tau.size() == N + 2 && xi_dot(orb.tau, tau, N, orb.xi, orb.wT) < 0) tau = -tau;
  return tau;
}

PeriodicOrbit correct_fixed_lambda(const System& sys, const PeriodicOrbit& guess, PhaseMode mode,
                                   const PoSettings& s, StepStats* stats) {
  PeriodicOrbit orb = guess;
  int n = orb.n, N = orb.n * orb.m;
  auto phase = [&](double& phi, Vec& grad) {
    if (mode == PhaseMode::Integral) {
      Phase ph = phase_condition(orb);
      phi = ph.phi;
      grad = ph.grad;
    } else {
      grad = Vec::Zero(N);
      grad.head(n) = orb.uref.head(n);
      phi = grad.head(n).dot(orb.slice(0));
    }
  };
  for (int it = 0;; ++it) {
    Vec H(N + 1), grad;
    H.head(N) = po_residual(sys, orb);
    phase(H[N], grad);
    double res = H.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(res)) throw SolverError("fixed-parameter corrector: non-finite residual");
    if (res <= s.tol) {
      if (!(orb.T > 0)) throw SolverError("fixed-parameter corrector: non-positive period");
      orb.slice(orb.m - 1) = orb.slice(0);
      if (stats) *stats = {it, res};
      return orb;
    }
    if (it >= s.maxit) throw SolverError("fixed-parameter corrector: no convergence, residual " + std::to_string(res));
    PoJacobian pj = po_jacobian(sys, orb, false);
    Mat B = pj.dT;
    Mat C = grad.transpose();
    Mat D = Mat::Zero(1, 1);
    BorderedSolver bs(pj.A, B, C, D);
    Vec dx = robust_solve(bs, H, s);
    orb.U -= dx.head(N);
    orb.T -= dx[N];
    if (!(orb.T > 0)) throw SolverError("fixed-parameter corrector: period became non-positive");
  }
}

PeriodicOrbit natural_corrector(const System& sys, const PeriodicOrbit& guess, const PoSettings& s,
                                StepStats* stats) {
  return correct_fixed_lambda(sys, guess, PhaseMode::Point, s, stats);
}

PeriodicOrbit interpolate_orbit(const PeriodicOrbit& orb, const Vec& t_new) {
  PeriodicOrbit o = orb;
  int n = orb.n, mn = (int)t_new.size();
  o.m = mn;
  o.t = t_new;
  o.U.resize(n * mn);
  bool has_tau = orb.tau.size() == (long)n * orb.m + 2;
  bool has_ref = orb.uref.size() == (long)n * orb.m;
  if (has_tau) {
    o.tau.resize(n * mn + 2);
    o.tau[n * mn] = orb.tau[n * orb.m];
    o.tau[n * mn + 1] = orb.tau[n * orb.m + 1];
  }
  if (has_ref) o.uref.resize(n * mn);
  int k = 0;
  for (int j = 0; j < mn; ++j) {
    double t = t_new[j];
    while (k + 2 < orb.m && orb.t[k + 1] < t) ++k;
    double w = (t - orb.t[k]) / orb.h(k);
    w = std::clamp(w, 0.0, 1.0);
    o.U.segment(j * n, n) = (1 - w) * orb.slice(k) + w * orb.slice(k + 1);
    if (has_tau) o.tau.segment(j * n, n) = (1 - w) * orb.tau.segment(k * n, n) + w * orb.tau.segment((k + 1) * n, n);
    if (has_ref) o.uref.segment(j * n, n) = (1 - w) * orb.uref.segment(k * n, n) + w * orb.uref.segment((k + 1) * n, n);
  }
  o.xi = default_xi(mn, n);
  return o;
}

PeriodicOrbit refine_tmesh(const System& sys, const PeriodicOrbit& orb, int m_new, const PoSettings& s,
                           std::string* warning) {
  if (m_new <= orb.m) return orb;
  struct Iv {
    double w;
    double a, b;
    bool operator<(const Iv& o) const { return w < o.w; }
  };
  std::priority_queue<Iv> q;
  for (int l = 0; l + 1 < orb.m; ++l)
    q.push({(orb.slice(l + 1) - orb.slice(l)).norm(), orb.t[l], orb.t[l + 1]});
  for (int k = orb.m; k < m_new; ++k) {
    Iv iv = q.top();
    q.pop();
    double mid = 0.5 * (iv.a + iv.b);
    q.push({iv.w / 2, iv.a, mid});
    q.push({iv.w / 2, mid, iv.b});
  }
  std::vector<double> pts;
  while (!q.empty()) {
    pts.push_back(q.top().a);
    q.pop();
  }
  pts.push_back(1.0);
  std::sort(pts.begin(), pts.end());
  Vec t_new = Eigen::Map<Vec>(pts.data(), (long)pts.size());
  PeriodicOrbit fine = interpolate_orbit(orb, t_new);
  fine.uref = phase_weights(sys, fine);
  try {
    PeriodicOrbit out = correct_fixed_lambda(sys, fine, PhaseMode::Integral, s);
    out.uref = phase_weights(sys, out);
    return out;
  } catch (const Error& e) {
    if (warning) *warning = std::string("mesh refinement correction failed: ") + e.what();
    return orb;
  }
}

double branch_norm(const System& sys, const PeriodicOrbit& orb) {
  const SpMat& M = sys.mass();
  double acc = 0;
  std::vector<double> q(orb.m);
  for (int j = 0; j < orb.m; ++j) q[j] = orb.slice(j).dot(M * orb.slice(j));
  for (int l = 0; l + 1 < orb.m; ++l) acc += 0.5 * orb.h(l) * (q[l] + q[l + 1]);
  return std::sqrt(std::max(acc, 0.0) / sys.measure());
}

std::vector<PoStep> continue_po(const System& sys, const PeriodicOrbit& start, int nsteps, PoSettings s,
                                const std::function<bool(const PoStep&)>& on_step) {
  std::vector<PoStep> out;
  PeriodicOrbit cur = start;
  int N = cur.n * cur.m;
  if (cur.xi <= 0) cur.xi = s.xi > 0 ? s.xi : default_xi(cur.m, cur.n);
  if (cur.tau.size() != N + 2) throw ConfigError("continuation start needs a tangent");
  double ds = s.ds;
  int fast = 0;
  for (int step = 1; step <= nsteps; ++step) {
    PeriodicOrbit next;
    StepStats st;
    bool ok = false;
    std::string err;
    while (!ok) {
      PeriodicOrbit guess = cur;
      guess.U += ds * cur.tau.head(N);
      guess.T += ds * cur.tau[N];
      guess.lam += ds * cur.tau[N + 1];
      try {
        next = newton_po(sys, guess, cur, ds, s, &st);
        ok = true;
      } catch (const Error& e) {
        err = e.what();
        ds /= 2;
        fast = 0;
        if (ds < s.dsmin) break;
      }
    }
    if (!ok) {
      if (!out.empty()) out.back().msg += (out.back().msg.empty() ? "" : "; ") + std::string("stopped: ") + err;
      break;
    }
    Vec dU(N + 2);
    dU.head(N) = next.U - cur.U;
    dU[N] = next.T - cur.T;
    dU[N + 1] = next.lam - cur.lam;
    PoStep ps;
    ps.projected_step = xi_dot(cur.tau, dU, N, cur.xi, cur.wT);
    next.uref = cur.uref;
    next.tau = cur.tau;
    try {
      next.tau = new_tangent(sys, next, s);
    } catch (const Error& e) {
      if (!out.empty()) out.back().msg += std::string("stopped: tangent failed: ") + e.what();
      break;
    }
    next.uref = phase_weights(sys, next);
    ps.orb = next;
    ps.step = step;
    ps.iterations = st.iterations;
    ps.ds = ds;
    ps.norm = branch_norm(sys, next);
    out.push_back(ps);
    cur = next;
    if (st.iterations <= 2) {
      if (++fast >= 2) {
        ds = std::min(ds * s.grow, s.dsmax);
        fast = 0;
      }
    } else {
      fast = 0;
    }
    if (on_step && !on_step(out.back())) break;
  }
  return out;
}

std::vector<PoStep> continue_po_natural(const System& sys, const PeriodicOrbit& start, int nsteps, double dlam,
                                        const PoSettings& s, std::string* stop_reason) {
  std::vector<PoStep> out;
  PeriodicOrbit cur = start;
  if (cur.uref.size() != (long)cur.n * cur.m || cur.uref.norm() == 0) cur.uref = phase_weights(sys, cur);
  for (int step = 1; step <= nsteps; ++step) {
    PeriodicOrbit guess = cur;
    guess.lam += dlam;
    StepStats st;
    try {
      PeriodicOrbit next = natural_corrector(sys, guess, s, &st);
      next.uref = phase_weights(sys, next);
      PoStep ps;
      ps.orb = next;
      ps.step = step;
      ps.iterations = st.iterations;
      ps.ds = dlam;
      ps.norm = branch_norm(sys, next);
      out.push_back(ps);
      cur = next;
    } catch (const Error& e) {
      if (stop_reason) *stop_reason = std::string("natural corrector failed at lambda=") + std::to_string(guess.lam) + ": " + e.what();
      break;
    }
  }
  return out;
}

}  // namespace pdehopf
