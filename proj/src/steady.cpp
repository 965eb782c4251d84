#include "pdehopf/steady.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/SparseLU>

#include "pdehopf/eigs.hpp"

namespace pdehopf {

void DetectorState::validate() const {
  if (auto_shifts && neig.empty()) throw ConfigError("detector: auto shifts need n_eig for the zero shift");
  if (!auto_shifts && (shifts.empty() || shifts.size() != neig.size()))
    throw ConfigError("detector: need one n_eig per shift");
  for (size_t i = 0; i < shifts.size(); ++i) {
    if (shifts[i] < 0) throw ConfigError("detector: shifts must be >= 0");
    if (neig[i] < 1) throw ConfigError("detector: n_eig must be >= 1");
    for (size_t j = 0; j < i; ++j)
      if (shifts[i] == shifts[j]) throw ConfigError("detector: shifts must be distinct");
  }
  if (!(mu2 < mu1) || mu2 <= 0) throw ConfigError("detector: need 0 < mu2 < mu1");
  if (omega_max <= 0 || n_samples < 3) throw ConfigError("detector: need omega_max > 0 and n_samples >= 3");
}

double xi_stationary(int n) { return 1.0 / n; }

int det_sign(const SpMat& A) {
  SpMat B = A;
  B.makeCompressed();
  Eigen::SparseLU<SpMat> lu;
  lu.compute(B);
  if (lu.info() != Eigen::Success) return 0;
  return (int)lu.signDeterminant();
}

namespace {

SpMat extended(const SpMat& Gu, const Vec& Gl, const Vec& tu, double tl, double xi) {
  int n = (int)Gu.rows();
  std::vector<Triplet> tr;
  tr.reserve(Gu.nonZeros() + 2 * n + 1);
  for (int k = 0; k < Gu.outerSize(); ++k)
    for (SpMat::InnerIterator it(Gu, k); it; ++it) tr.emplace_back(it.row(), it.col(), it.value());
  for (int i = 0; i < n; ++i) {
    if (Gl[i] != 0) tr.emplace_back(i, n, Gl[i]);
    if (tu[i] != 0) tr.emplace_back(n, i, xi * tu[i]);
  }
  tr.emplace_back(n, n, (1 - xi) * tl);
  SpMat E(n + 1, n + 1);
  E.setFromTriplets(tr.begin(), tr.end());
  E.makeCompressed();
  return E;
}

double xi_norm_st(const Vec& t, double xi) {
  int n = (int)t.size() - 1;
  return std::sqrt(xi * t.head(n).squaredNorm() + (1 - xi) * t[n] * t[n]);
}

// tangent from the extended matrix with border row ref; returns det sign through sign
Vec tangent_from(const SpMat& Gu, const Vec& Gl, const Vec& ref, double xi, int* sign) {
  int n = (int)Gu.rows();
  SpMat E = extended(Gu, Gl, ref.head(n), ref[n], xi);
  Eigen::SparseLU<SpMat> lu;
  lu.compute(E);
  if (lu.info() != Eigen::Success) throw SolverError("tangent: extended matrix singular");
  Vec rhs = Vec::Zero(n + 1);
  rhs[n] = 1;
  Vec t = lu.solve(rhs);
  if (sign) *sign = (int)lu.signDeterminant();
  return t / xi_norm_st(t, xi);
}

double xi_of(const SteadySettings& s, int n) { return s.xi > 0 ? s.xi : xi_stationary(n); }

}  // namespace

Vec newton_fixed(const System& sys, const Vec& u0, double lam, double tol, int maxit) {
  Vec u = u0;
  for (int it = 0; it <= maxit; ++it) {
    Vec G = sys.residual(u, lam);
    if (G.lpNorm<Eigen::Infinity>() < tol) return u;
    if (it == maxit) break;
    SpMat J = sys.jacobian(u, lam);
    J.makeCompressed();
    Eigen::SparseLU<SpMat> lu(J);
    if (lu.info() != Eigen::Success) throw SolverError("Newton: singular Jacobian");
    u -= lu.solve(G);
  }
  throw SolverError("Newton: no convergence at fixed parameter");
}

Vec stationary_tangent(const System& sys, const Vec& u, double lam, const Vec& ref, double xi, int dir) {
  int n = sys.size();
  Vec r = ref;
  if (r.size() == 0) {
    r = Vec::Zero(n + 1);
    r[n] = dir >= 0 ? 1.0 : -1.0;
    r /= std::sqrt(1 - xi);
  }
  return tangent_from(sys.jacobian(u, lam), sys.dlam(u, lam), r, xi, nullptr);
}

StationaryPoint cont_step_stationary(const System& sys, const StationaryPoint& pt, double ds, const SteadySettings& s,
                                     int* iterations) {
  int n = sys.size();
  double xi = xi_of(s, n);
  Vec tu = pt.tau.head(n);
  double tl = pt.tau[n];
  Vec u = pt.u + ds * tu;
  double lam = pt.lam + ds * tl;
  for (int it = 0; it <= s.maxit; ++it) {
    Vec G = sys.residual(u, lam);
    double p = xi * tu.dot(u - pt.u) + (1 - xi) * tl * (lam - pt.lam) - ds;
    if (G.lpNorm<Eigen::Infinity>() < s.tol && std::abs(p) < s.tol) {
      StationaryPoint q;
      q.u = u;
      q.lam = lam;
      q.tau = tangent_from(sys.jacobian(u, lam), sys.dlam(u, lam), pt.tau, xi, &q.det_sign);
      q.step = pt.step + 1;
      if (iterations) *iterations = it;
      return q;
    }
    if (it == s.maxit) break;
    SpMat E = extended(sys.jacobian(u, lam), sys.dlam(u, lam), tu, tl, xi);
    Eigen::SparseLU<SpMat> lu;
    lu.compute(E);
    if (lu.info() != Eigen::Success) throw SolverError("stationary step: singular extended matrix");
    Vec rhs(n + 1);
    rhs.head(n) = G;
    rhs[n] = p;
    Vec d = lu.solve(rhs);
    if (!d.allFinite()) throw SolverError("stationary step: non-finite update");
    u -= d.head(n);
    lam -= d[n];
  }
  throw SolverError("stationary step: no convergence within " + std::to_string(s.maxit) + " iterations");
}

std::vector<CVec> default_probes(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> N;
  CVec b(n);
  for (int i = 0; i < n; ++i) b[i] = N(rng);
  b.normalize();
  CVec c = CVec::Constant(n, 1.0 / std::sqrt(double(n)));
  return {b, c};
}

ResonanceResult resonance_scan(const SpMat& Gu, const SpMat& M, double omega_max, int n_samples,
                               const std::vector<CVec>& probes, int refine_rounds) {
  if (omega_max <= 0) throw ConfigError("resonance scan: omega_max must be positive");
  ResonanceResult res;
  CSpMat Gc = Gu.cast<cplx>(), Mc = M.cast<cplx>();
  auto height = [&](double w, bool& ok) {
    CSpMat A = Gc - cplx(0, w) * Mc;
    A.makeCompressed();
    Eigen::SparseLU<CSpMat> lu;
    lu.compute(A);
    ok = lu.info() == Eigen::Success;
    if (!ok) return 0.0;
    double h = 0;
    for (const CVec& b : probes) h += std::abs(b.dot(CVec(lu.solve(b))));
    ok = std::isfinite(h);
    return h;
  };
  double delta = omega_max / n_samples;
  std::vector<double> w(n_samples), h(n_samples);
  std::vector<bool> good(n_samples);
  for (int k = 0; k < n_samples; ++k) {
    bool ok;
    w[k] = (k + 1) * delta;
    h[k] = height(w[k], ok);
    good[k] = ok;
    if (!ok) res.warnings.push_back("resonance scan: singular solve at omega=" + std::to_string(w[k]));
  }
  std::vector<std::pair<double, double>> peaks;
  for (int k = 0; k < n_samples; ++k) {
    if (!good[k]) continue;
    bool left = k == 0 || !good[k - 1] || h[k] >= h[k - 1];
    bool right = k + 1 < n_samples && (!good[k + 1] || h[k] > h[k + 1]);
    if (!(left && right)) continue;
    double wb = w[k], hb = h[k], step = delta;
    for (int r = 0; r < refine_rounds; ++r) {
      step /= 2;
      double c = wb;
      for (double cand : {c - step, c + step}) {
        bool ok;
        double hc = height(cand, ok);
        if (ok && hc > hb) {
          hb = hc;
          wb = cand;
        }
      }
    }
    peaks.emplace_back(hb, wb);
  }
  std::sort(peaks.begin(), peaks.end(), [](auto& a, auto& b) { return a.first > b.first; });
  for (auto& [hh, ww] : peaks) {
    res.omegas.push_back(ww);
    res.heights.push_back(hh);
  }
  return res;
}

namespace {

int closed_count(const CVec& S) {
  int c = 0;
  for (int i = 0; i < S.size(); ++i) {
    if (S[i].real() >= 0) continue;
    double scale = std::max(1.0, std::abs(S[i]));
    if (std::abs(S[i].imag()) <= 1e-10 * scale) {
      ++c;
      continue;
    }
    bool partner = false;
    for (int j = 0; j < S.size(); ++j)
      if (j != i && std::abs(S[j] - std::conj(S[i])) <= 1e-8 * scale) partner = true;
    c += partner ? 1 : 2;
  }
  return c;
}

CVec nearest(const CVec& all, cplx sigma, int k) {
  std::vector<int> idx(all.size());
  for (int i = 0; i < (int)idx.size(); ++i) idx[i] = i;
  k = std::min<int>(k, (int)idx.size());
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(),
                    [&](int a, int b) { return std::abs(all[a] - sigma) < std::abs(all[b] - sigma); });
  CVec out(k);
  for (int i = 0; i < k; ++i) out[i] = all[idx[i]];
  return out;
}

void count_shift(const System& sys, const SpMat& Gu, const CVec* all, StationaryPoint& pt, const DetectorState& det,
                 size_t j) {
  cplx sigma(0, det.shifts[j]);
  CVec S = all ? nearest(*all, sigma, det.neig[j])
               : eigs_near(Gu, sys.mass(), sigma, det.neig[j], false, det.dense_limit).values;
  pt.near[j] = S;
  pt.counts[j] = closed_count(S);
}

double min_abs_real(const CVec& v, cplx* which = nullptr) {
  double best = HUGE_VAL;
  for (int i = 0; i < v.size(); ++i)
    if (std::abs(v[i].real()) < best) {
      best = std::abs(v[i].real());
      if (which) *which = v[i];
    }
  return best;
}

}  // namespace

void count_unstable(const System& sys, StationaryPoint& pt, const DetectorState& det) {
  SpMat Gu = sys.jacobian(pt.u, pt.lam);
  pt.counts.assign(det.shifts.size(), 0);
  pt.near.assign(det.shifts.size(), CVec());
  CVec all;
  bool dense = sys.size() <= det.dense_limit;
  if (dense) all = eigs_dense(Gu, sys.mass(), false).values;
  for (size_t j = 0; j < det.shifts.size(); ++j) count_shift(sys, Gu, dense ? &all : nullptr, pt, det, j);
  if (dense) {
    pt.stable = true;
    for (int i = 0; i < all.size(); ++i)
      if (all[i].real() < 0) pt.stable = false;
  } else {
    pt.stable = std::all_of(pt.counts.begin(), pt.counts.end(), [](int c) { return c == 0; });
  }
}

std::vector<SpecialPoint> detect_and_localize(const System& sys, const StationaryPoint& a, const StationaryPoint& b,
                                              double ds_ab, const DetectorState& det, const SteadySettings& s,
                                              std::vector<std::string>* log) {
  std::vector<SpecialPoint> out;
  auto note = [&](const std::string& m) {
    if (log) log->push_back(m);
  };
  for (size_t j = 0; j < det.shifts.size() && j < a.counts.size() && j < b.counts.size(); ++j) {
    int change = b.counts[j] - a.counts[j];
    if (change == 0) continue;
    std::string tag = "shift " + std::to_string(det.shifts[j]) + " between lambda " + std::to_string(a.lam) +
                      " and " + std::to_string(b.lam);
    if (std::abs(change) > 2) note("count change " + std::to_string(change) + " at " + tag + ": multiple crossing");
    if (std::min(min_abs_real(a.near[j]), min_abs_real(b.near[j])) > det.mu1) {
      note("candidate at " + tag + " rejected by gate mu1");
      continue;
    }
    DetectorState one = det;
    one.shifts = {det.shifts[j]};
    one.neig = {det.neig[j]};
    double slo = 0, shi = ds_ab;
    int ca = a.counts[j];
    bool accepted = false;
    for (int it = 0; it < det.max_bisect; ++it) {
      double sm = 0.5 * (slo + shi);
      StationaryPoint mid = cont_step_stationary(sys, a, sm, s);
      mid.counts.assign(1, 0);
      mid.near.assign(1, CVec());
      SpMat Gm = sys.jacobian(mid.u, mid.lam);
      if (sys.size() <= det.dense_limit) {
        CVec all = eigs_dense(Gm, sys.mass(), false).values;
        count_shift(sys, Gm, &all, mid, one, 0);
      } else {
        count_shift(sys, Gm, nullptr, mid, one, 0);
      }
      (mid.counts[0] == ca ? slo : shi) = sm;
      cplx crit;
      if (min_abs_real(mid.near[0], &crit) < det.mu2) {
        SpecialPoint sp;
        double scale = std::max(1.0, std::abs(crit));
        sp.type = std::abs(crit.imag()) <= 1e-8 * scale ? SpecialType::BP : SpecialType::HBP;
        sp.lam = mid.lam;
        sp.omega = std::abs(crit.imag());
        sp.mu = crit;
        sp.u = mid.u;
        sp.tau = mid.tau;
        sp.step = b.step;
        sp.shift = (int)j;
        out.push_back(sp);
        note(std::string(sp.type == SpecialType::BP ? "BP" : "HBP") + " at lambda=" + std::to_string(sp.lam) +
             " omega=" + std::to_string(sp.omega) + " (" + tag + ")");
        accepted = true;
        break;
      }
    }
    if (!accepted) note("candidate at " + tag + " dropped: bisection did not reach mu2");
  }
  return out;
}

StationaryPoint initial_point(const System& sys, const Vec& u0, double lam0, const SteadySettings& s) {
  StationaryPoint p;
  p.u = newton_fixed(sys, u0, lam0, s.tol, s.maxit);
  p.lam = lam0;
  int n = sys.size();
  double xi = xi_of(s, n);
  Vec r = Vec::Zero(n + 1);
  r[n] = (s.dir >= 0 ? 1.0 : -1.0) / std::sqrt(1 - xi);
  p.tau = tangent_from(sys.jacobian(p.u, lam0), sys.dlam(p.u, lam0), r, xi, &p.det_sign);
  return p;
}

namespace {

void refresh_shifts(const System& sys, const StationaryPoint& p, DetectorState& det, const std::vector<int>& tmpl,
                    std::vector<std::string>& log) {
  auto scan = resonance_scan(sys.jacobian(p.u, p.lam), sys.mass(), det.omega_max, det.n_samples,
                             default_probes(sys.size(), det.seed));
  for (auto& w : scan.warnings) log.push_back(w);
  int want = std::max<int>(1, (int)tmpl.size() - 1);
  int nz = tmpl.size() > 1 ? tmpl[1] : tmpl[0];
  std::vector<double> shifts = {0.0};
  std::vector<int> neig = {tmpl[0]};
  for (size_t i = 0; i < scan.omegas.size() && (int)shifts.size() <= want; ++i) {
    shifts.push_back(scan.omegas[i]);
    neig.push_back(nz);
  }
  det.shifts = shifts;
  det.neig = neig;
  std::string m = "shifts:";
  for (double w : shifts) m += " " + std::to_string(w);
  log.push_back(m);
}

bool duplicate(const std::vector<SpecialPoint>& have, const SpecialPoint& q) {
  for (const auto& p : have)
    if (std::abs(p.lam - q.lam) < 1e-4 && std::abs(p.omega - q.omega) < 1e-3) return true;
  return false;
}

}  // namespace

SteadyBranch continue_steady(const System& sys, const Vec& u0, double lam0, const SteadySettings& s,
                             DetectorState det, const std::function<void(const StationaryPoint&)>& on_step) {
  SteadyBranch br;
  StationaryPoint p = initial_point(sys, u0, lam0, s);
  det.validate();
  const std::vector<int> tmpl = det.neig;
  if (det.auto_shifts) refresh_shifts(sys, p, det, tmpl, br.log);
  det.validate();
  br.shift_history.push_back(det.shifts);
  if (s.detect) count_unstable(sys, p, det);
  br.points.push_back(p);
  if (on_step) on_step(p);
  double ds = s.ds;
  for (int step = 1; step <= s.nsteps; ++step) {
    StationaryPoint q;
    int its = 0;
    while (true) {
      try {
        q = cont_step_stationary(sys, p, ds, s, &its);
        break;
      } catch (const SolverError& e) {
        ds /= 2;
        if (ds < s.dsmin) {
          br.log.push_back(std::string("stopped: ") + e.what() + " with ds below minimum");
          return br;
        }
      }
    }
    q.step = step;
    if (s.detect) {
      count_unstable(sys, q, det);
      for (auto& sp : detect_and_localize(sys, p, q, ds, det, s, &br.log))
        if (!duplicate(br.special, sp)) br.special.push_back(sp);
    }
    br.points.push_back(q);
    if (on_step) on_step(q);
    p = q;
    if (its <= 2) ds = std::min(ds * s.grow, s.dsmax);
    if (p.lam < s.lam_min || p.lam > s.lam_max) {
      br.log.push_back("stopped: parameter left the range");
      break;
    }
    if (s.detect && det.auto_shifts && det.refresh > 0 && step % det.refresh == 0) {
      refresh_shifts(sys, p, det, tmpl, br.log);
      br.shift_history.push_back(det.shifts);
      count_unstable(sys, br.points.back(), det);
      p = br.points.back();
    }
  }
  return br;
}

}  // namespace pdehopf
