#include "pdehopf/hopf.hpp"

#include <cmath>

#include <Eigen/SparseLU>

#include "pdehopf/eigs.hpp"
#include "pdehopf/steady.hpp"

namespace pdehopf {

namespace {

void canonical_phase(CVec& v) {
  Eigen::Index k;
  v.cwiseAbs().maxCoeff(&k);
  v *= std::abs(v[k]) / v[k];
  v[k] = std::abs(v[k]);
}

double mass_norm(const SpMat& M, const CVec& v) { return std::sqrt(std::abs(v.dot(M.cast<cplx>() * v))); }

double step_for(const Vec& u, double h) { return h * std::max(1.0, u.lpNorm<Eigen::Infinity>()); }

// B(a, z) for real a
CVec dir1(const System& sys, const Vec& u, double lam, const Vec& a, const CVec& z, double h0) {
  double na = a.lpNorm<Eigen::Infinity>();
  if (na == 0) return CVec::Zero(u.size());
  Vec e = a / na;
  double h = step_for(u, h0);
  SpMat D = sys.jacobian(u + h * e, lam) - sys.jacobian(u - h * e, lam);
  return (D.cast<cplx>() * z) * (na / (2 * h));
}

// C(a, c, z) for real a, c
CVec dir2(const System& sys, const Vec& u, double lam, const Vec& a, const Vec& c, const CVec& z, double h0) {
  double na = a.lpNorm<Eigen::Infinity>(), nc = c.lpNorm<Eigen::Infinity>();
  if (na == 0 || nc == 0) return CVec::Zero(u.size());
  Vec e = a / na, f = c / nc;
  double h = step_for(u, h0);
  SpMat D = sys.jacobian(u + h * e + h * f, lam) - sys.jacobian(u + h * e - h * f, lam) -
            sys.jacobian(u - h * e + h * f, lam) + sys.jacobian(u - h * e - h * f, lam);
  return (D.cast<cplx>() * z) * (na * nc / (4 * h * h));
}

const cplx I(0, 1);

CVec solve_complex(const SpMat& A, const SpMat& M, cplx shift, const CVec& b) {
  CSpMat K = (A.cast<cplx>() + shift * M.cast<cplx>());
  K.makeCompressed();
  Eigen::SparseLU<CSpMat> lu;
  lu.compute(K);
  if (lu.info() != Eigen::Success) throw SolverError("Hopf: singular linear system in the cubic coefficient");
  return lu.solve(b);
}

}  // namespace

HopfPoint hopf_eigenpair(const System& sys, const Vec& u0, double lam, double omega_guess, const HopfSettings& hs) {
  SpMat Gu = sys.jacobian(u0, lam);
  const SpMat& M = sys.mass();
  int n = sys.size();
  cplx sigma(0, std::abs(omega_guess));
  EigPairs ep = eigs_near(Gu, M, sigma, std::min(n, 4), true, hs.dense_limit);
  cplx mu = ep.values[0];
  CVec psi = ep.vectors.col(0);
  if (mu.imag() < 0) {
    mu = std::conj(mu);
    psi = psi.conjugate().eval();
  }
  if (!(mu.imag() > 0)) throw SolverError("not a Hopf point: nearest eigenvalue is real");
  if (std::abs(mu.real()) >= hs.mu2)
    throw SolverError("not a Hopf point: nearest eigenvalue has |Re mu| = " + std::to_string(std::abs(mu.real())));

  HopfPoint hp;
  hp.u0 = u0;
  hp.lam = lam;
  hp.residual = eig_residual(Gu, M, mu, psi);
  for (int pass = 0; pass < 3 && hp.residual > 1e-10; ++pass) {
    CVec Mpsi = M.cast<cplx>() * psi;
    psi = solve_complex(Gu, M, -mu, Mpsi);
    psi /= psi.norm();
    mu = psi.dot(Gu.cast<cplx>() * psi) / psi.dot(M.cast<cplx>() * psi);
    hp.residual = eig_residual(Gu, M, mu, psi);
  }
  psi /= mass_norm(M, psi);
  canonical_phase(psi);
  hp.mu = mu;
  hp.omega = mu.imag();
  hp.psi = psi;
  return hp;
}

CVec form_b(const System& sys, const Vec& u, double lam, const CVec& x, const CVec& y, double h) {
  return dir1(sys, u, lam, x.real(), y, h) + I * dir1(sys, u, lam, x.imag(), y, h);
}

CVec form_c(const System& sys, const Vec& u, double lam, const CVec& x, const CVec& y, const CVec& z, double h) {
  Vec a = x.real(), b = x.imag(), c = y.real(), d = y.imag();
  return dir2(sys, u, lam, a, c, z, h) - dir2(sys, u, lam, b, d, z, h) +
         I * (dir2(sys, u, lam, a, d, z, h) + dir2(sys, u, lam, b, c, z, h));
}

double cubic_coefficient(const System& sys, const HopfPoint& hp, const HopfSettings& hs) {
  const Vec& u = hp.u0;
  double lam = hp.lam, om = hp.omega;
  SpMat Gu = sys.jacobian(u, lam);
  const SpMat& M = sys.mass();
  CSpMat Mc = M.cast<cplx>();
  CVec q = hp.psi.conjugate();
  CVec qb = hp.psi;

  // p^H is a left eigenvector for the eigenvalue of q
  SpMat GuT = Gu.transpose();
  EigPairs ep = eigs_near(GuT, M, hp.mu, std::min(sys.size(), 4), true, hs.dense_limit);
  CVec p = ep.vectors.col(0);
  cplx pq = p.dot(Mc * q);
  if (std::abs(pq) < 1e-14) {
    p = p.conjugate().eval();
    pq = p.dot(Mc * q);
  }
  if (std::abs(pq) < 1e-14) throw SolverError("Hopf: adjoint eigenvector orthogonal to the critical mode");
  p /= std::conj(pq);

  double h = hs.fd_form;
  cplx t1 = p.dot(form_c(sys, u, lam, q, q, qb, h));
  CVec x1 = solve_complex(Gu, M, 0.0, form_b(sys, u, lam, q, qb, h));
  cplx t2 = p.dot(form_b(sys, u, lam, q, x1, h));
  CVec x2 = solve_complex(Gu, M, 2.0 * I * om, form_b(sys, u, lam, q, q, h));
  cplx t3 = p.dot(form_b(sys, u, lam, qb, x2, h));
  return 0.5 * (-t1 + 2.0 * t2 + t3).real();
}

double eigen_drift(const System& sys, const HopfPoint& hp, const HopfSettings& hs) {
  double dl = hs.fd_lam * std::max(1.0, std::abs(hp.lam));
  SpMat Gu = sys.jacobian(hp.u0, hp.lam);
  Eigen::SparseLU<SpMat> lu;
  lu.compute(Gu);
  if (lu.info() != Eigen::Success) throw SolverError("Hopf: singular Jacobian at the Hopf point");
  Vec du = -lu.solve(sys.dlam(hp.u0, hp.lam));
  const SpMat& M = sys.mass();
  CSpMat Mc = M.cast<cplx>();
  CVec Mpsi = Mc * hp.psi;
  double npsi = mass_norm(M, hp.psi);
  double re[2];
  for (int k = 0; k < 2; ++k) {
    double sg = k == 0 ? 1.0 : -1.0;
    double l = hp.lam + sg * dl;
    Vec u = newton_fixed(sys, hp.u0 + sg * dl * du, l, 1e-10, 20);
    EigPairs ep = eigs_near(sys.jacobian(u, l), M, hp.mu, std::min(sys.size(), 6), true, hs.dense_limit);
    double best = -1;
    for (int j = 0; j < ep.values.size(); ++j) {
      CVec v = ep.vectors.col(j);
      double c = std::abs(v.dot(Mpsi)) / (mass_norm(M, v) * npsi);
      if (c > best) {
        best = c;
        re[k] = ep.values[j].real();
      }
    }
  }
  return -(re[0] - re[1]) / (2 * dl);
}

void branch_direction(const System& sys, HopfPoint& hp, const HopfSettings& hs) {
  hp.mu_r = eigen_drift(sys, hp, hs);
  hp.c1 = cubic_coefficient(sys, hp, hs);
  if (std::abs(hp.c1) < 1e-12 || hp.mu_r == 0) {
    if (!(hs.fallback_alpha > 0))
      throw SolverError("degenerate Hopf point: c1 = " + std::to_string(hp.c1) + ", no fallback amplitude");
    hp.s = hp.mu_r == 0 ? 1 : (hp.mu_r > 0 ? 1 : -1);
    hp.alpha = hs.fallback_alpha;
    return;
  }
  double r = hp.mu_r / hp.c1;
  hp.s = r > 0 ? -1 : 1;
  hp.alpha = std::sqrt(-hp.s * r);
}

Predictor build_predictor(const System& sys, const HopfPoint& hp, int m, double ds, double xi, double wT) {
  if (m < 3) throw ConfigError("predictor needs at least 3 time slices");
  if (!(ds > 0)) throw ConfigError("predictor step must be positive");
  if (!(hp.alpha > 0) || hp.s == 0) throw ConfigError("predictor needs the branch direction");
  int n = sys.size();
  double T = 2 * M_PI / hp.omega;
  Predictor pr;
  PeriodicOrbit o = steady_orbit(hp.u0, T, hp.lam, m);
  o.xi = xi > 0 ? xi : default_xi(m, n);
  o.wT = wT;
  int N = n * m;
  Vec E(N), dE(N);
  for (int j = 0; j < m; ++j) {
    cplx e = std::exp(cplx(0, -2 * M_PI * o.t[j]));
    E.segment(j * n, n) = (e * hp.psi).real();
    dE.segment(j * n, n) = (cplx(0, -2 * M_PI) * e * hp.psi).real();
  }
  double a = o.xi * 4 * hp.alpha * hp.alpha * E.squaredNorm();
  double b = (1 - o.xi) * (1 - wT);
  double ds2 = ds * ds;
  double e2 = b > 0 ? (-a + std::sqrt(a * a + 4 * b * ds2)) / (2 * b) : ds2 / a;
  if (b > 0 && a > 1e8 * std::sqrt(b * ds2)) e2 = ds2 / a;
  double eps = std::sqrt(e2);
  o.tau = Vec::Zero(N + 2);
  o.tau.head(N) = 2 * eps * hp.alpha * E / ds;
  o.tau[N + 1] = hp.s * e2 / ds;
  const SpMat& M = sys.mass();
  o.uref.resize(N);
  for (int j = 0; j < m; ++j) o.uref.segment(j * n, n) = M * dE.segment(j * n, n);
  pr.start = o;
  pr.guess = o;
  pr.guess.U += ds * o.tau.head(N);
  pr.guess.lam += ds * o.tau[N + 1];
  pr.guess.slice(m - 1) = pr.guess.slice(0);
  pr.eps = eps;
  return pr;
}

}  // namespace pdehopf
