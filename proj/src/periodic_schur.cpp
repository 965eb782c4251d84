#include <algorithm>
#include <cmath>

#include "pdehopf/floquet.hpp"
#include "pdehopf/givens.hpp"

namespace pdehopf {

namespace {

constexpr double kEps = 2.220446049250313e-16;

struct Work {
  int K, n;
  std::vector<CMat>& A;
  std::vector<CMat>& B;
  std::vector<CMat>& Q;
  std::vector<CMat>& Z;
  bool full = true;  // false: eigenvalues only, updates confined to the active window
  int wlo = 0, whi = 0;

  // Q_p: rows (i, j) of A_p and B_p from column c0 on
  void rot_q(int p, const Givens& g, int i, int j, int c0) {
    int c1 = full ? n : whi + 1;
    g.left(A[p], i, j, c0, c1);
    g.left(B[p], i, j, c0, c1);
    if (full) g.right(Q[p], i, j);
  }
  // Z_p: columns (i, j) of B_p and A_{p+1} in rows below r1
  void rot_z(int p, const Givens& g, int i, int j, int r1) {
    int r0 = full ? 0 : wlo;
    g.right(B[p], i, j, r0, r1);
    g.right(A[(p + 1) % K], i, j, r0, r1);
    if (full) g.right(Z[p], i, j);
  }
};

void clear_lower(CMat& X, int offset) {
  for (int j = 0; j < X.cols(); ++j)
    for (int i = j + 1 + offset; i < X.rows(); ++i) X(i, j) = 0;
}

// Hessenberg-triangular form: A_1 upper Hessenberg, all other factors upper triangular
void reduce(Work& w) {
  int K = w.K, n = w.n;
  for (int p = K - 1; p >= 0; --p) {
    Eigen::HouseholderQR<CMat> qr(w.B[p]);
    CMat Qh = qr.householderQ();
    w.B[p] = Qh.adjoint() * w.B[p];
    w.A[p] = Qh.adjoint() * w.A[p];
    if (w.full) w.Q[p] = w.Q[p] * Qh;
    clear_lower(w.B[p], 0);
    if (p == 0) break;
    // RQ of A_p: A_p^H J = Qr R  gives  A_p (Qr J) = J R^H J, upper triangular
    CMat X = w.A[p].adjoint().rowwise().reverse();
    Eigen::HouseholderQR<CMat> qr2(X);
    CMat Zh = CMat(qr2.householderQ()).rowwise().reverse();
    w.A[p] = w.A[p] * Zh;
    w.B[p - 1] = w.B[p - 1] * Zh;
    if (w.full) w.Z[p - 1] = w.Z[p - 1] * Zh;
    clear_lower(w.A[p], 0);
  }
  for (int j = 0; j + 2 < n; ++j)
    for (int i = n - 1; i >= j + 2; --i) {
      Givens g = Givens::zeroing(w.A[0](i - 1, j), w.A[0](i, j));
      w.rot_q(0, g, i - 1, i, j);
      w.A[0](i, j) = 0;
      for (int p = 0; p < K; ++p) {
        Givens gz = zeroing_right(w.B[p](i, i - 1), w.B[p](i, i));
        w.rot_z(p, gz, i - 1, i, p + 1 == K ? n : i + 1);
        w.B[p](i, i - 1) = 0;
        if (p + 1 == K) break;
        Givens gq = Givens::zeroing(w.A[p + 1](i - 1, i - 1), w.A[p + 1](i, i - 1));
        w.rot_q(p + 1, gq, i - 1, i, i - 1);
        w.A[p + 1](i, i - 1) = 0;
      }
    }
  clear_lower(w.A[0], 1);
}

// product of the 2x2 diagonal blocks at rows (k, k+1); returned normalized, log of the scale in lscale
Eigen::Matrix2cd block_product(const Work& w, int k, double& lscale) {
  Eigen::Matrix2cd P = w.A[0].block(k, k, 2, 2);
  lscale = 0;
  for (int p = 0; p < w.K; ++p) {
    if (p > 0) P = w.A[p].block(k, k, 2, 2).triangularView<Eigen::Upper>() * P;
    Eigen::Matrix2cd Bb = w.B[p].block(k, k, 2, 2);
    P = Bb.triangularView<Eigen::Upper>().solve(P);
    double s = P.cwiseAbs().maxCoeff();
    if (s > 0 && std::isfinite(s)) {
      P /= s;
      lscale += std::log(s);
    }
  }
  return P;
}

// first column of the window product, normalized, log of the scale in lscale
Eigen::Vector2cd first_column(const Work& w, int lo, double& lscale) {
  Eigen::Vector2cd v(w.A[0](lo, lo), w.A[0](lo + 1, lo));
  lscale = 0;
  for (int p = 0; p < w.K; ++p) {
    if (p > 0) v = w.A[p].block(lo, lo, 2, 2).triangularView<Eigen::Upper>() * v;
    Eigen::Matrix2cd Bb = w.B[p].block(lo, lo, 2, 2);
    v = Bb.triangularView<Eigen::Upper>().solve(v);
    double s = v.cwiseAbs().maxCoeff();
    if (s > 0 && std::isfinite(s)) {
      v /= s;
      lscale += std::log(s);
    }
  }
  return v;
}

bool finite2(const Eigen::Vector2cd& v) { return v.allFinite(); }

// push the bulge at A_1(lo+2, lo) off the bottom of the window
void chase(Work& w, int lo, int hi) {
  int K = w.K, n = w.n;
  for (int k = lo; k + 2 <= hi; ++k) {
    Givens gq = Givens::zeroing(w.A[0](k + 1, k), w.A[0](k + 2, k));
    w.rot_q(0, gq, k + 1, k + 2, k);
    w.A[0](k + 2, k) = 0;
    for (int p = 0; p < K; ++p) {
      Givens gz = zeroing_right(w.B[p](k + 2, k + 1), w.B[p](k + 2, k + 2));
      w.rot_z(p, gz, k + 1, k + 2, std::min(n, k + 4));
      w.B[p](k + 2, k + 1) = 0;
      if (p + 1 == K) break;
      Givens gq2 = Givens::zeroing(w.A[p + 1](k + 1, k + 1), w.A[p + 1](k + 2, k + 1));
      w.rot_q(p + 1, gq2, k + 1, k + 2, k + 1);
      w.A[p + 1](k + 2, k + 1) = 0;
    }
  }
}

// graded products can leave the start vector numerically equal to e_lo while the Hessenberg subdiagonal
// is still large; this sweep zeroes it from the left and carries the fill once around the cycle
void top_sweep(Work& w, int lo, int hi) {
  int K = w.K, n = w.n;
  Givens g = Givens::zeroing(w.A[0](lo, lo), w.A[0](lo + 1, lo));
  w.rot_q(0, g, lo, lo + 1, lo);
  w.A[0](lo + 1, lo) = 0;
  for (int p = 0; p < K; ++p) {
    Givens gz = zeroing_right(w.B[p](lo + 1, lo), w.B[p](lo + 1, lo + 1));
    w.rot_z(p, gz, lo, lo + 1, std::min(n, p + 1 == K ? lo + 3 : lo + 2));
    w.B[p](lo + 1, lo) = 0;
    if (p + 1 == K) break;
    Givens gq = Givens::zeroing(w.A[p + 1](lo, lo), w.A[p + 1](lo + 1, lo));
    w.rot_q(p + 1, gq, lo, lo + 1, lo);
    w.A[p + 1](lo + 1, lo) = 0;
  }
  chase(w, lo, hi);
}

// implicit single-shift periodic QZ sweep on the window [lo, hi]
void qz_step(Work& w, int lo, int hi, bool exceptional, int iter) {
  int K = w.K, n = w.n;
  double Lt = 0, L = 0;
  Eigen::Matrix2cd Pt = block_product(w, hi - 1, Lt);
  cplx tr = Pt.trace(), det = Pt.determinant();
  cplx disc = std::sqrt(tr * tr / 4.0 - det);
  cplx l1 = tr / 2.0 + disc, l2 = tr / 2.0 - disc;
  cplx shift = std::abs(l1 - Pt(1, 1)) < std::abs(l2 - Pt(1, 1)) ? l1 : l2;
  if (exceptional || !std::isfinite(std::abs(shift)))
    shift = Pt(1, 1) + std::polar(std::abs(Pt(1, 0)) + 0.1 * std::abs(Pt(1, 1)), 0.7 + 1.3 * iter);
  Eigen::Vector2cd v = first_column(w, lo, L);
  double d = Lt - L;
  Eigen::Vector2cd x;
  if (d > 0) {
    double e = std::exp(-d);
    x << v[0] * e - shift, v[1] * e;
  } else {
    x << v[0] - shift * std::exp(d), v[1];
  }
  if (!finite2(x) || std::abs(x[1]) == 0) x << cplx(1.0, 0.3), cplx(0.7, -0.2);

  Givens g0 = Givens::zeroing(x[0], x[1]);
  if (std::abs(g0.s) < kEps) {
    top_sweep(w, lo, hi);
    return;
  }
  w.rot_z(K - 1, g0, lo, lo + 1, std::min(n, lo + 3));
  for (int p = K - 1; p >= 0; --p) {
    Givens gq = Givens::zeroing(w.B[p](lo, lo), w.B[p](lo + 1, lo));
    w.rot_q(p, gq, lo, lo + 1, lo);
    w.B[p](lo + 1, lo) = 0;
    if (p == 0) break;
    Givens gz = zeroing_right(w.A[p](lo + 1, lo), w.A[p](lo + 1, lo + 1));
    w.rot_z(p - 1, gz, lo, lo + 1, std::min(n, lo + 2));
    w.A[p](lo + 1, lo) = 0;
  }
  chase(w, lo, hi);
}

}  // namespace

PeriodicSchurForm periodic_schur(const std::vector<Mat>& A, const std::vector<Mat>& B, bool want_schur) {
  int K = (int)A.size();
  if (K < 1 || (int)B.size() != K) throw ConfigError("periodic Schur: need matching non-empty factor lists");
  int n = (int)A[0].rows();
  for (int p = 0; p < K; ++p)
    if (A[p].rows() != n || A[p].cols() != n || B[p].rows() != n || B[p].cols() != n)
      throw ConfigError("periodic Schur: factors must be square of equal size");
  PeriodicSchurForm f;
  f.A.resize(K);
  f.B.resize(K);
  f.Q.assign(K, CMat::Identity(n, n));
  f.Z.assign(K, CMat::Identity(n, n));
  for (int p = 0; p < K; ++p) {
    f.A[p] = A[p].cast<cplx>();
    f.B[p] = B[p].cast<cplx>();
  }
  Work w{K, n, f.A, f.B, f.Q, f.Z};
  w.whi = n - 1;
  if (n == 1) return f;
  w.full = want_schur;
  reduce(w);
  double anorm = f.A[0].norm();
  int total = 0, since = 0, maxit = 30 * n;
  int hi = n - 1;
  while (hi > 0) {
    int lo = hi;
    for (; lo > 0; --lo) {
      double sub = std::abs(f.A[0](lo, lo - 1));
      double loc = std::abs(f.A[0](lo - 1, lo - 1)) + std::abs(f.A[0](lo, lo));
      if (sub <= kEps * loc || sub <= kEps * anorm) {
        f.A[0](lo, lo - 1) = 0;
        break;
      }
    }
    if (lo == hi) {
      --hi;
      since = 0;
      continue;
    }
    if (total >= maxit) throw SolverError("periodic QZ: no convergence within 30 n iterations");
    ++total;
    ++since;
    if (!w.full) {
      w.wlo = lo;
      w.whi = hi;
    }
    qz_step(w, lo, hi, since % 10 == 0, since);
  }
  f.sweeps = total;
  if (!want_schur) {
    f.Q.clear();
    f.Z.clear();
  }
  return f;
}

std::vector<Multiplier> schur_products(const PeriodicSchurForm& f) {
  int K = (int)f.A.size(), n = (int)f.A[0].rows();
  std::vector<Multiplier> out(n);
  for (int i = 0; i < n; ++i) {
    Multiplier& g = out[i];
    bool zero = false;
    for (int p = 0; p < K; ++p) {
      cplx a = f.A[p](i, i), b = f.B[p](i, i);
      if (b == 0.0) {
        g.infinite = true;
        continue;
      }
      if (a == 0.0) {
        zero = true;
        continue;
      }
      g.logmod += std::log(std::abs(a)) - std::log(std::abs(b));
      g.arg += std::arg(a) - std::arg(b);
    }
    if (g.infinite && zero) g.infinite = false;
    if (zero && !g.infinite) g.logmod = -HUGE_VAL;
    g.arg = std::remainder(g.arg, 2 * M_PI);
  }
  return out;
}

FloquetSpectrum multipliers_fa2(const PeriodicSchurForm& f, double tol_fl) {
  FloquetSpectrum s;
  s.algo = FloquetAlgo::FA2;
  s.gamma = schur_products(f);
  for (const auto& g : s.gamma)
    if (g.infinite) s.warnings.push_back("infinite multiplier (singular right factor)");
  finish_spectrum(s, tol_fl);
  return s;
}

}  // namespace pdehopf
