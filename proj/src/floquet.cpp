#include "pdehopf/floquet.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseLU>

#include "pdehopf/eigs.hpp"
#include "pdehopf/orbit.hpp"

namespace pdehopf {

namespace {

double distance_to_one(const Multiplier& g) {
  if (g.infinite || g.logmod > 700) return HUGE_VAL;
  return std::abs(g.value() - 1.0);
}

Multiplier from_value(cplx z) {
  Multiplier g;
  g.logmod = std::log(std::abs(z));
  g.arg = std::arg(z);
  return g;
}

}  // namespace

void finish_spectrum(FloquetSpectrum& s, double tol_fl) {
  std::stable_sort(s.gamma.begin(), s.gamma.end(), [](const Multiplier& a, const Multiplier& b) {
    if (a.infinite != b.infinite) return a.infinite;
    return a.logmod > b.logmod;
  });
  s.trivial = -1;
  s.err_mu = HUGE_VAL;
  for (int i = 0; i < (int)s.gamma.size(); ++i) {
    double d = distance_to_one(s.gamma[i]);
    if (d < s.err_mu) {
      s.err_mu = d;
      s.trivial = i;
    }
  }
  s.ind = floq_index(s, tol_fl);
  if (s.err_mu > tol_fl) s.warnings.push_back("trivial multiplier error " + std::to_string(s.err_mu) + " exceeds tolerance");
}

int floq_index(const FloquetSpectrum& s, double tol_fl) {
  int ind = 0;
  double thr = std::log1p(tol_fl);
  for (int i = 0; i < (int)s.gamma.size(); ++i) {
    if (i == s.trivial) continue;
    if (s.gamma[i].infinite || s.gamma[i].logmod > thr) ++ind;
  }
  return ind;
}

Mat monodromy_fa1(const std::vector<SpMat>& Mj, const std::vector<SpMat>& Hj) {
  int n = (int)Mj[0].rows();
  Mat X = Mat::Identity(n, n);
  for (size_t j = 0; j < Mj.size(); ++j) {
    Eigen::SparseLU<SpMat> lu;
    SpMat Mc = Mj[j];
    Mc.makeCompressed();
    lu.compute(Mc);
    if (lu.info() != Eigen::Success) throw SolverError("FA1 inapplicable: singular block M_" + std::to_string(j + 1));
    Mat R = Hj[j] * X;
    X = lu.solve(R);
  }
  return X;
}

FloquetSpectrum multipliers_fa1(const Mat& mon, int n_plus, double tol_fl) {
  FloquetSpectrum s;
  s.algo = FloquetAlgo::FA1;
  int n = (int)mon.rows();
  n_plus = std::clamp(n_plus, 1, n);
  std::vector<cplx> vals;
  if (n <= 300) {
    Eigen::EigenSolver<Mat> es(mon, false);
    if (es.info() != Eigen::Success) s.warnings.push_back("dense eigensolver did not converge");
    for (int i = 0; i < n; ++i) vals.push_back(es.eigenvalues()[i]);
    std::sort(vals.begin(), vals.end(), [](cplx a, cplx b) { return std::abs(a) > std::abs(b); });
    vals.resize(n_plus);
  } else {
    CMat Mc = mon.cast<cplx>();
    LinearOp op = [&](const CVec& x, CVec& y) { y = Mc * x; };
    ArnoldiResult ar = arnoldi_largest(op, n, n_plus, 0, 1e-10, 300);
    if (!ar.converged) s.warnings.push_back("some multipliers did not converge");
    for (int i = 0; i < ar.theta.size(); ++i) vals.push_back(ar.theta[i]);
  }
  for (cplx z : vals) s.gamma.push_back(from_value(z));
  finish_spectrum(s, tol_fl);
  if (n_plus < n && !s.gamma.empty() && s.gamma.back().logmod >= 0)
    s.warnings.push_back("smallest computed multiplier has modulus >= 1; index may be truncated");
  return s;
}

int oc_steady_defect(const CVec& mu, std::vector<std::string>* warnings) {
  int stable = 0;
  for (int i = 0; i < mu.size(); ++i) {
    if (mu[i].real() > 0) ++stable;
    if (warnings && std::abs(mu[i].real()) < 1e-8)
      warnings->push_back("eigenvalue within 1e-8 of the imaginary axis; defect ambiguous");
  }
  return (int)mu.size() / 2 - stable;
}

int oc_orbit_defect(const FloquetSpectrum& s, int n) { return s.ind - n / 2; }

FloquetSpectrum orbit_multipliers(const System& sys, const PeriodicOrbit& orb, FloquetAlgo algo, int n_plus,
                                  double tol_fl) {
  PoJacobian pj = po_jacobian(sys, orb, false);
  if (algo == FloquetAlgo::FA1) return multipliers_fa1(monodromy_fa1(pj.Mj, pj.Hj), n_plus, tol_fl);
  std::vector<Mat> A, B;
  for (size_t j = 0; j < pj.Mj.size(); ++j) {
    A.push_back(Mat(pj.Hj[j]));
    B.push_back(Mat(pj.Mj[j]));
  }
  return multipliers_fa2(periodic_schur(A, B, false), tol_fl);
}

}  // namespace pdehopf
