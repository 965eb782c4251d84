#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "pdehopf/floquet.hpp"

using namespace pdehopf;

namespace {

struct Instance {
  std::vector<Mat> A, B;
};

Instance random_instance(std::mt19937& rng, int n, int K) {
  std::normal_distribution<double> N;
  Instance in;
  for (int p = 0; p < K; ++p) {
    Mat a(n, n), b(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        a(i, j) = N(rng);
        b(i, j) = 0.3 * N(rng);
      }
    b += 2.0 * Mat::Identity(n, n);
    in.A.push_back(a);
    in.B.push_back(b);
  }
  return in;
}

CMat product(const Instance& in) {
  int n = (int)in.A[0].rows();
  Mat P = Mat::Identity(n, n);
  for (size_t p = 0; p < in.A.size(); ++p) P = in.B[p].lu().solve(in.A[p] * P);
  return P.cast<cplx>();
}

// largest distance from a value in `a` to its partner in `b` under greedy matching
double match_error(std::vector<cplx> a, std::vector<cplx> b, bool relative) {
  double worst = 0;
  for (cplx x : a) {
    auto it = std::min_element(b.begin(), b.end(), [&](cplx p, cplx q) { return std::abs(p - x) < std::abs(q - x); });
    double e = std::abs(*it - x);
    if (relative) e /= std::max(1.0, std::abs(x));
    worst = std::max(worst, e);
    b.erase(it);
  }
  return worst;
}

std::vector<cplx> values(const std::vector<Multiplier>& g) {
  std::vector<cplx> v;
  for (const auto& m : g) v.push_back(m.value());
  return v;
}

}  // namespace

TEST_CASE("periodic Schur: orthogonality, structure, reconstruction, eigenvalues") {
  std::mt19937 rng(2024);
  std::uniform_int_distribution<int> dn(1, 12), dk(1, 8);
  double worst_orth = 0, worst_rec = 0, worst_eig = 0, worst_tri = 0;
  for (int trial = 0; trial < 200; ++trial) {
    int n = dn(rng), K = dk(rng);
    Instance in = random_instance(rng, n, K);
    PeriodicSchurForm f = periodic_schur(in.A, in.B);
    CMat I = CMat::Identity(n, n);
    for (int p = 0; p < K; ++p) {
      worst_orth = std::max(worst_orth, (f.Q[p].adjoint() * f.Q[p] - I).norm());
      worst_orth = std::max(worst_orth, (f.Z[p].adjoint() * f.Z[p] - I).norm());
      const CMat& Zprev = f.Z[(p + K - 1) % K];
      CMat Ar = f.Q[p] * f.A[p] * Zprev.adjoint(), Br = f.Q[p] * f.B[p] * f.Z[p].adjoint();
      worst_rec = std::max(worst_rec, (Ar - in.A[p].cast<cplx>()).norm() / std::max(1.0, in.A[p].norm()));
      worst_rec = std::max(worst_rec, (Br - in.B[p].cast<cplx>()).norm() / std::max(1.0, in.B[p].norm()));
      for (int j = 0; j < n; ++j)
        for (int i = j + 1; i < n; ++i)
          worst_tri = std::max({worst_tri, std::abs(f.A[p](i, j)), std::abs(f.B[p](i, j))});
    }
    Eigen::ComplexEigenSolver<CMat> es(product(in), false);
    std::vector<cplx> ref(es.eigenvalues().data(), es.eigenvalues().data() + n);
    worst_eig = std::max(worst_eig, match_error(values(schur_products(f)), ref, true));
  }
  CHECK(worst_orth < 1e-12);
  CHECK(worst_rec < 1e-10);
  CHECK(worst_tri == 0);
  CHECK(worst_eig < 1e-7);
}

TEST_CASE("periodic Schur: multipliers invariant under cyclic rotation of the factors") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    Instance in = random_instance(rng, 9, 6);
    auto g0 = schur_products(periodic_schur(in.A, in.B));
    std::rotate(in.A.begin(), in.A.begin() + 1, in.A.end());
    std::rotate(in.B.begin(), in.B.begin() + 1, in.B.end());
    auto g1 = schur_products(periodic_schur(in.A, in.B));
    CHECK(match_error(values(g0), values(g1), true) < 1e-8);
  }
}

TEST_CASE("periodic Schur: extreme dynamic range stays exact in log modulus") {
  // diagonal factors with known product 1e200, 1, 1e-200 hidden behind orthogonal mixing
  int n = 3, K = 40;
  std::mt19937 rng(5);
  std::normal_distribution<double> N;
  std::vector<Mat> Qs;
  for (int p = 0; p < K; ++p) {
    Mat R(n, n);
    for (int i = 0; i < n * n; ++i) R.data()[i] = N(rng);
    Qs.push_back(Eigen::HouseholderQR<Mat>(R).householderQ());
  }
  Qs.push_back(Qs[0]);
  Mat D = Eigen::Vector3d(1e5, 1.0, 1e-5).asDiagonal();
  std::vector<Mat> A, B;
  for (int p = 0; p < K; ++p) {
    A.push_back(Qs[p + 1] * D * Qs[p].transpose());
    B.push_back(Mat::Identity(n, n));
  }
  auto g = schur_products(periodic_schur(A, B));
  std::vector<double> lm;
  for (auto& m : g) lm.push_back(m.logmod);
  std::sort(lm.begin(), lm.end());
  CHECK(lm[0] == doctest::Approx(-200 * std::log(10.0)).epsilon(1e-8));
  CHECK(std::abs(lm[1]) < 1e-8);
  CHECK(lm[2] == doctest::Approx(200 * std::log(10.0)).epsilon(1e-8));
}

TEST_CASE("spectrum bookkeeping: trivial slot, err_mu and index") {
  FloquetSpectrum s;
  for (cplx z : {cplx(3, 0), cplx(1 + 1e-9, 0), cplx(0.5, 0.5), cplx(1.0 + 1e-7, 0), cplx(0.1, 0)}) {
    Multiplier m;
    m.logmod = std::log(std::abs(z));
    m.arg = std::arg(z);
    s.gamma.push_back(m);
  }
  finish_spectrum(s, 1e-6);
  CHECK(s.gamma[0].mod() == doctest::Approx(3));
  CHECK(s.err_mu == doctest::Approx(1e-9).epsilon(1e-3));
  CHECK(s.ind == 1);
  CHECK(s.warnings.empty());
}

TEST_CASE("FA1 monodromy of a scalar linear recursion") {
  // M_j u_{j} = H_j u_{j-1} with M = 2, H = 3 for 4 blocks: product (3/2)^4
  std::vector<SpMat> Mj, Hj;
  for (int j = 0; j < 4; ++j) {
    SpMat m(1, 1), h(1, 1);
    m.insert(0, 0) = 2;
    h.insert(0, 0) = 3;
    Mj.push_back(m);
    Hj.push_back(h);
  }
  Mat mon = monodromy_fa1(Mj, Hj);
  CHECK(mon(0, 0) == doctest::Approx(std::pow(1.5, 4)));
  FloquetSpectrum s = multipliers_fa1(mon, 1);
  CHECK(s.gamma.size() == 1);
  CHECK(s.ind == 0);
  CHECK_FALSE(s.warnings.empty());
}

TEST_CASE("OC defect conventions") {
  CVec mu(4);
  mu << cplx(1, 0), cplx(2, 0), cplx(-1, 0), cplx(-3, 0);
  CHECK(oc_steady_defect(mu) == 0);
  mu << cplx(-1, 1), cplx(-1, -1), cplx(-1, 0), cplx(-3, 0);
  CHECK(oc_steady_defect(mu) == 2);
  FloquetSpectrum s;
  s.ind = 5;
  CHECK(oc_orbit_defect(s, 4) == 3);
}
