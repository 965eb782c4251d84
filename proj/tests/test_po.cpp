#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "pdehopf/floquet.hpp"
#include "pdehopf/hopf.hpp"
#include "pdehopf/models.hpp"

using namespace pdehopf;

namespace {

// k = 0 cGL orbit with |a|^2 = A on the small-amplitude root, rotating at nu - mu A
PeriodicOrbit cgl_exact(const Discretization& d, double r, int m, double* A_out = nullptr) {
  double A = 0.5 * (1 - std::sqrt(1 + 4 * r));
  double omega = 1 - 0.1 * A;
  int np = d.grid().np;
  PeriodicOrbit o;
  o.n = d.size();
  o.m = m;
  o.t = uniform_mesh(m);
  o.T = 2 * M_PI / omega;
  o.lam = r;
  o.U.resize(o.n * m);
  for (int j = 0; j < m; ++j) {
    double ph = 2 * M_PI * o.t[j];
    o.slice(j).head(np).setConstant(std::sqrt(A) * std::cos(ph));
    o.slice(j).tail(np).setConstant(std::sqrt(A) * std::sin(ph));
  }
  o.xi = default_xi(m, o.n);
  o.uref = phase_weights(d, o);
  if (A_out) *A_out = A;
  return o;
}

struct Branch {
  Discretization disc;
  PoSettings s;
  Predictor pr;
  std::vector<PoStep> steps;
};

Branch cgl_b1(int nsteps) {
  ModelSetup ms = make_model("cgl1d", {{"r", 0.0}});
  HopfPoint hp = hopf_eigenpair(ms.disc, ms.u0, 0.0, 1.0);
  branch_direction(ms.disc, hp);
  Branch b{ms.disc, {}, {}, {}};
  b.s.ds = 0.1;
  b.s.dsmax = 0.5;
  b.s.tol = 1e-10;
  b.pr = build_predictor(b.disc, hp, 21, b.s.ds);
  b.steps = continue_po(b.disc, b.pr.start, nsteps, b.s);
  return b;
}

Vec dense_solve(const SpMat& A, const Mat& B, const Mat& C, const Mat& D, const Vec& rhs) {
  int N = (int)A.rows(), k = (int)B.cols();
  Mat F(N + k, N + k);
  F << Mat(A), B, C, D;
  return F.fullPivLu().solve(rhs);
}

}  // namespace

TEST_CASE("bordered solver matches a dense solve on random systems") {
  std::mt19937 rng(11);
  std::normal_distribution<double> N;
  for (int trial = 0; trial < 10; ++trial) {
    int n = 40 + 30 * trial, k = 1 + trial % 3;
    std::vector<Triplet> t;
    for (int i = 0; i < n; ++i) {
      t.emplace_back(i, i, 4.0 + N(rng));
      t.emplace_back(i, (i + 1) % n, N(rng));
      t.emplace_back(i, (i + 7) % n, 0.5 * N(rng));
    }
    SpMat A(n, n);
    A.setFromTriplets(t.begin(), t.end());
    Mat B(n, k), C(k, n), D(k, k);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < k; ++j) {
        B(i, j) = N(rng);
        C(j, i) = N(rng);
      }
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) D(i, j) = N(rng);
    Vec rhs(n + k);
    for (int i = 0; i < n + k; ++i) rhs[i] = N(rng);
    BorderedSolver bs(A, B, C, D);
    Vec x = bs.solve(rhs), y = dense_solve(A, B, C, D, rhs);
    CHECK((x - y).norm() <= 1e-10 * y.norm());
    CHECK((bs.apply(x) - rhs).norm() <= 1e-10 * rhs.norm());
  }
}

TEST_CASE("bordered solver matches a dense solve on the continuation system, singular block included") {
  ModelSetup ms = make_model("cgl1d", {{"r", -0.1}, {"nx", 11}});
  for (int m : {8, 15}) {
    PeriodicOrbit o = cgl_exact(ms.disc, -0.1, m);
    REQUIRE(o.n * o.m <= 400);
    PoJacobian pj = po_jacobian(ms.disc, o);
    int N = o.n * o.m;
    o.tau = Vec::Zero(N + 2);
    o.tau.head(N) = o.U / o.U.norm();
    o.tau[N + 1] = 0.3;
    Mat B(N, 2), C(2, N), D(2, 2);
    B << pj.dT, pj.dlam;
    Phase ph = phase_condition(o);
    Arclength al = arclength_condition(o, o, 0.1);
    C.row(0) = ph.grad.transpose();
    C.row(1) = al.grad.head(N).transpose();
    D << 0, 0, al.grad[N], al.grad[N + 1];
    Vec rhs = Vec::LinSpaced(N + 2, -1, 1);
    BorderedSolver bs(pj.A, B, C, D);
    Vec x = bs.solve(rhs), y = dense_solve(pj.A, B, C, D, rhs);
    CHECK((x - y).norm() <= 1e-10 * y.norm());
  }
}

TEST_CASE("collocation residual of the exact orbit decays like h^2") {
  ModelSetup ms = make_model("cgl1d", {{"r", -0.15}, {"nx", 11}});
  double prev = 0;
  for (int m : {11, 21, 41, 81}) {
    PeriodicOrbit o = cgl_exact(ms.disc, -0.15, m);
    double r = po_residual(ms.disc, o).lpNorm<Eigen::Infinity>();
    if (prev > 0) CHECK(prev / r == doctest::Approx(4.0).epsilon(0.1));
    prev = r;
  }
}

TEST_CASE("periodicity holds exactly after correction") {
  ModelSetup ms = make_model("cgl1d", {{"r", -0.15}, {"nx", 11}});
  PeriodicOrbit o = cgl_exact(ms.disc, -0.15, 21);
  PoSettings s;
  s.tol = 1e-10;
  PeriodicOrbit c = correct_fixed_lambda(ms.disc, o, PhaseMode::Integral, s);
  CHECK((c.slice(c.m - 1) - c.slice(0)).norm() == 0);
  CHECK(c.T == doctest::Approx(o.T).epsilon(2e-2));
}

TEST_CASE("phase condition gradient is exact") {
  ModelSetup ms = make_model("cgl1d", {{"r", -0.15}, {"nx", 11}});
  PeriodicOrbit o = cgl_exact(ms.disc, -0.15, 11);
  Phase ph = phase_condition(o);
  PeriodicOrbit p = o;
  Vec d = Vec::LinSpaced(o.U.size(), -1, 2);
  p.U += 1e-3 * d;
  CHECK(std::abs(phase_condition(p).phi - ph.phi - 1e-3 * ph.grad.dot(d)) < 1e-12);
  CHECK(ph.grad.tail(o.n).norm() == 0);
}

TEST_CASE("accepted steps satisfy the step-length condition and keep the tangent orientation") {
  Branch b = cgl_b1(14);
  REQUIRE(b.steps.size() == 14);
  Vec prev_tau = b.pr.start.tau;
  int N = b.pr.start.n * b.pr.start.m;
  bool passed_fold = false;
  for (const auto& st : b.steps) {
    CHECK(std::abs(st.projected_step - st.ds) <= 10 * b.s.tol);
    CHECK(xi_dot(prev_tau, st.orb.tau, N, st.orb.xi, st.orb.wT) > 0);
    CHECK(xi_norm(st.orb.tau.head(N), st.orb.tau[N], st.orb.tau[N + 1], st.orb.xi, st.orb.wT) ==
          doctest::Approx(1.0).epsilon(1e-8));
    if (st.orb.tau[N + 1] > 0) passed_fold = true;
    prev_tau = st.orb.tau;
  }
  CHECK(passed_fold);
}

TEST_CASE("branch norm of the exact orbit is the amplitude") {
  ModelSetup ms = make_model("cgl1d", {{"r", -0.15}, {"nx", 11}});
  double A = 0;
  PeriodicOrbit o = cgl_exact(ms.disc, -0.15, 21, &A);
  CHECK(branch_norm(ms.disc, o) == doctest::Approx(std::sqrt(A)).epsilon(1e-12));
  o.U.setZero();
  CHECK(branch_norm(ms.disc, o) == 0);
}

TEST_CASE("FA1 leading multiplier converges like m^-2 to the amplitude growth factor") {
  ModelSetup ms = make_model("cgl1d", {{"r", -0.109}});
  PoSettings s;
  s.tol = 1e-10;
  double prev = 0;
  for (int m : {21, 41, 81}) {
    double A = 0;
    PeriodicOrbit o = correct_fixed_lambda(ms.disc, cgl_exact(ms.disc, -0.109, m, &A), PhaseMode::Integral, s);
    FloquetSpectrum sp = orbit_multipliers(ms.disc, o, FloquetAlgo::FA1);
    double h = -0.109 + 3 * A - 5 * A * A;
    double g = std::exp(h * 2 * M_PI / (1 - 0.1 * A));
    double lead = std::exp(sp.gamma[0].logmod);
    double err = std::abs(lead - g) / g;
    if (prev > 0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.15));
    prev = err;
  }
}
