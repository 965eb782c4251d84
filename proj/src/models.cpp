#include "pdehopf/models.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "pdehopf/orbit.hpp"

namespace pdehopf {

// ---------------------------------------------------------------- cGL

PdeProblem cgl_problem(const CglParams& c) {
  PdeProblem p;
  p.ncomp = 2;
  p.diff = {1.0, 1.0};
  p.params = {c.r, c.nu, c.c3, c.mu, c.c5};
  p.active = 0;
  p.f = [](const double* u, const std::vector<double>& q, double* f) {
    double r = q[0], nu = q[1], c3 = q[2], mu = q[3], c5 = q[4];
    double s = u[0] * u[0] + u[1] * u[1];
    f[0] = r * u[0] - nu * u[1] - s * (c3 * u[0] - mu * u[1]) - c5 * s * s * u[0];
    f[1] = nu * u[0] + r * u[1] - s * (mu * u[0] + c3 * u[1]) - c5 * s * s * u[1];
  };
  p.df = [](const double* u, const std::vector<double>& q, double* J) {
    double r = q[0], nu = q[1], c3 = q[2], mu = q[3], c5 = q[4];
    double x = u[0], y = u[1], s = x * x + y * y;
    double a = c3 * x - mu * y, b = mu * x + c3 * y;
    J[0] = r - 2 * x * a - s * c3 - c5 * (4 * s * x * x + s * s);
    J[1] = -nu - 2 * y * a + s * mu - 4 * c5 * s * x * y;
    J[2] = nu - 2 * x * b - s * mu - 4 * c5 * s * x * y;
    J[3] = r - 2 * y * b - s * c3 - c5 * (4 * s * y * y + s * s);
  };
  p.bc = BcSpec::neumann(2, 1);
  return p;
}

Discretization cgl1d(int nx, double l, const CglParams& c) {
  PdeProblem p = cgl_problem(c);
  Grid g = build_grid(1, {nx}, {{-l * M_PI, l * M_PI}});
  return Discretization(p, g);
}

Discretization cgl2d(int nx, int ny, double lx, double ly, const CglParams& c, double spring) {
  PdeProblem p = cgl_problem(c);
  p.bc = BcSpec::dirichlet(2, 2, 0.0, spring);
  Grid g = build_grid(2, {nx, ny}, {{-lx * M_PI, lx * M_PI}, {-ly * M_PI, ly * M_PI}});
  return Discretization(p, g);
}

CglOracle cgl_oracle(double k2, double r, const CglParams& c) {
  CglOracle o;
  double h = -c.c3 / (2 * c.c5);
  double rad = c.c3 * c.c3 / (4 * c.c5 * c.c5) + r - k2;
  o.fold_r = k2 - c.c3 * c.c3 / (4 * c.c5 * c.c5);
  if (rad < 0) return o;
  o.exists = true;
  o.a2_upper = h + std::sqrt(rad);
  o.a2_lower = h - std::sqrt(rad);
  o.omega_upper = c.nu - c.mu * o.a2_upper;
  o.omega_lower = c.nu - c.mu * o.a2_lower;
  return o;
}

double cgl_floquet_rate(double r, double a2, const CglParams& c) {
  return r - 3 * c.c3 * a2 - 5 * c.c5 * a2 * a2;
}

// ---------------------------------------------------------------- Brusselator

PdeProblem bruss_problem(const BrussParams& b) {
  PdeProblem p;
  p.ncomp = 3;
  p.diff = {b.Du, b.Dv, b.Dw};
  p.params = {b.a, b.b, b.c, b.d};
  p.active = 1;
  p.f = [](const double* u, const std::vector<double>& q, double* f) {
    double a = q[0], bb = q[1], c = q[2], d = q[3];
    double x = u[0], y = u[1], z = u[2];
    f[0] = a - (1 + bb) * x + x * x * y - c * x + d * z;
    f[1] = bb * x - x * x * y;
    f[2] = c * x - d * z;
  };
  p.df = [](const double* u, const std::vector<double>& q, double* J) {
    double bb = q[1], c = q[2], d = q[3];
    double x = u[0], y = u[1];
    J[0] = -(1 + bb) + 2 * x * y - c;
    J[1] = x * x;
    J[2] = d;
    J[3] = bb - 2 * x * y;
    J[4] = -x * x;
    J[5] = 0;
    J[6] = c;
    J[7] = 0;
    J[8] = -d;
  };
  p.bc = BcSpec::neumann(3, 1);
  return p;
}

Discretization bruss1d(int nx, double L, const BrussParams& b) {
  return Discretization(bruss_problem(b), build_grid(1, {nx}, {{-L, L}}));
}

Discretization bruss2d(int nx, int ny, double lx, double ly, const BrussParams& b) {
  PdeProblem p = bruss_problem(b);
  p.bc = BcSpec::neumann(3, 2);
  return Discretization(p, build_grid(2, {nx, ny}, {{-lx, lx}, {-ly, ly}}));
}

Vec bruss_homogeneous(const BrussParams& b, int np) {
  Vec u(3 * np);
  u.segment(0, np).setConstant(b.a);
  u.segment(np, np).setConstant(b.b / b.a);
  u.segment(2 * np, np).setConstant(b.a * b.c / b.d);
  return u;
}

std::array<cplx, 3> bruss_dispersion(const BrussParams& b, double k) {
  Eigen::Matrix3d J;
  double x = b.a, y = b.b / b.a, k2 = k * k;
  J << -(1 + b.b) + 2 * x * y - b.c - b.Du * k2, x * x, b.d,
      b.b - 2 * x * y, -x * x - b.Dv * k2, 0,
      b.c, 0, -b.d - b.Dw * k2;
  Eigen::EigenSolver<Eigen::Matrix3d> es(J, false);
  std::array<cplx, 3> ev;
  for (int i = 0; i < 3; ++i) ev[i] = es.eigenvalues()[i];
  std::sort(ev.begin(), ev.end(), [](cplx a, cplx c) {
    if (a.real() != c.real()) return a.real() > c.real();
    return a.imag() > c.imag();
  });
  return ev;
}

double bruss_critical_b(BrussParams p, double k, double b_lo, double b_hi) {
  auto growth = [&](double b) {
    p.b = b;
    return bruss_dispersion(p, k)[0].real();
  };
  double step = 1e-2, lo = b_lo;
  if (growth(lo) > 0) return lo;
  double hi = lo;
  while (hi < b_hi) {
    hi = std::min(b_hi, lo + step);
    if (growth(hi) > 0) break;
    lo = hi;
  }
  if (growth(hi) <= 0) return HUGE_VAL;
  for (int i = 0; i < 60; ++i) {
    double mid = 0.5 * (lo + hi);
    (growth(mid) > 0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------- OC pollution

PdeProblem oc_problem(const OcParams& o) {
  PdeProblem p;
  p.ncomp = 4;
  p.diff = {o.d1, o.d2, -o.d1, -o.d2};
  p.params = {o.rho, o.p, o.beta, o.gamma};
  p.active = 0;
  p.f = [](const double* u, const std::vector<double>& q, double* f) {
    double rho = q[0], pp = q[1], beta = q[2], gamma = q[3];
    double v1 = u[0], v2 = u[1], l1 = u[2], l2 = u[3];
    double k = -(1 + l1) / gamma;
    f[0] = -k;
    f[1] = v1 - v2 * (1 - v2);
    f[2] = rho * l1 - pp - l2;
    f[3] = (rho + 1 - 2 * v2) * l2 + beta;
  };
  p.df = [](const double* u, const std::vector<double>& q, double* J) {
    double rho = q[0], gamma = q[3];
    double v2 = u[1], l2 = u[3];
    double row[16] = {0, 0, 1 / gamma, 0,
                      1, -(1 - 2 * v2), 0, 0,
                      0, 0, rho, -1,
                      0, -2 * l2, 0, rho + 1 - 2 * v2};
    std::copy(row, row + 16, J);
  };
  p.bc = BcSpec::neumann(4, 1);
  return p;
}

Discretization ocpol(int nx, const OcParams& o) {
  return Discretization(oc_problem(o), build_grid(1, {nx}, {{-M_PI / 2, M_PI / 2}}));
}

double oc_current_value(const OcParams& p, const double* u) {
  double k = -(1 + u[2]) / p.gamma;
  return p.p * u[0] - p.beta * u[1] - (k + k * k / (2 * p.gamma));
}

OcCss oc_css(const OcParams& p) {
  OcCss c;
  double z = 0.5 * (1 + p.rho - p.beta / (p.p + p.rho));
  c.u = {z * (1 - z), z, -1.0, -(p.p + p.rho)};
  c.value = oc_current_value(p, c.u.data()) / p.rho;
  return c;
}

double oc_hopf_condition(const OcParams& p, double l) {
  double z = 0.5 * (1 + p.rho - p.beta / (p.p + p.rho));
  double da = 1 - 2 * z, l2 = l * l;
  return -(da + p.d2 * l2) * (p.rho + da + p.d2 * l2) - p.d1 * l2 * (p.rho + p.d1 * l2);
}

double oc_average_value(const Discretization& disc, const OcParams& p, const Vec& u) {
  int np = disc.grid().np;
  Vec jc(np);
  double node[4];
  for (int i = 0; i < np; ++i) {
    for (int c = 0; c < 4; ++c) node[c] = u[c * np + i];
    jc[i] = oc_current_value(p, node);
  }
  return (disc.scalar_mass() * jc).sum() / disc.grid().measure();
}

double oc_orbit_value(const Discretization& disc, const OcParams& p, const PeriodicOrbit& orb, double phi) {
  int m = orb.m;
  std::vector<double> g(m);
  for (int j = 0; j < m; ++j) g[j] = oc_average_value(disc, p, orb.slice(j));
  // periodic piecewise linear interpolation of the averaged current value in rescaled time
  auto at = [&](double s) {
    s -= std::floor(s);
    int j = 0;
    while (j + 2 < m && orb.t[j + 1] <= s) ++j;
    double w = (s - orb.t[j]) / orb.h(j);
    return (1 - w) * g[j] + w * g[j + 1];
  };
  double rho = orb.lam, T = orb.T;
  int N = 8 * (m - 1);
  double num = 0, den = 0;
  for (int i = 0; i <= N; ++i) {
    double s = double(i) / N;
    double w = ((i == 0 || i == N) ? 0.5 : 1.0) * std::exp(-rho * T * s);
    num += w * at(s + phi);
    den += w;
  }
  // the discount weight integrates to 1/rho exactly; normalizing by its quadrature keeps constants exact
  return num / den / rho;
}

// ---------------------------------------------------------------- Stuart-Landau

OdeSystem stuart_landau(double omega, cplx ell) {
  OdeSystem s;
  s.n = 2;
  s.M = Mat::Identity(2, 2).sparseView();
  double lr = ell.real(), li = ell.imag();
  s.f = [=](const Vec& u, double lam) {
    double x = u[0], y = u[1], q = x * x + y * y;
    Vec f(2);
    f << lam * x - omega * y + q * (lr * x - li * y), omega * x + lam * y + q * (li * x + lr * y);
    return f;
  };
  s.df = [=](const Vec& u, double lam) {
    double x = u[0], y = u[1], q = x * x + y * y;
    double a = lr * x - li * y, b = li * x + lr * y;
    Mat J(2, 2);
    J << lam + 2 * x * a + q * lr, -omega + 2 * y * a - q * li,
        omega + 2 * x * b + q * li, lam + 2 * y * b + q * lr;
    return J;
  };
  return s;
}

// ---------------------------------------------------------------- registry

namespace {

double get(const std::map<std::string, double>& o, const std::string& k, double def) {
  auto it = o.find(k);
  return it == o.end() ? def : it->second;
}

void check_keys(const std::map<std::string, double>& o, const std::vector<std::string>& allowed,
                const std::string& model) {
  for (const auto& [k, v] : o) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
      throw ConfigError("unknown parameter '" + k + "' for model " + model);
    if (!std::isfinite(v)) throw ConfigError("parameter '" + k + "' is not finite");
  }
}

}  // namespace

ModelSetup make_model(const std::string& name, const std::map<std::string, double>& o) {
  if (name == "cgl1d" || name == "cgl2d") {
    bool two = name == "cgl2d";
    check_keys(o, {"r", "nu", "c3", "mu", "c5", "nx", "ny", "lx", "ly", "spring"}, name);
    CglParams c;
    c.r = get(o, "r", two ? 1.0 : -0.2);
    c.nu = get(o, "nu", c.nu);
    c.c3 = get(o, "c3", c.c3);
    c.mu = get(o, "mu", c.mu);
    c.c5 = get(o, "c5", c.c5);
    Discretization d = two ? cgl2d((int)get(o, "nx", 41), (int)get(o, "ny", 21), get(o, "lx", 1), get(o, "ly", 0.5), c,
                                   get(o, "spring", 1e3))
                           : cgl1d((int)get(o, "nx", 31), get(o, "lx", 1), c);
    Vec u0 = Vec::Zero(d.size());
    return ModelSetup{name, std::move(d), u0, c.r, "r"};
  }
  if (name == "bruss1d" || name == "bruss2d") {
    bool two = name == "bruss2d";
    check_keys(o, {"a", "b", "c", "d", "Du", "Dv", "Dw", "nx", "ny", "lx", "ly"}, name);
    BrussParams b;
    b.a = get(o, "a", b.a);
    b.b = get(o, "b", 2.7);
    b.c = get(o, "c", b.c);
    b.d = get(o, "d", b.d);
    b.Du = get(o, "Du", b.Du);
    b.Dv = get(o, "Dv", b.Dv);
    b.Dw = get(o, "Dw", b.Dw);
    if (b.a <= 0) throw ConfigError("Brusselator needs a > 0");
    Discretization d = two ? bruss2d((int)get(o, "nx", 31), (int)get(o, "ny", 9), get(o, "lx", M_PI / 2),
                                     get(o, "ly", M_PI / 8), b)
                           : bruss1d((int)get(o, "nx", 101), get(o, "lx", 0.5 * M_PI / 0.7), b);
    Vec u0 = bruss_homogeneous(b, d.grid().np);
    return ModelSetup{name, std::move(d), u0, b.b, "b"};
  }
  if (name == "ocpol") {
    check_keys(o, {"rho", "p", "beta", "gamma", "d1", "d2", "nx"}, name);
    OcParams p;
    p.rho = get(o, "rho", p.rho);
    p.p = get(o, "p", p.p);
    p.beta = get(o, "beta", p.beta);
    p.gamma = get(o, "gamma", p.gamma);
    p.d1 = get(o, "d1", p.d1);
    p.d2 = get(o, "d2", p.d2);
    if (p.rho <= 0 || p.p + p.rho <= 0) throw ConfigError("OC model needs rho > 0 and p + rho > 0");
    Discretization d = ocpol((int)get(o, "nx", 41), p);
    int np = d.grid().np;
    OcCss c = oc_css(p);
    Vec u0(4 * np);
    for (int k = 0; k < 4; ++k) u0.segment(k * np, np).setConstant(c.u[k]);
    return ModelSetup{name, std::move(d), u0, p.rho, "rho"};
  }
  throw ConfigError("unknown model '" + name + "' (expected cgl1d, cgl2d, bruss1d, bruss2d, ocpol)");
}

}  // namespace pdehopf
