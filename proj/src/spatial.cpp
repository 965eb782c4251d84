#include "pdehopf/spatial.hpp"

#include <cmath>
#include <random>
#include <string>

namespace pdehopf {

double Grid::measure() const {
  double m = 1;
  for (int a = 0; a < dim; ++a) m *= hi[a] - lo[a];
  return m;
}

Grid build_grid(int dim, const std::vector<int>& counts,
                const std::vector<std::pair<double, double>>& bounds) {
  if (dim != 1 && dim != 2) throw ConfigError("grid dimension must be 1 or 2");
  if ((int)counts.size() != dim || (int)bounds.size() != dim)
    throw ConfigError("grid needs one count and one interval per axis");
  Grid g;
  g.dim = dim;
  g.np = 1;
  for (int a = 0; a < dim; ++a) {
    if (counts[a] < 3) throw ConfigError("grid needs at least 3 points per axis");
    if (!(bounds[a].first < bounds[a].second)) throw ConfigError("grid bounds must be ordered");
    g.n.push_back(counts[a]);
    g.lo.push_back(bounds[a].first);
    g.hi.push_back(bounds[a].second);
    g.np *= counts[a];
  }
  int ny = dim == 2 ? g.n[1] : 1;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < g.n[0]; ++i) {
      g.x.push_back(g.lo[0] + i * g.h(0));
      if (dim == 2) g.y.push_back(g.lo[1] + j * g.h(1));
    }
  return g;
}

BcSpec BcSpec::neumann(int ncomp, int dim) {
  BcSpec bc;
  bc.faces.assign(ncomp, std::vector<FaceBc>(2 * dim));
  return bc;
}

BcSpec BcSpec::dirichlet(int ncomp, int dim, double target, double spring) {
  if (!(spring > 0)) throw ConfigError("spring constant must be positive");
  FaceBc f;
  f.kind = BcKind::Spring;
  f.target = target;
  f.spring = spring;
  BcSpec bc;
  bc.faces.assign(ncomp, std::vector<FaceBc>(2 * dim, f));
  return bc;
}

namespace {

// 1D P1 mass and stiffness on a uniform axis
SpMat axis_mass(int n, double h) {
  std::vector<Triplet> t;
  for (int e = 0; e + 1 < n; ++e) {
    t.emplace_back(e, e, h / 3);
    t.emplace_back(e + 1, e + 1, h / 3);
    t.emplace_back(e, e + 1, h / 6);
    t.emplace_back(e + 1, e, h / 6);
  }
  SpMat A(n, n);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

SpMat axis_stiffness(int n, double h) {
  std::vector<Triplet> t;
  for (int e = 0; e + 1 < n; ++e) {
    t.emplace_back(e, e, 1 / h);
    t.emplace_back(e + 1, e + 1, 1 / h);
    t.emplace_back(e, e + 1, -1 / h);
    t.emplace_back(e + 1, e, -1 / h);
  }
  SpMat A(n, n);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

// P1 triangles on the tensor grid, each rectangle split along its (i,j)-(i+1,j+1) diagonal
void triangle_assembly(const Grid& g, SpMat* M, SpMat* K) {
  double hx = g.h(0), hy = g.h(1), area = 0.5 * hx * hy;
  std::vector<Triplet> tm, tk;
  auto add = [&](const int (&v)[3], const double (&px)[3], const double (&py)[3]) {
    // gradients of the barycentric functions
    double det = (px[1] - px[0]) * (py[2] - py[0]) - (px[2] - px[0]) * (py[1] - py[0]);
    double gx[3], gy[3];
    for (int a = 0; a < 3; ++a) {
      int b = (a + 1) % 3, c = (a + 2) % 3;
      gx[a] = (py[b] - py[c]) / det;
      gy[a] = (px[c] - px[b]) / det;
    }
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        if (M) tm.emplace_back(v[a], v[b], area / 12 * (a == b ? 2 : 1));
        if (K) tk.emplace_back(v[a], v[b], area * (gx[a] * gx[b] + gy[a] * gy[b]));
      }
  };
  for (int j = 0; j + 1 < g.n[1]; ++j)
    for (int i = 0; i + 1 < g.n[0]; ++i) {
      int a = g.node(i, j), b = g.node(i + 1, j), c = g.node(i + 1, j + 1), d = g.node(i, j + 1);
      double x0 = 0, x1 = hx, y0 = 0, y1 = hy;
      add({a, b, c}, {x0, x1, x1}, {y0, y0, y1});
      add({a, c, d}, {x0, x1, x0}, {y0, y1, y1});
    }
  if (M) {
    *M = SpMat(g.np, g.np);
    M->setFromTriplets(tm.begin(), tm.end());
  }
  if (K) {
    *K = SpMat(g.np, g.np);
    K->setFromTriplets(tk.begin(), tk.end());
    K->prune(1e-300, 1.0);
  }
}

SpMat lump(const SpMat& A) {
  Vec d = A * Vec::Ones(A.cols());
  SpMat L(A.rows(), A.cols());
  std::vector<Triplet> t;
  for (int i = 0; i < d.size(); ++i) t.emplace_back(i, i, d[i]);
  L.setFromTriplets(t.begin(), t.end());
  return L;
}

// nodes on a face with their 1D boundary mass (consistent and lumped)
struct FaceMass {
  std::vector<int> nodes;
  SpMat Mb;
};

FaceMass face_mass(const Grid& g, int face) {
  FaceMass fm;
  if (g.dim == 1) {
    fm.nodes.push_back(face == 0 ? 0 : g.n[0] - 1);
    fm.Mb = SpMat(1, 1);
    fm.Mb.insert(0, 0) = 1.0;
    return fm;
  }
  int axis = face < 2 ? 0 : 1;
  int other = 1 - axis;
  int fixed = face % 2 == 0 ? 0 : g.n[axis] - 1;
  for (int k = 0; k < g.n[other]; ++k)
    fm.nodes.push_back(axis == 0 ? g.node(fixed, k) : g.node(k, fixed));
  fm.Mb = axis_mass(g.n[other], g.h(other));
  return fm;
}

}  // namespace

SpMat assemble_mass(const Grid& g, bool lumped) {
  SpMat M;
  if (g.dim == 1)
    M = axis_mass(g.n[0], g.h(0));
  else
    triangle_assembly(g, &M, nullptr);
  return lumped ? lump(M) : M;
}

Stiffness assemble_stiffness(const Grid& g, const BcSpec& bc, int component) {
  Stiffness s;
  if (g.dim == 1) {
    s.K = axis_stiffness(g.n[0], g.h(0));
  } else {
    triangle_assembly(g, nullptr, &s.K);
  }
  s.rhs = Vec::Zero(g.np);
  std::vector<Triplet> t;
  if (component < (int)bc.faces.size()) {
    const auto& faces = bc.faces[component];
    for (int f = 0; f < (int)faces.size() && f < 2 * g.dim; ++f) {
      const FaceBc& fb = faces[f];
      if (fb.kind == BcKind::Neumann) continue;
      if (!std::isfinite(fb.q) || !std::isfinite(fb.g)) throw ConfigError("Robin coefficients must be finite");
      FaceMass fm = face_mass(g, f);
      SpMat Mb = fm.Mb;
      double q = fb.q, gv = fb.g;
      if (fb.kind == BcKind::Spring) {
        if (!(fb.spring > 0)) throw ConfigError("spring constant must be positive");
        Mb = lump(Mb);
        q = fb.spring;
        gv = fb.spring * fb.target;
      }
      Vec load = Mb * Vec::Constant(Mb.cols(), gv);
      for (int k = 0; k < Mb.outerSize(); ++k)
        for (SpMat::InnerIterator it(Mb, k); it; ++it)
          t.emplace_back(fm.nodes[it.row()], fm.nodes[it.col()], q * it.value());
      for (int a = 0; a < (int)fm.nodes.size(); ++a) s.rhs[fm.nodes[a]] += load[a];
    }
  }
  s.Q = SpMat(g.np, g.np);
  s.Q.setFromTriplets(t.begin(), t.end());
  return s;
}

SpMat block_replicate(const SpMat& A, int ncomp) {
  std::vector<Triplet> t;
  for (int c = 0; c < ncomp; ++c)
    for (int k = 0; k < A.outerSize(); ++k)
      for (SpMat::InnerIterator it(A, k); it; ++it)
        t.emplace_back(c * A.rows() + it.row(), c * A.cols() + it.col(), it.value());
  SpMat B(A.rows() * ncomp, A.cols() * ncomp);
  B.setFromTriplets(t.begin(), t.end());
  return B;
}

double reaction_selftest(const PdeProblem& p, int probes, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(-1, 1);
  int N = p.ncomp;
  std::vector<double> u(N), up(N), um(N), fp(N), fm(N), J(N * N);
  double worst = 0;
  for (int k = 0; k < probes; ++k) {
    for (auto& x : u) x = U(rng);
    p.df(u.data(), p.params, J.data());
    double scale = 0, err = 0;
    for (int c = 0; c < N; ++c) {
      double h = 1e-6 * std::max(1.0, std::abs(u[c]));
      up = u;
      um = u;
      up[c] += h;
      um[c] -= h;
      p.f(up.data(), p.params, fp.data());
      p.f(um.data(), p.params, fm.data());
      for (int r = 0; r < N; ++r) {
        double fd = (fp[r] - fm[r]) / (2 * h);
        err = std::max(err, std::abs(fd - J[r * N + c]));
        scale = std::max(scale, std::abs(J[r * N + c]));
      }
    }
    worst = std::max(worst, err / std::max(scale, 1e-12));
  }
  return worst;
}

Discretization::Discretization(PdeProblem prob, Grid grid, bool lumped)
    : prob_(std::move(prob)), grid_(std::move(grid)) {
  int N = prob_.ncomp;
  if (N < 1) throw ConfigError("need at least one component");
  if ((int)prob_.diff.size() != N) throw ConfigError("need one diffusion coefficient per component");
  if (prob_.active < 0 || prob_.active >= (int)prob_.params.size())
    throw ConfigError("active parameter index out of range");
  if (prob_.bc.faces.empty()) prob_.bc = BcSpec::neumann(N, grid_.dim);
  n_ = N * grid_.np;
  M_ = assemble_mass(grid_, lumped);
  MN_ = block_replicate(M_, N);
  std::vector<Triplet> t;
  rhs_ = Vec::Zero(n_);
  int np = grid_.np;
  for (int c = 0; c < N; ++c) {
    Stiffness s = assemble_stiffness(grid_, prob_.bc, c);
    SpMat Kc = prob_.diff[c] * s.K + s.Q;
    for (int k = 0; k < Kc.outerSize(); ++k)
      for (SpMat::InnerIterator it(Kc, k); it; ++it)
        t.emplace_back(c * np + it.row(), c * np + it.col(), it.value());
    rhs_.segment(c * np, np) = s.rhs;
  }
  KD_ = SpMat(n_, n_);
  KD_.setFromTriplets(t.begin(), t.end());
}

std::vector<double> Discretization::params_at(double lam) const {
  std::vector<double> p = prob_.params;
  p[prob_.active] = lam;
  return p;
}

Vec Discretization::reaction(const Vec& u, double lam) const {
  int N = prob_.ncomp, np = grid_.np;
  std::vector<double> p = params_at(lam), un(N), fn(N);
  Vec F(n_);
  for (int i = 0; i < np; ++i) {
    for (int c = 0; c < N; ++c) un[c] = u[c * np + i];
    prob_.f(un.data(), p, fn.data());
    for (int c = 0; c < N; ++c) {
      if (!std::isfinite(fn[c])) throw EvaluationError("non-finite reaction at node " + std::to_string(i), i);
      F[c * np + i] = fn[c];
    }
  }
  return F;
}

Vec Discretization::residual(const Vec& u, double lam) const {
  if (u.size() != n_) throw ConfigError("state has wrong length");
  return KD_ * u - MN_ * reaction(u, lam) - rhs_;
}

SpMat Discretization::jacobian(const Vec& u, double lam) const {
  if (u.size() != n_) throw ConfigError("state has wrong length");
  int N = prob_.ncomp, np = grid_.np;
  std::vector<double> p = params_at(lam), un(N), J(N * N);
  std::vector<double> nodal(np * N * N);
  for (int i = 0; i < np; ++i) {
    for (int c = 0; c < N; ++c) un[c] = u[c * np + i];
    prob_.df(un.data(), p, J.data());
    for (int k = 0; k < N * N; ++k) {
      if (!std::isfinite(J[k])) throw EvaluationError("non-finite reaction Jacobian at node " + std::to_string(i), i);
      nodal[i * N * N + k] = J[k];
    }
  }
  std::vector<Triplet> t;
  t.reserve(KD_.nonZeros() + M_.nonZeros() * N * N);
  for (int k = 0; k < KD_.outerSize(); ++k)
    for (SpMat::InnerIterator it(KD_, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < M_.outerSize(); ++k)
    for (SpMat::InnerIterator it(M_, k); it; ++it) {
      int i = it.row(), j = it.col();
      const double* Jj = &nodal[j * N * N];
      for (int c = 0; c < N; ++c)
        for (int d = 0; d < N; ++d)
          if (Jj[c * N + d] != 0.0) t.emplace_back(c * np + i, d * np + j, -it.value() * Jj[c * N + d]);
    }
  SpMat A(n_, n_);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

double jacobian_fd_error(const System& sys, const Vec& u, double lam, int dirs, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> Nd;
  SpMat J = sys.jacobian(u, lam);
  double worst = 0;
  for (int k = 0; k < dirs; ++k) {
    Vec v(u.size());
    for (int i = 0; i < v.size(); ++i) v[i] = Nd(rng);
    v.normalize();
    double h = 1e-6 * std::max(1.0, u.norm());
    Vec fd = (sys.residual(u + h * v, lam) - sys.residual(u - h * v, lam)) / (2 * h);
    Vec an = J * v;
    worst = std::max(worst, (fd - an).norm() / std::max({an.norm(), fd.norm(), 1e-12}));
  }
  return worst;
}

}  // namespace pdehopf
