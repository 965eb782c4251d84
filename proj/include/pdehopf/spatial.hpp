#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "pdehopf/system.hpp"

namespace pdehopf {

struct Grid {
  int dim = 1;
  std::vector<int> n;
  std::vector<double> lo, hi;
  int np = 0;
  std::vector<double> x, y;  // per-node coordinates, y empty in 1D

  double h(int axis) const { return (hi[axis] - lo[axis]) / (n[axis] - 1); }
  double measure() const;
  int node(int i, int j = 0) const { return i + n[0] * j; }
};

Grid build_grid(int dim, const std::vector<int>& counts,
                const std::vector<std::pair<double, double>>& bounds);

enum class BcKind { Neumann, Robin, Spring };

struct FaceBc {
  BcKind kind = BcKind::Neumann;
  double q = 0, g = 0;             // Robin: n.(d grad u) + q u = g
  double target = 0, spring = 1e3;  // stiff spring towards target
};

// faces: 1D {left, right}; 2D {x-low, x-high, y-low, y-high}
struct BcSpec {
  std::vector<std::vector<FaceBc>> faces;  // [component][face]

  static BcSpec neumann(int ncomp, int dim);
  static BcSpec dirichlet(int ncomp, int dim, double target = 0, double spring = 1e3);
};

SpMat assemble_mass(const Grid& g, bool lumped = false);

struct Stiffness {
  SpMat K;  // Laplacian stiffness, annihilates constants
  SpMat Q;  // boundary mass weighted by q (or spring constant)
  Vec rhs;  // boundary load
};

Stiffness assemble_stiffness(const Grid& g, const BcSpec& bc, int component);

// nodewise reaction u -> f(u) and its row-major Jacobian
using ReactionFn = std::function<void(const double* u, const std::vector<double>& p, double* f)>;
using ReactionJacFn = std::function<void(const double* u, const std::vector<double>& p, double* J)>;

struct PdeProblem {
  int ncomp = 1;
  std::vector<double> diff;
  ReactionFn f;
  ReactionJacFn df;
  std::vector<double> params;
  int active = 0;
  BcSpec bc;
};

// max relative deviation of df from central differences of f on random probes
double reaction_selftest(const PdeProblem& p, int probes = 20, unsigned seed = 7);

class Discretization : public System {
 public:
  Discretization(PdeProblem prob, Grid grid, bool lumped = false);

  int size() const override { return n_; }
  const SpMat& mass() const override { return MN_; }
  Vec residual(const Vec& u, double lam) const override;
  SpMat jacobian(const Vec& u, double lam) const override;
  double measure() const override { return grid_.measure(); }
  int components() const override { return prob_.ncomp; }

  const Grid& grid() const { return grid_; }
  const PdeProblem& problem() const { return prob_; }
  const SpMat& scalar_mass() const { return M_; }
  const SpMat& diffusion_operator() const { return KD_; }
  std::vector<double> params_at(double lam) const;
  Vec reaction(const Vec& u, double lam) const;

 private:
  PdeProblem prob_;
  Grid grid_;
  int n_;
  SpMat M_, MN_, KD_;
  Vec rhs_;
};

// block-diagonal replication of a scalar matrix across components
SpMat block_replicate(const SpMat& A, int ncomp);

// relative error of the Jacobian against central differences along random directions
double jacobian_fd_error(const System& sys, const Vec& u, double lam, int dirs = 5, unsigned seed = 11);

}  // namespace pdehopf
