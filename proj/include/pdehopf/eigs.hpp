#pragma once

#include <functional>

#include "pdehopf/types.hpp"

namespace pdehopf {

struct EigPairs {
  CVec values;   // sorted by distance to the shift
  CMat vectors;  // unit 2-norm columns, empty if not requested
};

// n eigenpairs of mu M phi = A phi closest to sigma
EigPairs eigs_near(const SpMat& A, const SpMat& M, cplx sigma, int n, bool want_vectors = true,
                   int dense_limit = 600);

// all generalized eigenvalues (and optionally vectors) of a small pencil with SPD M
EigPairs eigs_dense(const SpMat& A, const SpMat& M, bool want_vectors);

struct ArnoldiResult {
  CVec theta;
  CMat vectors;
  bool converged = false;
  int restarts = 0;
};

using LinearOp = std::function<void(const CVec& x, CVec& y)>;

// largest-magnitude eigenvalues of op by implicitly restarted Arnoldi with exact shifts
ArnoldiResult arnoldi_largest(const LinearOp& op, int n, int nev, int ncv = 0, double tol = 1e-12,
                              int max_restarts = 300, unsigned seed = 1);

// ||A phi - mu M phi|| / ||phi||
double eig_residual(const SpMat& A, const SpMat& M, cplx mu, const CVec& phi);

}  // namespace pdehopf
