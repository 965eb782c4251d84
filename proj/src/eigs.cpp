#include "pdehopf/eigs.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include <Eigen/SparseLU>

#include "pdehopf/givens.hpp"

namespace pdehopf {

namespace {

std::vector<int> order_by(const CVec& vals, const std::function<double(cplx)>& key) {
  std::vector<int> idx(vals.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return key(vals[a]) < key(vals[b]); });
  return idx;
}

// one implicitly shifted QR step on the leading m x m Hessenberg block, accumulating into Q
void shifted_qr_step(CMat& H, CMat& Q, int m, cplx mu) {
  std::vector<Givens> rot(m - 1);
  for (int i = 0; i < m; ++i) H(i, i) -= mu;
  for (int j = 0; j + 1 < m; ++j) {
    rot[j] = Givens::zeroing(H(j, j), H(j + 1, j));
    rot[j].left(H, j, j + 1, j, m);
    H(j + 1, j) = 0;
  }
  for (int j = 0; j + 1 < m; ++j) {
    rot[j].right(H, j, j + 1, 0, std::min(j + 2, m));
    rot[j].right(Q, j, j + 1);
  }
  for (int i = 0; i < m; ++i) H(i, i) += mu;
}

// extend an Arnoldi factorization from k to m columns (two-pass Gram-Schmidt)
void arnoldi_extend(const LinearOp& op, CMat& V, CMat& H, int k, int m, std::mt19937& rng) {
  int n = (int)V.rows();
  CVec w(n);
  for (int j = k; j < m; ++j) {
    op(V.col(j), w);
    CVec h = V.leftCols(j + 1).adjoint() * w;
    w -= V.leftCols(j + 1) * h;
    CVec h2 = V.leftCols(j + 1).adjoint() * w;
    w -= V.leftCols(j + 1) * h2;
    h += h2;
    H.col(j).head(j + 1) = h;
    double beta = w.norm();
    if (beta < 1e-14 * std::max(1.0, h.norm())) {
      // invariant subspace: restart with a random orthogonal direction
      std::normal_distribution<double> N;
      for (int i = 0; i < n; ++i) w[i] = cplx(N(rng), N(rng));
      for (int pass = 0; pass < 2; ++pass) w -= V.leftCols(j + 1) * (V.leftCols(j + 1).adjoint() * w);
      w.normalize();
      H(j + 1, j) = 0;
      V.col(j + 1) = w;
      continue;
    }
    H(j + 1, j) = beta;
    V.col(j + 1) = w / beta;
  }
}

}  // namespace

ArnoldiResult arnoldi_largest(const LinearOp& op, int n, int nev, int ncv, double tol, int max_restarts,
                              unsigned seed) {
  if (nev < 1 || nev > n) throw ConfigError("arnoldi: invalid number of eigenvalues");
  if (ncv <= 0) ncv = std::max(2 * nev + 10, 30);
  ncv = std::min(ncv, n);
  if (ncv <= nev) ncv = std::min(n, nev + 1);
  std::mt19937 rng(seed);
  std::normal_distribution<double> N;
  CMat V = CMat::Zero(n, ncv + 1), H = CMat::Zero(ncv + 1, ncv);
  CVec v0(n);
  for (int i = 0; i < n; ++i) v0[i] = cplx(N(rng), N(rng));
  V.col(0) = v0.normalized();
  ArnoldiResult res;
  int k = 0;
  int keep = std::min(ncv - 1, nev + std::max(1, (ncv - nev) / 3));
  for (int it = 0; it <= max_restarts; ++it) {
    arnoldi_extend(op, V, H, k, ncv, rng);
    int m = ncv;
    Eigen::ComplexEigenSolver<CMat> es(H.topLeftCorner(m, m));
    CVec th = es.eigenvalues();
    std::vector<int> idx = order_by(th, [](cplx z) { return -std::abs(z); });
    double beta = std::abs(H(m, m - 1));
    bool ok = true;
    for (int i = 0; i < nev; ++i) {
      double r = beta * std::abs(es.eigenvectors()(m - 1, idx[i])) / es.eigenvectors().col(idx[i]).norm();
      if (r > tol * std::max(std::abs(th[idx[i]]), 1e-300)) ok = false;
    }
    if (ok || it == max_restarts || m == n) {
      res.converged = ok || m == n;
      res.restarts = it;
      res.theta.resize(nev);
      res.vectors.resize(n, nev);
      for (int i = 0; i < nev; ++i) {
        res.theta[i] = th[idx[i]];
        res.vectors.col(i) = (V.leftCols(m) * es.eigenvectors().col(idx[i])).normalized();
      }
      return res;
    }
    CMat Q = CMat::Identity(m, m);
    for (int i = m - 1; i >= keep; --i) shifted_qr_step(H, Q, m, th[idx[i]]);
    cplx hk = H(keep, keep - 1);
    CVec f = V.col(m) * H(m, m - 1);
    CMat Vn = V.leftCols(m) * Q.leftCols(keep + 1);
    CVec fn = Vn.col(keep) * hk + f * Q(m - 1, keep - 1);
    CMat Hn = CMat::Zero(ncv + 1, ncv);
    Hn.topLeftCorner(keep, keep) = H.topLeftCorner(keep, keep);
    V.setZero();
    V.leftCols(keep) = Vn.leftCols(keep);
    double b = fn.norm();
    for (int pass = 0; pass < 2; ++pass) fn -= V.leftCols(keep) * (V.leftCols(keep).adjoint() * fn);
    b = fn.norm();
    if (b < 1e-300) {
      for (int i = 0; i < n; ++i) fn[i] = cplx(N(rng), N(rng));
      for (int pass = 0; pass < 2; ++pass) fn -= V.leftCols(keep) * (V.leftCols(keep).adjoint() * fn);
      Hn(keep, keep - 1) = 0;
      V.col(keep) = fn.normalized();
    } else {
      Hn(keep, keep - 1) = b;
      V.col(keep) = fn / b;
    }
    H = Hn;
    k = keep;
  }
  return res;
}

EigPairs eigs_dense(const SpMat& A, const SpMat& M, bool want_vectors) {
  Mat Md(M), Ad(A);
  Eigen::LLT<Mat> llt(Md);
  if (llt.info() != Eigen::Success) throw SolverError("mass matrix not positive definite");
  Mat L = llt.matrixL();
  Mat C = L.triangularView<Eigen::Lower>().solve(Ad);
  C = L.triangularView<Eigen::Lower>().solve(C.transpose()).transpose();
  Eigen::EigenSolver<Mat> es(C, want_vectors);
  if (es.info() != Eigen::Success) throw SolverError("dense eigensolver failed");
  EigPairs out;
  out.values = es.eigenvalues();
  if (want_vectors) {
    CMat Y = es.eigenvectors();
    out.vectors = L.transpose().cast<cplx>().triangularView<Eigen::Upper>().solve(Y);
    for (int j = 0; j < out.vectors.cols(); ++j) out.vectors.col(j).normalize();
  }
  return out;
}

EigPairs eigs_near(const SpMat& A, const SpMat& M, cplx sigma, int n, bool want_vectors, int dense_limit) {
  int N = (int)A.rows();
  if (n < 1) throw ConfigError("eigs_near: need at least one eigenvalue");
  n = std::min(n, N);
  EigPairs out;
  if (N <= dense_limit) {
    EigPairs all = eigs_dense(A, M, want_vectors);
    std::vector<int> idx = order_by(all.values, [&](cplx z) { return std::abs(z - sigma); });
    out.values.resize(n);
    if (want_vectors) out.vectors.resize(N, n);
    for (int i = 0; i < n; ++i) {
      out.values[i] = all.values[idx[i]];
      if (want_vectors) out.vectors.col(i) = all.vectors.col(idx[i]);
    }
    return out;
  }
  CSpMat Mc = M.cast<cplx>();
  cplx s = sigma;
  for (int attempt = 0; attempt < 4; ++attempt) {
    CSpMat S = A.cast<cplx>() - s * Mc;
    S.makeCompressed();
    Eigen::SparseLU<CSpMat> lu;
    lu.compute(S);
    if (lu.info() != Eigen::Success) {
      s += 1e-6 * (1 + std::abs(s)) * cplx(1, 1);
      continue;
    }
    LinearOp op = [&](const CVec& x, CVec& y) { y = lu.solve(Mc * x); };
    ArnoldiResult ar = arnoldi_largest(op, N, n);
    if (!ar.converged) throw SolverError("shift-invert Arnoldi did not converge");
    out.values.resize(n);
    for (int i = 0; i < n; ++i) out.values[i] = s + 1.0 / ar.theta[i];
    std::vector<int> idx = order_by(out.values, [&](cplx z) { return std::abs(z - sigma); });
    CVec v = out.values;
    for (int i = 0; i < n; ++i) out.values[i] = v[idx[i]];
    if (want_vectors) {
      out.vectors.resize(N, n);
      for (int i = 0; i < n; ++i) out.vectors.col(i) = ar.vectors.col(idx[i]);
    }
    return out;
  }
  throw SolverError("shifted pencil is singular at the requested shift");
}

double eig_residual(const SpMat& A, const SpMat& M, cplx mu, const CVec& phi) {
  CVec r = A.cast<cplx>() * phi - mu * (M.cast<cplx>() * phi);
  return r.norm() / phi.norm();
}

}  // namespace pdehopf
