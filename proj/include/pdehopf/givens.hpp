#pragma once

#include <cmath>

#include "pdehopf/types.hpp"

namespace pdehopf {

// Unitary rotation G = [c s; -conj(s) c] with real c, chosen so G [a; b] = [r; 0].
struct Givens {
  double c = 1;
  cplx s = 0;

  static Givens zeroing(cplx a, cplx b) {
    Givens g;
    double aa = std::abs(a), bb = std::abs(b);
    if (bb == 0) return g;
    if (aa == 0) {
      g.c = 0;
      g.s = std::conj(b) / bb;
      return g;
    }
    double r = std::hypot(aa, bb);
    g.c = aa / r;
    g.s = (a / aa) * std::conj(b) / r;
    return g;
  }

  // rows i, j of X <- G applied from the left
  template <class M>
  void left(M& X, int i, int j, int c0 = 0, int c1 = -1) const {
    if (c1 < 0) c1 = (int)X.cols();
    for (int k = c0; k < c1; ++k) {
      cplx xi = X(i, k), xj = X(j, k);
      X(i, k) = c * xi + s * xj;
      X(j, k) = -std::conj(s) * xi + c * xj;
    }
  }

  // columns i, j of X <- X * G^H
  template <class M>
  void right(M& X, int i, int j, int r0 = 0, int r1 = -1) const {
    if (r1 < 0) r1 = (int)X.rows();
    for (int k = r0; k < r1; ++k) {
      cplx xi = X(k, i), xj = X(k, j);
      X(k, i) = c * xi + std::conj(s) * xj;
      X(k, j) = -s * xi + c * xj;
    }
  }
};

}  // namespace pdehopf

namespace pdehopf {

// rotation for right(): zeroes the left entry of the row pair (xl, xr)
inline Givens zeroing_right(cplx xl, cplx xr) {
  Givens g = Givens::zeroing(xr, xl);
  g.s = -g.s;
  return g;
}

}  // namespace pdehopf
