#pragma once

#include "pdehopf/types.hpp"

namespace pdehopf {

// Semi-discrete system M u' = -G(u, lambda).
class System {
 public:
  virtual ~System() = default;

  virtual int size() const = 0;
  virtual const SpMat& mass() const = 0;
  virtual Vec residual(const Vec& u, double lam) const = 0;
  virtual SpMat jacobian(const Vec& u, double lam) const = 0;

  // dG/dlambda, centered difference by default
  virtual Vec dlam(const Vec& u, double lam) const;

  // measure of the spatial domain used by the branch norm
  virtual double measure() const { return 1.0; }
  virtual int components() const { return 1; }
};

}  // namespace pdehopf
