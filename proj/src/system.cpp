#include "pdehopf/system.hpp"

#include <algorithm>
#include <cmath>

namespace pdehopf {

Vec System::dlam(const Vec& u, double lam) const {
  double h = 1e-6 * std::max(1.0, std::abs(lam));
  return (residual(u, lam + h) - residual(u, lam - h)) / (2 * h);
}

}  // namespace pdehopf
