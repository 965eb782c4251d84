#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace pdehopf {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using SpMat = Eigen::SparseMatrix<double>;
using CSpMat = Eigen::SparseMatrix<cplx>;
using Triplet = Eigen::Triplet<double>;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid user input: grid sizes, parameter values, unknown names.
struct ConfigError : Error {
  using Error::Error;
};

// Non-finite values in a model evaluation; index is the offending node or slice.
struct EvaluationError : Error {
  EvaluationError(const std::string& what, long idx) : Error(what), index(idx) {}
  long index;
};

struct SolverError : Error {
  using Error::Error;
};

}  // namespace pdehopf
