#pragma once

#include <string>
#include <vector>

#include "isoshell/experiments.hpp"

namespace isoshell {

/// Maximum relative quadrature error over all monomials of total degree <= 6
/// on a set of affine-mapped triangles, against closed-form integrals.
double quadrature_exactness_error();

/// Maximum error of theta / grad_theta against the exact gradient / Hessian
/// of quadratic polynomials over all elements of a two-level mesh.
double quadratic_reproduction_error();

/// Finite-difference consistency errors of the analytic variations on one
/// example geometry (central differences on randomly perturbed fields).
struct DerivativeErrors {
  double grad = 0.0;       // energy gradient vs FD of the energy
  double hess = 0.0;       // energy Hessian vs FD of the gradient
  double normal_first = 0.0;
  double normal_second = 0.0;
};

DerivativeErrors derivative_fd_errors(int example_id, int n_directions, unsigned seed);

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// The fast property suite behind `isoshell verify`.
std::vector<CheckResult> run_property_suite(unsigned seed = 20240817);

}  // namespace isoshell
