#pragma once

#include <Eigen/Dense>
#include <functional>

#include "uvlab/fock.hpp"

namespace uvlab {

/// Result of an iterative norm/eigenvalue computation.
struct IterResult {
  double value = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = true;
};

/// Spectral norm. Dense SVD for dim <= 2048, otherwise power iteration on
/// A^dagger A (tolerance 1e-8, iteration cap 1e4).
double operator_norm(const SparseOperator& a, double tol = 1e-8,
                     int max_iter = 10000);

/// Spectral norm of an implicitly applied linear map on C^dim. Power iteration
/// on A^dagger A, so `apply_adjoint` must implement the true adjoint.
IterResult implicit_operator_norm(
    std::size_t dim,
    const std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>& apply,
    const std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>& apply_adjoint,
    double tol = 1e-8, int max_iter = 10000);

/// Smallest eigenvalue of a Hermitian operator. Dense below dim 2048,
/// otherwise Lanczos with full reorthogonalization and a deterministic
/// all-ones start vector.
IterResult smallest_eigenvalue(const SparseOperator& h, double tol = 1e-9,
                               int max_iter = 10000);

}  // namespace uvlab
