#include "uvlab/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

namespace uvlab {

namespace {

Eigen::VectorXcd ones_start(std::size_t dim) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Ones(static_cast<Eigen::Index>(dim));
  v /= v.norm();
  return v;
}

}  // namespace

IterResult implicit_operator_norm(
    std::size_t dim,
    const std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>& apply,
    const std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>& apply_adjoint,
    double tol, int max_iter) {
  IterResult res;
  if (dim == 0) return res;
  Eigen::VectorXcd v = ones_start(dim);
  double sigma2 = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    Eigen::VectorXcd w = apply_adjoint(apply(v));
    const double next = w.norm();
    res.iterations = it;
    if (next == 0.0) {
      res.value = 0.0;
      res.residual = 0.0;
      return res;
    }
    w /= next;
    res.residual = (w - v).norm();
    const double rel = std::abs(next - sigma2) / std::max(next, 1e-300);
    sigma2 = next;
    v = std::move(w);
    if (rel <= tol && res.residual <= std::sqrt(tol)) {
      res.value = std::sqrt(sigma2);
      return res;
    }
  }
  res.value = std::sqrt(sigma2);
  res.converged = false;
  return res;
}

double operator_norm(const SparseOperator& a, double tol, int max_iter) {
  if (a.dim == 0) return 0.0;
  if (a.dim <= 2048) {
    if (a.mat.nonZeros() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a.dense());
    return svd.singularValues()(0);
  }
  const auto& m = a.mat;
  const SparseMat madj = m.adjoint();
  auto res = implicit_operator_norm(
      a.dim,
      [&](const Eigen::VectorXcd& x) { return Eigen::VectorXcd(m * x); },
      [&](const Eigen::VectorXcd& x) { return Eigen::VectorXcd(madj * x); },
      tol, max_iter);
  return res.value;
}

IterResult smallest_eigenvalue(const SparseOperator& h, double tol, int max_iter) {
  if (!h.hermitian)
    throw std::invalid_argument("smallest_eigenvalue: operator must be Hermitian");
  IterResult res;
  const auto n = static_cast<Eigen::Index>(h.dim);
  if (n == 0) return res;

  if (n < 2048) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h.dense());
    res.value = es.eigenvalues()(0);
    res.residual = 0.0;
    res.iterations = 1;
    return res;
  }

  // Lanczos with full reorthogonalization, deterministic all-ones start.
  const int max_krylov = std::min<int>(max_iter, std::min<Eigen::Index>(n, 400));
  std::vector<Eigen::VectorXcd> basis;
  std::vector<double> alpha, beta;
  basis.push_back(ones_start(h.dim));
  double prev_ritz = 0.0;
  for (int j = 0; j < max_krylov; ++j) {
    Eigen::VectorXcd w = h.mat * basis[j];
    const double a_j = std::real(basis[j].dot(w));
    alpha.push_back(a_j);
    w -= a_j * basis[j];
    if (j > 0) w -= beta[j - 1] * basis[j - 1];
    for (const auto& u : basis) w -= u.dot(w) * u;  // full reorthogonalization
    const double b_j = w.norm();
    res.iterations = j + 1;

    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(j + 1, j + 1);
    for (int i = 0; i <= j; ++i) tri(i, i) = alpha[i];
    for (int i = 0; i < j; ++i) tri(i, i + 1) = tri(i + 1, i) = beta[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
    const double ritz = es.eigenvalues()(0);
    const double resid_est = b_j * std::abs(es.eigenvectors()(j, 0));

    if (b_j < 1e-14 || resid_est <= tol * std::max(1.0, std::abs(ritz))) {
      Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n);
      for (int i = 0; i <= j; ++i) v += es.eigenvectors()(i, 0) * basis[i];
      v /= v.norm();
      res.value = ritz;
      res.residual = (h.mat * v - ritz * v).norm();
      return res;
    }
    prev_ritz = ritz;
    beta.push_back(b_j);
    basis.push_back(w / b_j);
  }
  res.value = prev_ritz;
  res.residual = tol * 10;  // not converged to requested tolerance
  res.converged = false;
  return res;
}

}  // namespace uvlab
