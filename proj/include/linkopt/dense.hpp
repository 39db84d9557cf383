#pragma once

#include <Eigen/Dense>
#include <vector>

#include "linkopt/normalization.hpp"
#include "linkopt/sparse.hpp"

namespace linkopt::dense {

/// Dense routines are oracles for tests, small instances and the benchmark's
/// direct-resolution strategy; they refuse matrices beyond this size.
inline constexpr int kMaxDim = 200;

Eigen::MatrixXd to_dense(const SparseMatrix& m);

/// Group (Drazin) inverse S = (M - lambda I)^# for a simple eigenvalue lambda:
/// S(M - lambda I) = (M - lambda I)S = I - P and SP = PS = 0, with P the
/// spectral projector.  Computed as (M - lambda I + P)^{-1} (I - P).
/// Throws if lambda is not a (numerically) simple eigenvalue of M.
Eigen::MatrixXd drazin_dense(const Eigen::MatrixXd& M, double lambda);

/// Solves the bordered system
///   [w^T, w_{n+1}] [[M - lambda I, -u], [grad_N^T, 0]] = [-grad_f^T, 0]
/// and returns w, i.e. w^T = (-grad_f^T + (grad_f . u) grad_N^T)(M - lambda I)^#.
std::vector<double> solve_bordered(const Eigen::MatrixXd& M, double lambda,
                                   const std::vector<double>& u,
                                   const std::vector<double>& grad_n,
                                   const std::vector<double>& grad_f);

/// A posteriori existence certificate for an approximate eigenpair.
struct CertifiedBound {
  bool available = false;
  double eta = 0.0, sigma = 0.0, tau = 0.0, delta = 0.0, beta = 0.0;
};

/// For the bordered matrix B = [[M - lambda I, -x], [p^T, 0]] with C = B^{-1},
/// computes eta = ||C [Mx - lambda x; 0]||_inf, sigma = ||I - CB||_inf,
/// tau = ||C||_inf and Delta = (1 - sigma)^2 - 4 eta tau.  When sigma < 1 and
/// Delta >= 0, a unique eigenpair (x*, lambda*) with p^T x* = 1 exists within
/// beta = 2 eta / (1 - sigma + sqrt(Delta)) of (x, lambda) in the inf-norm.
/// Otherwise the bound is reported unavailable (no exception).
CertifiedBound certified_eigen_bound(const Eigen::MatrixXd& M, const std::vector<double>& x,
                                     double lambda, const std::vector<double>& p);

/// Exact Perron triple by dense eigendecomposition; u normalized by N, v^T u = 1.
struct DensePerron {
  double rho = 0.0;
  std::vector<double> u, v;
  double gap = 0.0;  // |lambda_2| / rho
};
DensePerron dense_perron(const Eigen::MatrixXd& M, const NormalizationSpec& N);

double spectral_radius(const Eigen::MatrixXd& M);

/// Checks rho(C) <= rho(A)^t rho(B)^(1-t) with C_ij = A_ij^t B_ij^(1-t)
/// (relative slack 1e-12): the Perron root is log-convex in the log of the
/// entries, so this must hold for every nonnegative same-pattern pair.
bool log_convexity_check(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double t);

}  // namespace linkopt::dense
