#include "linkopt/dense.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace linkopt::dense {

namespace {

void check_dim(Eigen::Index n) {
  if (n > kMaxDim) throw std::invalid_argument("dense oracle limited to n <= 200");
}

double inf_norm(const Eigen::MatrixXd& m) {
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace

Eigen::MatrixXd to_dense(const SparseMatrix& m) {
  check_dim(m.n());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m.n(), m.n());
  for (int i = 0; i < m.n(); ++i)
    for (std::size_t k = m.row_ptr()[i]; k < m.row_ptr()[i + 1]; ++k)
      d(i, m.col_idx()[k]) = m.values()[k];
  return d;
}

Eigen::MatrixXd drazin_dense(const Eigen::MatrixXd& M, double lambda) {
  const Eigen::Index n = M.rows();
  check_dim(n);
  Eigen::EigenSolver<Eigen::MatrixXd> es(M);
  const auto& evs = es.eigenvalues();
  double scale = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) scale = std::max(scale, std::abs(evs[i]));
  scale = std::max(scale, 1.0);

  Eigen::Index best = -1;
  double best_dist = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = std::abs(evs[i] - std::complex<double>(lambda, 0.0));
    if (d < best_dist) {
      best_dist = d;
      best = i;
    }
  }
  if (best_dist > 1e-6 * scale) throw std::invalid_argument("lambda is not an eigenvalue of M");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i == best) continue;
    if (std::abs(evs[i] - evs[best]) < 1e-8 * scale)
      throw std::invalid_argument("eigenvalue cluster detected: lambda is not simple");
  }

  Eigen::VectorXcd uc = es.eigenvectors().col(best);
  if (uc.imag().cwiseAbs().maxCoeff() > 1e-10 * uc.norm())
    throw std::invalid_argument("eigenvector for lambda is not real");
  Eigen::VectorXd u = uc.real();

  Eigen::EigenSolver<Eigen::MatrixXd> est(M.transpose());
  Eigen::Index bl = -1;
  double bld = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = std::abs(est.eigenvalues()[i] - std::complex<double>(lambda, 0.0));
    if (d < bld) {
      bld = d;
      bl = i;
    }
  }
  Eigen::VectorXd v = est.eigenvectors().col(bl).real();
  const double vu = v.dot(u);
  if (std::abs(vu) < 1e-12 * v.norm() * u.norm())
    throw std::invalid_argument("left/right eigenvectors nearly orthogonal; lambda not simple");
  v /= vu;

  const Eigen::MatrixXd P = u * v.transpose();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  // (M - lambda I + P)^{-1} (I - P) equals the group inverse for simple lambda.
  return (M - lambda * I + P).partialPivLu().solve(I - P);
}

std::vector<double> solve_bordered(const Eigen::MatrixXd& M, double lambda,
                                   const std::vector<double>& u,
                                   const std::vector<double>& grad_n,
                                   const std::vector<double>& grad_f) {
  const Eigen::Index n = M.rows();
  check_dim(n);
  Eigen::MatrixXd B(n + 1, n + 1);
  B.topLeftCorner(n, n) = M - lambda * Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    B(i, n) = -u[i];
    B(n, i) = grad_n[i];
  }
  B(n, n) = 0.0;

  Eigen::VectorXd rhs(n + 1);
  for (Eigen::Index i = 0; i < n; ++i) rhs[i] = -grad_f[i];
  rhs[n] = 0.0;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(B.transpose());
  if (!lu.isInvertible())
    throw std::runtime_error("bordered system singular: lambda not simple or normalization invalid");
  Eigen::VectorXd sol = lu.solve(rhs);
  return {sol.data(), sol.data() + n};
}

CertifiedBound certified_eigen_bound(const Eigen::MatrixXd& M, const std::vector<double>& x,
                                     double lambda, const std::vector<double>& p) {
  const Eigen::Index n = M.rows();
  check_dim(n);
  Eigen::Map<const Eigen::VectorXd> xv(x.data(), n), pv(p.data(), n);
  if (std::abs(pv.dot(xv) - 1.0) > 1e-8)
    throw std::invalid_argument("certified bound requires p^T x = 1");

  Eigen::MatrixXd B(n + 1, n + 1);
  B.topLeftCorner(n, n) = M - lambda * Eigen::MatrixXd::Identity(n, n);
  B.col(n).head(n) = -xv;
  B.row(n).head(n) = pv.transpose();
  B(n, n) = 0.0;

  CertifiedBound out;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
  const Eigen::MatrixXd C = lu.solve(Eigen::MatrixXd::Identity(n + 1, n + 1));
  if (!C.allFinite()) return out;  // bound unavailable

  Eigen::VectorXd res(n + 1);
  res.head(n) = M * xv - lambda * xv;
  res[n] = 0.0;
  out.eta = (C * res).cwiseAbs().maxCoeff();
  out.sigma = inf_norm(Eigen::MatrixXd::Identity(n + 1, n + 1) - C * B);
  out.tau = inf_norm(C);
  out.delta = (1.0 - out.sigma) * (1.0 - out.sigma) - 4.0 * out.eta * out.tau;
  if (out.sigma >= 1.0 || out.delta < 0.0) return out;  // bound unavailable
  out.beta = 2.0 * out.eta / (1.0 - out.sigma + std::sqrt(out.delta));
  out.available = true;
  return out;
}

DensePerron dense_perron(const Eigen::MatrixXd& M, const NormalizationSpec& N) {
  const Eigen::Index n = M.rows();
  check_dim(n);
  Eigen::EigenSolver<Eigen::MatrixXd> es(M);
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < n; ++i)
    if (es.eigenvalues()[i].real() > es.eigenvalues()[best].real()) best = i;

  DensePerron out;
  out.rho = es.eigenvalues()[best].real();
  double second = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (i != best) second = std::max(second, std::abs(es.eigenvalues()[i]));
  out.gap = out.rho > 0.0 ? second / out.rho : 0.0;

  Eigen::VectorXd u = es.eigenvectors().col(best).real();
  if (u.sum() < 0.0) u = -u;
  Eigen::EigenSolver<Eigen::MatrixXd> est(M.transpose());
  Eigen::Index bl = 0;
  for (Eigen::Index i = 1; i < n; ++i)
    if (est.eigenvalues()[i].real() > est.eigenvalues()[bl].real()) bl = i;
  Eigen::VectorXd v = est.eigenvectors().col(bl).real();
  if (v.sum() < 0.0) v = -v;

  out.u.assign(u.data(), u.data() + n);
  const double nu = N.value(out.u);
  for (double& x : out.u) x /= nu;
  u /= nu;
  v /= v.dot(u);
  out.v.assign(v.data(), v.data() + n);
  return out;
}

double spectral_radius(const Eigen::MatrixXd& M) {
  check_dim(M.rows());
  return Eigen::EigenSolver<Eigen::MatrixXd>(M, false).eigenvalues().cwiseAbs().maxCoeff();
}

bool log_convexity_check(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double t) {
  if (t < 0.0 || t > 1.0) throw std::invalid_argument("t must lie in [0,1]");
  Eigen::MatrixXd C(A.rows(), A.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      C(i, j) = std::pow(A(i, j), t) * std::pow(B(i, j), 1.0 - t);
  const double rc = spectral_radius(C);
  const double bound = std::pow(spectral_radius(A), t) * std::pow(spectral_radius(B), 1.0 - t);
  return rc <= bound + 1e-12 * rc;
}

}  // namespace linkopt::dense
