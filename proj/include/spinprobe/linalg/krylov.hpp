// krylov.hpp: Lanczos lowest eigenpair and Krylov action of exp(-i tau H).
//
// Both routines only see the operator through a matvec callable, so the same
// code drives the sparse exact backend and the MPS effective Hamiltonians.

#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace spinprobe::linalg {

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

struct LanczosOptions {
  int krylov_dim{40};
  int max_restarts{60};
  double tol{1e-11};  // on ||H x - theta x||
  bool throw_on_failure{true};  // otherwise return the last Ritz pair
};

template <class Vector>
struct EigenPair {
  double value{0.0};
  Vector vector;
  double residual{0.0};
  int matvecs{0};
};

namespace detail {

// Gram-Schmidt twice against the stored basis.
template <class Vector>
void reorthogonalize(Vector& w, const std::vector<Vector>& basis) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& v : basis) w -= v * v.dot(w);
  }
}

inline Eigen::MatrixXd tridiagonal(const std::vector<double>& alpha,
                                   const std::vector<double>& beta, int k) {
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    t(i, i) = alpha[i];
    if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = beta[i];
  }
  return t;
}

}  // namespace detail

/// Lowest eigenpair of a Hermitian operator. Restarted Lanczos with full
/// reorthogonalization; throws ConvergenceError with the final residual.
template <class Vector, class MatVec>
EigenPair<Vector> lanczos_lowest(MatVec&& apply, Vector start, const LanczosOptions& opt = {}) {
  const double n0 = start.norm();
  if (!(n0 > 0.0)) throw std::invalid_argument("lanczos_lowest: zero start vector");
  start /= n0;
  const Eigen::Index n = start.size();
  EigenPair<Vector> out;
  double residual = 0.0;
  for (int restart = 0; restart <= opt.max_restarts; ++restart) {
    std::vector<Vector> basis{start};
    std::vector<double> alpha, beta;
    const int m = static_cast<int>(std::min<Eigen::Index>(opt.krylov_dim, n));
    Eigen::VectorXd y;
    double theta = 0.0;
    bool breakdown = false;
    for (int j = 0; j < m; ++j) {
      Vector w = apply(basis[j]);
      ++out.matvecs;
      const double a = std::real(basis[j].dot(w));
      alpha.push_back(a);
      detail::reorthogonalize(w, basis);
      const double b = w.norm();
      const int k = j + 1;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(detail::tridiagonal(alpha, beta, k));
      theta = es.eigenvalues()(0);
      y = es.eigenvectors().col(0);
      residual = b * std::abs(y(k - 1));
      const double scale = std::max(1.0, std::abs(theta));
      if (b <= 1e-14 * scale) {
        breakdown = true;
        residual = 0.0;
        break;
      }
      if (residual <= opt.tol || j + 1 == m) break;
      beta.push_back(b);
      basis.push_back(w / b);
    }
    Vector x = Vector::Zero(n);
    for (Eigen::Index i = 0; i < y.size(); ++i) x += basis[i] * y(i);
    x /= x.norm();
    out.value = theta;
    out.vector = x;
    out.residual = residual;
    if (breakdown || residual <= opt.tol) return out;
    start = std::move(x);
  }
  if (!opt.throw_on_failure) return out;
  throw ConvergenceError("Lanczos did not converge", residual);
}

struct KrylovExpOptions {
  int max_dim{30};
  double tol{1e-12};
  int max_splits{16};
};

struct KrylovExpInfo {
  int matvecs{0};
  int substeps{0};
  double error_estimate{0.0};
};

/// exp(-i tau H) v for Hermitian H (tau may be negative). When the Krylov
/// space of max_dim does not reach tol the step is halved recursively; the
/// number of substeps is reported through `info`.
template <class MatVec>
Eigen::VectorXcd expm_krylov(MatVec&& apply, const Eigen::VectorXcd& v, double tau,
                             const KrylovExpOptions& opt = {}, KrylovExpInfo* info = nullptr,
                             int depth = 0) {
  using cplx = std::complex<double>;
  const double nv = v.norm();
  if (nv == 0.0 || tau == 0.0) {
    if (info) ++info->substeps;
    return v;
  }
  const Eigen::Index n = v.size();
  const int m = static_cast<int>(std::min<Eigen::Index>(opt.max_dim, n));
  std::vector<Eigen::VectorXcd> basis{v / nv};
  std::vector<double> alpha, beta;
  Eigen::VectorXcd coeffs;
  double err = 0.0;
  bool done = false;
  for (int j = 0; j < m; ++j) {
    Eigen::VectorXcd w = apply(basis[j]);
    if (info) ++info->matvecs;
    alpha.push_back(std::real(basis[j].dot(w)));
    detail::reorthogonalize(w, basis);
    const double b = w.norm();
    const int k = j + 1;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(detail::tridiagonal(alpha, beta, k));
    const Eigen::MatrixXd& s = es.eigenvectors();
    Eigen::VectorXcd phase(k);
    for (int i = 0; i < k; ++i) phase(i) = std::exp(cplx(0.0, -tau * es.eigenvalues()(i)));
    coeffs = s.cast<cplx>() * phase.asDiagonal() * s.row(0).transpose().cast<cplx>();
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    if (b <= 1e-14 * scale) {
      err = 0.0;
      done = true;
      break;
    }
    err = b * std::abs(coeffs(k - 1));
    if (err <= opt.tol) {
      done = true;
      break;
    }
    if (j + 1 == m) break;
    beta.push_back(b);
    basis.push_back(w / b);
  }
  if (!done && m == n) done = true;  // full space reached: exact up to roundoff
  if (!done) {
    if (depth >= opt.max_splits) {
      throw ConvergenceError("Krylov exponential did not converge after step splitting", err);
    }
    Eigen::VectorXcd half = expm_krylov(apply, v, 0.5 * tau, opt, info, depth + 1);
    return expm_krylov(apply, half, 0.5 * tau, opt, info, depth + 1);
  }
  if (info) {
    ++info->substeps;
    info->error_estimate = std::max(info->error_estimate, err);
  }
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(n);
  for (Eigen::Index i = 0; i < coeffs.size(); ++i) out += basis[i] * coeffs(i);
  return out * nv;
}

}  // namespace spinprobe::linalg
