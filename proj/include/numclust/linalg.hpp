#pragma once

// Dense numeric kernel: SPD factorization with ridge escalation, Gaussian logpdf,
// scatter accumulation, duplication matrix, Kronecker product. Eigen supplies the
// storage and the raw LLT; everything above that is defined here.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <vector>

#include "errors.hpp"

namespace numclust {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Cholesky factor of m + ridge * I. Immutable once built; all downstream solves and
// determinants go through this so regularization is applied exactly once per matrix.
class SpdFactor {
 public:
  SpdFactor(Matrix lower, double log_det, double ridge)
      : lower_(std::move(lower)), log_det_(log_det), ridge_(ridge) {}

  const Matrix& lower() const { return lower_; }
  double log_det() const { return log_det_; }
  double ridge() const { return ridge_; }
  int dim() const { return static_cast<int>(lower_.rows()); }

  Vector solve(const Vector& b) const {
    if (b.size() != lower_.rows()) throw DimMismatch("SpdFactor::solve: size mismatch");
    Vector y = lower_.triangularView<Eigen::Lower>().solve(b);
    return lower_.transpose().triangularView<Eigen::Upper>().solve(y);
  }

  Matrix solve(const Matrix& b) const {
    if (b.rows() != lower_.rows()) throw DimMismatch("SpdFactor::solve: size mismatch");
    Matrix y = lower_.triangularView<Eigen::Lower>().solve(b);
    return lower_.transpose().triangularView<Eigen::Upper>().solve(y);
  }

  Matrix inverse() const {
    Matrix id = Matrix::Identity(lower_.rows(), lower_.rows());
    return solve(id);
  }

  // y' (L L')^-1 y as a squared triangular-solve norm; never forms the inverse.
  double quad_form(const Vector& y) const {
    if (y.size() != lower_.rows()) throw DimMismatch("SpdFactor::quad_form: size mismatch");
    return lower_.triangularView<Eigen::Lower>().solve(y).squaredNorm();
  }

  // Squared Mahalanobis distance of every row of x to mu, batched through one
  // triangular solve. Hot path of the E step.
  Vector mahalanobis_sq(const Eigen::Ref<const Matrix>& x, const Vector& mu) const {
    if (x.cols() != lower_.rows() || mu.size() != lower_.rows())
      throw DimMismatch("SpdFactor::mahalanobis_sq: size mismatch");
    Matrix y = (x.rowwise() - mu.transpose()).transpose();
    lower_.triangularView<Eigen::Lower>().solveInPlace(y);
    return y.colwise().squaredNorm().transpose();
  }

 private:
  Matrix lower_;
  double log_det_;
  double ridge_;
};

// Factor m, adding ridge * I only if needed. The ladder tries 0, eps, 10 eps, 100 eps
// with eps = reg_eps * trace(m) / r (unit scale when the trace is not positive), then
// gives up with NotSpd. reg_eps = 0 means strict: SPD or throw.
inline SpdFactor cholesky(const Matrix& m, double reg_eps = 1e-8) {
  if (m.rows() != m.cols()) throw DimMismatch("cholesky: matrix not square");
  const auto r = m.rows();
  if (r == 0) throw DimMismatch("cholesky: empty matrix");
  const double mag = m.cwiseAbs().maxCoeff();
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * std::max(mag, 1.0))
    throw InvalidArgument("cholesky: matrix not symmetric");

  double scale = m.trace() / static_cast<double>(r);
  if (!(scale > 0.0)) scale = 1.0;

  const double factors[] = {0.0, 1.0, 10.0, 100.0};
  for (double f : factors) {
    const double ridge = f * reg_eps * scale;
    Matrix work = m;
    work.diagonal().array() += ridge;
    Eigen::LLT<Matrix> llt(work);
    if (llt.info() == Eigen::Success) {
      Matrix lower = llt.matrixL();
      if ((lower.diagonal().array() > 0.0).all()) {
        const double log_det = 2.0 * lower.diagonal().array().log().sum();
        return SpdFactor(std::move(lower), log_det, ridge);
      }
    }
    if (reg_eps == 0.0) break;  // the ladder would retry the same matrix
  }
  throw NotSpd("cholesky: not positive definite after ridge escalation");
}

inline double mvn_logpdf(const Vector& x, const Vector& mu, const SpdFactor& sigma) {
  if (x.size() != mu.size() || x.size() != sigma.dim())
    throw DimMismatch("mvn_logpdf: size mismatch");
  const double r = static_cast<double>(x.size());
  constexpr double log2pi = 1.8378770664093454835606594728112;  // log(2 pi)
  return -0.5 * (r * log2pi + sigma.log_det() + sigma.quad_form(x - mu));
}

// Sum of (x - c)(x - c)' over the rows of x. Two-sided products accumulated as
// Y'Y for accuracy and speed.
inline Matrix scatter_matrix(const Eigen::Ref<const Matrix>& x, const Vector& center) {
  if (x.rows() == 0) throw EmptySubset("scatter_matrix: no rows");
  if (x.cols() != center.size()) throw DimMismatch("scatter_matrix: center size mismatch");
  Matrix y = x.rowwise() - center.transpose();
  return y.transpose() * y;
}

// Duplication matrix D_r: vec(S) = D * uniq(S) for symmetric S, where uniq stacks
// the columns of the lower triangle (s11, s21, ..., sr1, s22, ..., srr).
inline Matrix duplication_matrix(int r) {
  if (r < 1) throw InvalidArgument("duplication_matrix: r must be >= 1");
  const int cols = r * (r + 1) / 2;
  Matrix d = Matrix::Zero(static_cast<long>(r) * r, cols);
  auto uniq_index = [r](int i, int j) {
    // requires i >= j; column offsets shrink as the triangle narrows
    return j * r - j * (j - 1) / 2 + (i - j);
  };
  for (int j = 0; j < r; ++j)
    for (int i = 0; i < r; ++i)
      d(static_cast<long>(j) * r + i, uniq_index(std::max(i, j), std::min(i, j))) = 1.0;
  return d;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (long i = 0; i < a.rows(); ++i)
    for (long j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace numclust
