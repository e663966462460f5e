#pragma once

#include <Eigen/Dense>

#include <complex>
#include <random>
#include <vector>

namespace gfchan {

using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using Cplx = std::complex<double>;
using Rng = std::mt19937_64;

/// Largest singular value.
template <typename Derived>
double spectral_norm(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return 0.0;
  typename Derived::PlainObject plain = m;
  return plain.jacobiSvd().singularValues()(0);
}

/// Largest eigenvalue norm of a (generally non-normal) square matrix.
template <typename Derived>
double spectral_radius(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return 0.0;
  const CMat plain = m.template cast<Cplx>();
  Eigen::ComplexEigenSolver<CMat> es(plain, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Antisymmetric part (M - M^T)/2, evaluated into fresh storage so callers
/// may assign the result back to M.
template <typename Derived>
typename Derived::PlainObject antisymmetrize(
    const Eigen::MatrixBase<Derived>& m) {
  const typename Derived::PlainObject plain = m;
  typename Derived::PlainObject out = 0.5 * (plain - plain.transpose());
  return out;
}

/// max_ij |(M + M^T)_ij|, zero for antisymmetric matrices.
template <typename Derived>
double antisymmetry_defect(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return 0.0;
  return (m + m.transpose()).cwiseAbs().maxCoeff();
}

/// max_ij |(M + M^dag)_ij|, zero for anti-hermitian matrices.
template <typename Derived>
double antihermiticity_defect(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return 0.0;
  return (m + m.adjoint()).cwiseAbs().maxCoeff();
}

template <typename DerivedA, typename DerivedB>
typename DerivedA::PlainObject kron(const Eigen::MatrixBase<DerivedA>& a_in,
                                    const Eigen::MatrixBase<DerivedB>& b_in) {
  using M = typename DerivedA::PlainObject;
  const M a = a_in;
  const M b = b_in.template cast<typename M::Scalar>();
  M out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Orthonormal basis of the column span, rank decided by `rank_tol` on
/// singular values. Returns an n x rank matrix.
template <typename Derived>
typename Derived::PlainObject orthonormal_span(
    const Eigen::MatrixBase<Derived>& columns_in, double rank_tol = 1e-8) {
  using M = typename Derived::PlainObject;
  const M columns = columns_in;
  if (columns.cols() == 0) return M(columns.rows(), 0);
  Eigen::JacobiSVD<M> svd(columns, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > rank_tol * s(0)) ++rank;
  return svd.matrixU().leftCols(rank);
}

/// Orthonormal basis of the orthogonal complement of span(q), q assumed to
/// have orthonormal columns. Returns an n x (n - cols) matrix.
template <typename Derived>
typename Derived::PlainObject orthonormal_complement(
    const Eigen::MatrixBase<Derived>& q_in) {
  using M = typename Derived::PlainObject;
  const M q = q_in;
  const Eigen::Index n = q.rows();
  const Eigen::Index m = q.cols();
  if (m == 0) return M::Identity(n, n);
  M resid = M::Identity(n, n) - q * q.adjoint();
  Eigen::JacobiSVD<M> svd(resid, Eigen::ComputeThinU);
  return svd.matrixU().leftCols(n - m);
}

/// Haar-ish random orthogonal matrix (QR of a Gaussian matrix with the R
/// diagonal sign fixed, so results are deterministic given the generator).
Mat random_orthogonal(Rng& rng, int n);
/// Random antisymmetric matrix with iid Gaussian entries above the diagonal.
Mat random_antisymmetric(Rng& rng, int n, double scale = 1.0);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  int n_points = 0;
};

/// Least-squares line through (x_i, y_i). Requires at least two points.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace gfchan
