#pragma once

#include <vector>

#include <Eigen/Dense>

namespace mvcca::linalg {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Symmetric inverse square root M^{-1/2} by eigendecomposition.
/// Throws NearSingularError when the smallest eigenvalue is <= floor.
MatrixXd sym_inv_sqrt(const MatrixXd& m, double floor);

/// Thin-or-full SVD with singular values nonincreasing and signs fixed so that
/// the largest-magnitude entry of each left singular vector is nonnegative.
/// U is p×p and V is q×q; only the first min(p,q) columns are paired.
struct SvdResult {
  MatrixXd u;
  VectorXd singular_values;
  MatrixXd v;
};

SvdResult svd_ordered(const MatrixXd& m);

/// Eigenpairs of a symmetric matrix, eigenvalues nonincreasing, same sign rule.
struct SymEigen {
  VectorXd values;
  MatrixXd vectors;
};

SymEigen sym_eigen_descending(const MatrixXd& m);

/// Largest singular value.
double spectral_norm(const MatrixXd& m);

/// A d×r matrix with orthonormal columns. r may be zero.
class SubspaceBasis {
 public:
  SubspaceBasis() = default;
  /// Validates BᵀB = I within `tol`.
  explicit SubspaceBasis(MatrixXd basis, double tol = 1e-10);
  /// Orthonormalizes arbitrary full-column-rank columns (thin QR).
  static SubspaceBasis span_of(const MatrixXd& columns);
  /// Leading `rank` columns of an orthogonal matrix.
  static SubspaceBasis leading(const MatrixXd& orthogonal, Index rank);

  const MatrixXd& matrix() const noexcept { return basis_; }
  Index ambient_dim() const noexcept { return basis_.rows(); }
  Index rank() const noexcept { return basis_.cols(); }

 private:
  MatrixXd basis_;
};

struct PrincipalAngles {
  std::vector<double> degrees;  // nondecreasing
  double mean_degrees = 0.0;
  double max_degrees = 0.0;
};

PrincipalAngles principal_angles(const SubspaceBasis& a, const SubspaceBasis& b);

/// ‖(I − A Aᵀ) B‖₂, the sine of the largest principal angle. Ranks must agree.
double sin_theta_norm(const SubspaceBasis& a, const SubspaceBasis& b);

MatrixXd projector(const SubspaceBasis& b);

}  // namespace mvcca::linalg
