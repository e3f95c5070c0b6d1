#include "mvcca/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "mvcca/errors.hpp"

namespace mvcca::linalg {

namespace {

void require_finite(const MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw NumericError(std::string(what) + ": non-finite input");
}

// Flip column k (and its partner) so its largest-magnitude entry is >= 0.
bool needs_flip(const MatrixXd& m, Index col) {
  Index arg = 0;
  double best = -1.0;
  for (Index r = 0; r < m.rows(); ++r) {
    const double a = std::abs(m(r, col));
    if (a > best) {
      best = a;
      arg = r;
    }
  }
  return m.rows() > 0 && m(arg, col) < 0.0;
}

}  // namespace

MatrixXd sym_inv_sqrt(const MatrixXd& m, double floor) {
  if (m.rows() != m.cols()) throw DimensionError("sym_inv_sqrt: matrix is not square");
  require_finite(m, "sym_inv_sqrt");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw DimensionError("sym_inv_sqrt: matrix is not symmetric");
  const MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym);
  if (es.info() != Eigen::Success) throw NumericError("sym_inv_sqrt: eigendecomposition failed");
  const VectorXd& ev = es.eigenvalues();
  if (ev.size() > 0 && ev.minCoeff() <= floor)
    throw NearSingularError("covariance is near-singular (smallest eigenvalue " + std::to_string(ev.minCoeff()) +
                            " <= floor " + std::to_string(floor) + "); representation collapse");
  const VectorXd inv_sqrt = ev.array().rsqrt();
  MatrixXd out = es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

SvdResult svd_ordered(const MatrixXd& m) {
  require_finite(m, "svd_ordered");
  Eigen::JacobiSVD<MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  SvdResult out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
  // JacobiSVD already sorts nonincreasing; a stable sort keeps backend order on ties.
  const Index k = out.singular_values.size();
  std::vector<Index> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return out.singular_values(a) > out.singular_values(b);
  });
  SvdResult sorted = out;
  for (Index c = 0; c < k; ++c) {
    const Index src = order[static_cast<std::size_t>(c)];
    sorted.singular_values(c) = out.singular_values(src);
    sorted.u.col(c) = out.u.col(src);
    sorted.v.col(c) = out.v.col(src);
  }
  for (Index c = 0; c < k; ++c) {
    if (needs_flip(sorted.u, c)) {
      sorted.u.col(c) *= -1.0;
      sorted.v.col(c) *= -1.0;
    }
  }
  for (Index c = k; c < sorted.u.cols(); ++c)
    if (needs_flip(sorted.u, c)) sorted.u.col(c) *= -1.0;
  for (Index c = k; c < sorted.v.cols(); ++c)
    if (needs_flip(sorted.v, c)) sorted.v.col(c) *= -1.0;
  return sorted;
}

SymEigen sym_eigen_descending(const MatrixXd& m) {
  if (m.rows() != m.cols()) throw DimensionError("sym_eigen_descending: matrix is not square");
  require_finite(m, "sym_eigen_descending");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (m + m.transpose()));
  if (es.info() != Eigen::Success) throw NumericError("sym_eigen_descending: eigendecomposition failed");
  SymEigen out{es.eigenvalues().reverse(), es.eigenvectors().rowwise().reverse()};
  for (Index c = 0; c < out.vectors.cols(); ++c)
    if (needs_flip(out.vectors, c)) out.vectors.col(c) *= -1.0;
  return out;
}

double spectral_norm(const MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  require_finite(m, "spectral_norm");
  return Eigen::JacobiSVD<MatrixXd>(m).singularValues()(0);
}

SubspaceBasis::SubspaceBasis(MatrixXd basis, double tol) : basis_(std::move(basis)) {
  if (basis_.cols() > basis_.rows()) throw DimensionError("SubspaceBasis: rank exceeds ambient dimension");
  require_finite(basis_, "SubspaceBasis");
  if (basis_.cols() == 0) return;
  const MatrixXd gram = basis_.transpose() * basis_;
  if ((gram - MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() > tol)
    throw DimensionError("SubspaceBasis: columns are not orthonormal");
}

SubspaceBasis SubspaceBasis::span_of(const MatrixXd& columns) {
  if (columns.cols() == 0) return SubspaceBasis(MatrixXd(columns.rows(), 0));
  Eigen::ColPivHouseholderQR<MatrixXd> qr(columns);
  if (qr.rank() < columns.cols()) throw DimensionError("SubspaceBasis::span_of: columns are rank deficient");
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(columns.rows(), columns.cols());
  return SubspaceBasis(std::move(q));
}

SubspaceBasis SubspaceBasis::leading(const MatrixXd& orthogonal, Index rank) {
  if (rank < 0 || rank > orthogonal.cols()) throw DimensionError("SubspaceBasis::leading: rank out of range");
  return SubspaceBasis(orthogonal.leftCols(rank));
}

PrincipalAngles principal_angles(const SubspaceBasis& a, const SubspaceBasis& b) {
  if (a.ambient_dim() != b.ambient_dim()) throw DimensionError("principal_angles: ambient dimensions differ");
  PrincipalAngles out;
  if (a.rank() == 0 || b.rank() == 0) return out;
  const VectorXd cosines = Eigen::JacobiSVD<MatrixXd>(a.matrix().transpose() * b.matrix()).singularValues();
  out.degrees.reserve(static_cast<std::size_t>(cosines.size()));
  for (Index k = 0; k < cosines.size(); ++k) {
    const double c = std::clamp(cosines(k), 0.0, 1.0);
    out.degrees.push_back(std::acos(c) * 180.0 / std::numbers::pi);
  }
  std::sort(out.degrees.begin(), out.degrees.end());
  out.mean_degrees = std::accumulate(out.degrees.begin(), out.degrees.end(), 0.0) /
                     static_cast<double>(out.degrees.size());
  out.max_degrees = out.degrees.back();
  return out;
}

double sin_theta_norm(const SubspaceBasis& a, const SubspaceBasis& b) {
  if (a.ambient_dim() != b.ambient_dim()) throw DimensionError("sin_theta_norm: ambient dimensions differ");
  if (a.rank() != b.rank()) throw DimensionError("sin_theta_norm: ranks differ");
  if (a.rank() == 0) return 0.0;
  const MatrixXd residual = b.matrix() - a.matrix() * (a.matrix().transpose() * b.matrix());
  return std::clamp(spectral_norm(residual), 0.0, 1.0);
}

MatrixXd projector(const SubspaceBasis& b) { return b.matrix() * b.matrix().transpose(); }

}  // namespace mvcca::linalg
