#include "mvcca/kernels.hpp"

#include <vector>

#include "mvcca/errors.hpp"

namespace mvcca::kernels {

namespace {

void check_pair(const MatrixXd& x, const MatrixXd& y) {
  if (x.rows() != y.rows()) throw DimensionError("cross covariance: sample counts differ");
  if (x.rows() < 1) throw InsufficientSamplesError("cross covariance: no samples");
}

Index block_begin(Index n, Index b) { return n * b / kReductionBlocks; }

}  // namespace

namespace serial {

VectorXd column_means(const MatrixXd& x) {
  VectorXd mean = VectorXd::Zero(x.cols());
  for (Index t = 0; t < x.rows(); ++t)
    for (Index c = 0; c < x.cols(); ++c) mean(c) += x(t, c);
  return mean / static_cast<double>(x.rows());
}

MatrixXd centered_cross_covariance(const MatrixXd& x, const MatrixXd& y) {
  check_pair(x, y);
  const VectorXd mx = column_means(x);
  const VectorXd my = column_means(y);
  MatrixXd acc = MatrixXd::Zero(x.cols(), y.cols());
  for (Index t = 0; t < x.rows(); ++t)
    for (Index a = 0; a < x.cols(); ++a) {
      const double dx = x(t, a) - mx(a);
      for (Index b = 0; b < y.cols(); ++b) acc(a, b) += dx * (y(t, b) - my(b));
    }
  return acc / static_cast<double>(x.rows());
}

}  // namespace serial

namespace omp {

VectorXd column_means(const MatrixXd& x) {
  const Index n = x.rows();
  std::vector<VectorXd> partial(kReductionBlocks, VectorXd::Zero(x.cols()));
#pragma omp parallel for schedule(static)
  for (Index b = 0; b < kReductionBlocks; ++b) {
    const Index lo = block_begin(n, b), hi = block_begin(n, b + 1);
    if (hi > lo) partial[static_cast<std::size_t>(b)] = x.middleRows(lo, hi - lo).colwise().sum().transpose();
  }
  VectorXd mean = VectorXd::Zero(x.cols());
  for (const auto& p : partial) mean += p;
  return mean / static_cast<double>(n);
}

MatrixXd centered_cross_covariance(const MatrixXd& x, const MatrixXd& y) {
  check_pair(x, y);
  const Index n = x.rows();
  const Eigen::RowVectorXd mx = column_means(x).transpose();
  const Eigen::RowVectorXd my = column_means(y).transpose();
  std::vector<MatrixXd> partial(kReductionBlocks, MatrixXd::Zero(x.cols(), y.cols()));
#pragma omp parallel for schedule(static)
  for (Index b = 0; b < kReductionBlocks; ++b) {
    const Index lo = block_begin(n, b), hi = block_begin(n, b + 1);
    if (hi <= lo) continue;
    const MatrixXd xc = x.middleRows(lo, hi - lo).rowwise() - mx;
    const MatrixXd yc = y.middleRows(lo, hi - lo).rowwise() - my;
    partial[static_cast<std::size_t>(b)].noalias() = xc.transpose() * yc;
  }
  MatrixXd acc = MatrixXd::Zero(x.cols(), y.cols());
  for (const auto& p : partial) acc += p;
  return acc / static_cast<double>(n);
}

}  // namespace omp

}  // namespace mvcca::kernels
