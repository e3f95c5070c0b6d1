#pragma once

// Data-parallel inner loops. Each kernel has an OpenMP version used by the
// library and a plain serial reference kept for tests and benchmarks.
//
// The OpenMP reductions split samples into kReductionBlocks fixed blocks and
// combine partial sums in block order, so their output is bit-identical for
// any thread count.

#include <Eigen/Dense>

namespace mvcca::kernels {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr Index kReductionBlocks = 64;

namespace serial {

VectorXd column_means(const MatrixXd& x);

/// (1/n) Σ_t (x_t − x̄)(y_t − ȳ)ᵀ with two-pass centering, naive loop order.
MatrixXd centered_cross_covariance(const MatrixXd& x, const MatrixXd& y);

/// out.row(t) = fn(in.row(t)) for every t.
template <class RowFn>
void map_rows(const MatrixXd& in, MatrixXd& out, RowFn&& fn) {
  for (Index t = 0; t < in.rows(); ++t) out.row(t) = fn(in.row(t));
}

}  // namespace serial

namespace omp {

VectorXd column_means(const MatrixXd& x);

MatrixXd centered_cross_covariance(const MatrixXd& x, const MatrixXd& y);

template <class RowFn>
void map_rows(const MatrixXd& in, MatrixXd& out, RowFn&& fn) {
  const Index n = in.rows();
#pragma omp parallel for schedule(static)
  for (Index t = 0; t < n; ++t) out.row(t) = fn(in.row(t));
}

}  // namespace omp

}  // namespace mvcca::kernels
